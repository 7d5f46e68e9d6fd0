"""Exit criteria. Each test is one criterion at its stated tolerance."""

import time

import numpy as np
import pytest

from helpers import random_coherent_mixture, random_state
from nonclassical import antibunching as ab
from nonclassical import fock
from nonclassical.landscape import k_of, min_k_grid, min_k_vertex
from nonclassical.stats import is_sub_poisson, k_from_distribution, k_measure, photon_distribution
from nonclassical.witness import cb_check, factorial_moments, fit_classical_measure, hankel_witness
from oracles import two_level_g2_oracle


@pytest.mark.acceptance("AC1 Fock-state anchor: K(|n>) = -n, n = 1..20, within 1e-12, < 1 s")
def test_ac1_fock_anchor():
    t0 = time.perf_counter()
    for n in range(1, 21):
        psi = fock.fock_state(fock.make_space(n + 4), n)
        assert abs(k_measure(psi) - (-n)) <= 1e-12, n
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.acceptance("AC2 two-term minimum: vertex min on {1,2} = -2 exactly, grid(1e4) within 2e-4, < 1 s")
def test_ac2_two_term_minimum():
    t0 = time.perf_counter()
    vertex = min_k_vertex((1, 2))
    assert vertex.min_k == -2.0
    grid = min_k_grid((1, 2), 10_000)
    assert abs(grid.min_k - vertex.min_k) <= 2e-4
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.acceptance("AC3 Poisson boundary: coherent |alpha|^2 in {0.5,1,4,10}: |K| < 1e-8, not sub-Poisson")
def test_ac3_poisson_boundary():
    space = fock.make_space(64)
    for mean in (0.5, 1.0, 4.0, 10.0):
        psi = fock.coherent_state(space, np.sqrt(mean), tail_tol=1e-12)
        flag, report = is_sub_poisson(psi)
        assert abs(report.k) < 1e-8, mean
        assert flag is False


@pytest.mark.acceptance("AC4 classicality soundness/completeness: Fock n=1..6 infeasible, classical family feasible, < 30 s")
def test_ac4_classicality():
    t0 = time.perf_counter()
    for n in range(1, 7):
        m = factorial_moments(fock.fock_state(fock.make_space(n + 6), n))
        assert abs(cb_check(m) - (-n)) <= 1e-10
        assert not hankel_witness(m).classical_feasible
        assert not fit_classical_measure(m).feasible

    rng = np.random.default_rng(4)
    space = fock.make_space(64)
    classical = [fock.coherent_state(space, a) for a in (0.7, 1.0, 2.0, np.sqrt(10))]
    classical += [fock.thermal_state(space, nb) for nb in (0.5, 1.0)]
    classical += [random_coherent_mixture(rng) for _ in range(50)]
    for state in classical:
        m = factorial_moments(state)
        assert hankel_witness(m).classical_feasible
        fit = fit_classical_measure(m)
        assert fit.feasible and fit.residual < 1e-6
    assert time.perf_counter() - t0 < 30.0


@pytest.mark.acceptance("AC5 oracle equivalence: operator K vs distribution K within 1e-10 on 100 seeded states")
def test_ac5_oracle_equivalence():
    rng = np.random.default_rng(5)
    for _ in range(100):
        psi = random_state(rng, int(rng.integers(4, 24)))
        assert abs(k_measure(psi) - k_from_distribution(photon_distribution(psi))) < 1e-10


@pytest.mark.acceptance("AC6 antibunching witness: P(0) = 0, detected, g2 within 1% of fine-step oracle, < 10 s")
def test_ac6_antibunching_witness():
    t0 = time.perf_counter()
    gamma, omega = 1.0, 0.05
    model = ab.EmitterModel("two-level-driven", gamma, omega)
    taus = ab.tau_grid(10.0 / gamma, 101)
    series = ab.g2_correlation(model, taus)
    assert abs(series.p_raw[0]) <= np.finfo(float).eps
    assert ab.detect_antibunching(series).antibunched
    oracle, _ = two_level_g2_oracle(gamma, omega, taus, h=ab.default_step(model) / 10)
    assert oracle[0] == 0.0 and series.g2[0] == 0.0
    rel = np.abs(series.g2[1:] - oracle[1:]) / oracle[1:]
    assert np.max(rel) <= 0.01
    assert time.perf_counter() - t0 < 10.0


@pytest.mark.acceptance("AC7 classical Schwarz bound: telegraph and OU, 1e6 samples, seeds 0-2, 3-sigma, < 60 s")
def test_ac7_classical_schwarz_bound():
    t0 = time.perf_counter()
    taus = ab.tau_grid(3.0, 31)
    telegraph = ab.ClassicalProcessModel("random-telegraph", rate=1.0, levels=(0.0, 1.0))
    ou = ab.ClassicalProcessModel("ou-intensity", rate=1.0, sigma=1.0, offset=0.5)
    for seed in (0, 1, 2):
        for model in (telegraph, ou):
            s = ab.simulate_classical_intensity(model, taus, 1_000_000, seed=seed)
            assert np.all(s.p_raw <= s.p_raw[0] + 3 * s.stderr)
            assert not ab.schwarz_violation_test(s)
            if model is telegraph:
                exact = 0.25 + 0.25 * np.exp(-2.0 * taus)
                assert np.all(np.abs(s.p_raw - exact) <= 3 * s.stderr)
    assert time.perf_counter() - t0 < 60.0


def _random_support(rng):
    size = int(rng.integers(1, 7))
    return tuple(sorted(int(v) for v in rng.choice(25, size=size, replace=False)))


@pytest.mark.acceptance("AC8 concavity (200 checks) and vertex dominance (1000 points per support)")
def test_ac8_concavity_and_vertex_dominance():
    rng = np.random.default_rng(8)
    for _ in range(200):
        support = _random_support(rng)
        r = len(support)
        x, y = rng.dirichlet(np.ones(r)), rng.dirichlet(np.ones(r))
        lam = rng.uniform()
        mix = lam * x + (1 - lam) * y
        mix /= mix.sum()
        assert k_of(support, mix) >= lam * k_of(support, x) + (1 - lam) * k_of(support, y) - 1e-12

    supports = [(1, 2), (0, 1, 2, 3), (0, 4, 9), (3,)] + [_random_support(rng) for _ in range(6)]
    for support in supports:
        best = min_k_vertex(support).min_k
        pts = rng.dirichlet(np.ones(len(support)), 1000)
        for x in pts:
            assert best <= k_of(support, x / x.sum()) + 1e-12
