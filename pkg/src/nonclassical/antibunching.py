"""Intensity correlations P(tau) for quantum emitters and classical processes.

Quantum side: a Lindblad emitter (driven two-level atom or damped driven
cavity) is put in its stationary state and the two-time intensity
correlation is obtained from the quantum regression rule,

    P(tau) = Tr[S*S exp(L tau)(S rho_ss S*)],

with S the source operator standing in for the positive-frequency field.
Time stepping is fixed-step RK4; for a linear generator one RK4 step is the
fourth-order Taylor polynomial of ``exp(h L)``, so it is built once as a
matrix and reused.

Classical side: stationary nonnegative intensity processes are sampled
exactly on the tau grid and E[I(0) I(tau)] is estimated with batch-means
error bars. For those, P(tau) <= P(0) always holds (Schwarz), so an
observed P(tau) > P(0) is the antibunching signature.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    InvalidArgumentError,
    NonUniqueSteadyStateError,
    NormalizationUndefinedError,
    StepCountOverflowError,
)
from .fock import DensityOperator, FockSpace, OperatorMatrix, annihilation

EMITTER_KINDS = ("two-level-driven", "damped-cavity")
PROCESS_KINDS = ("random-telegraph", "ou-intensity")

DEFAULT_CAVITY_DIM = 16
DEFAULT_DETECT_TOL = 1e-9
DEFAULT_MAX_STEPS = 10_000_000
STEP_PER_RATE = 0.01
SUBSTEPS_PER_INTERVAL = 10
NULL_SPACE_TOL = 1e-10
EMISSION_RATE_FLOOR = 1e-14
N_BATCHES = 32
MIN_SAMPLES = 1000
_SAMPLE_BLOCK = 1 << 17


# -- quantum emitters ---------------------------------------------------------


@dataclass(frozen=True)
class EmitterModel:
    """Stationary light source.

    ``two-level-driven``: H = omega_r/2 (s+ + s-), collapse sqrt(gamma) s-.
    ``damped-cavity``: H = omega_r/2 (a + a*), collapse sqrt(gamma) a, on
    ``dim`` Fock levels.
    """

    kind: str
    gamma: float
    omega_r: float = 0.0
    dim: int | None = None

    def __post_init__(self):
        if self.kind not in EMITTER_KINDS:
            raise InvalidArgumentError(f"unknown emitter kind {self.kind!r}")
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InvalidArgumentError(f"gamma must be positive, got {self.gamma!r}")
        if not np.isfinite(self.omega_r):
            raise InvalidArgumentError("omega_r must be finite")
        dim = self.dim
        if self.kind == "two-level-driven":
            if dim not in (None, 2):
                raise InvalidArgumentError("two-level emitter has dim 2")
            dim = 2
        elif dim is None:
            dim = DEFAULT_CAVITY_DIM
        object.__setattr__(self, "dim", int(dim))

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim)

    def source(self) -> OperatorMatrix:
        # on two levels the Fock lowering operator is exactly sigma-minus
        return annihilation(self.space)

    def hamiltonian(self) -> np.ndarray:
        s = self.source().entries
        return 0.5 * self.omega_r * (s + s.conj().T)

    def rate_scale(self) -> float:
        return max(self.gamma, abs(self.omega_r))


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    """Sampled P(tau) with its g2 normalization.

    ``stderr`` is set only for Monte Carlo estimates.
    """

    tau: np.ndarray
    p_raw: np.ndarray
    g2: np.ndarray
    mean_intensity: float
    stderr: np.ndarray | None = None

    def __post_init__(self):
        _check_tau_grid(self.tau)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["tau", "p_raw", "g2", "stderr"])
        for i, t in enumerate(self.tau):
            se = "" if self.stderr is None else repr(float(self.stderr[i]))
            writer.writerow([repr(float(t)), repr(float(self.p_raw[i])), repr(float(self.g2[i])), se])
        return buf.getvalue()


@dataclass(frozen=True)
class AntibunchingReport:
    antibunched: bool
    witness_tau: float | None
    margin: float
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "antibunched": self.antibunched,
            "witness_tau": self.witness_tau,
            "margin": self.margin,
            "tolerance": self.tolerance,
        }


def _check_tau_grid(tau):
    tau = np.asarray(tau, dtype=float)
    if tau.ndim != 1 or tau.size < 1 or not np.all(np.isfinite(tau)):
        raise InvalidArgumentError("tau grid must be a non-empty finite vector")
    if tau[0] != 0.0:
        raise InvalidArgumentError("tau grid must start at 0")
    if np.any(np.diff(tau) <= 0):
        raise InvalidArgumentError("tau grid must be strictly increasing")
    return tau


def tau_grid(tau_max: float, n_points: int) -> np.ndarray:
    if n_points < 2 or not tau_max > 0:
        raise InvalidArgumentError("need tau_max > 0 and at least 2 points")
    return np.linspace(0.0, tau_max, n_points)


def liouvillian(model: EmitterModel) -> np.ndarray:
    """Lindblad generator acting on column-stacked density matrices."""
    d = model.dim
    eye = np.eye(d)
    H = model.hamiltonian()
    J = np.sqrt(model.gamma) * model.source().entries
    JdJ = J.conj().T @ J
    # vec(A X B) = (B^T kron A) vec(X)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    L += np.kron(J.conj(), J) - 0.5 * np.kron(eye, JdJ) - 0.5 * np.kron(JdJ.T, eye)
    return L


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, d: int) -> np.ndarray:
    return v.reshape(d, d, order="F")


def steady_state(model: EmitterModel) -> DensityOperator:
    """Fixed point of the Lindblad generator from its null space."""
    L = liouvillian(model)
    _, sv, vh = np.linalg.svd(L)
    scale = max(sv[0], 1.0)
    if sv[-2] < NULL_SPACE_TOL * scale:
        raise NonUniqueSteadyStateError(
            f"generator null space has dimension > 1 (singular values {sv[-2]:.3e}, {sv[-1]:.3e})"
        )
    rho = _unvec(vh[-1].conj(), model.dim)
    rho = rho / np.trace(rho)
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(model.space, rho / np.trace(rho).real)


def rk4_step_matrix(L: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for dv/dt = L v, as a matrix."""
    hL = h * L
    eye = np.eye(L.shape[0], dtype=complex)
    return eye + hL @ (eye + hL @ (eye / 2 + hL @ (eye / 6 + hL / 24)))


def default_step(model: EmitterModel) -> float:
    return STEP_PER_RATE / model.rate_scale()


def _n_steps(duration: float, h: float, max_steps: int) -> int:
    n = math.ceil(duration / h - 1e-9) if duration > 0 else 0
    if n > max_steps:
        raise StepCountOverflowError(f"{n} RK4 steps exceed the limit {max_steps}")
    return n


def _evolve_vec(M: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        v = M @ v
    return v


def lindblad_propagate(
    model: EmitterModel,
    rho: DensityOperator | np.ndarray,
    t: float,
    step: float | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> DensityOperator:
    """rho(t) by fixed-step RK4; the step is shrunk so it divides t exactly."""
    if not (np.isfinite(t) and t >= 0):
        raise InvalidArgumentError(f"t must be >= 0, got {t!r}")
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    h = default_step(model) if step is None else step
    n = _n_steps(t, h, max_steps)
    if n == 0:
        return DensityOperator(model.space, mat)
    M = rk4_step_matrix(liouvillian(model), t / n)
    out = _unvec(_evolve_vec(M, _vec(mat), n), model.dim)
    out = 0.5 * (out + out.conj().T)
    return DensityOperator(model.space, out)


def regression_correlation(
    model: EmitterModel,
    taus: Sequence[float],
    rho0: np.ndarray,
    step: float | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> np.ndarray:
    """Tr[S*S X(tau)] where X(0) = S rho0 S* evolves under the generator."""
    taus = _check_tau_grid(taus)
    S = model.source().entries
    SdS = S.conj().T @ S
    L = liouvillian(model)
    h_max = default_step(model) if step is None else step
    v = _vec(S @ rho0 @ S.conj().T)
    p = np.empty(taus.size)
    p[0] = np.trace(SdS @ _unvec(v, model.dim)).real
    cache: dict[int, np.ndarray] = {}
    for i in range(1, taus.size):
        dt = taus[i] - taus[i - 1]
        n = max(SUBSTEPS_PER_INTERVAL, _n_steps(dt, h_max, max_steps))
        key = (n, round(dt / n, 15))
        if key not in cache:
            cache[key] = rk4_step_matrix(L, dt / n)
        v = _evolve_vec(cache[key], v, n)
        p[i] = np.trace(SdS @ _unvec(v, model.dim)).real
    return p


def emission_rate(model: EmitterModel, rho: DensityOperator) -> float:
    S = model.source().entries
    return float(np.trace(S.conj().T @ S @ rho.matrix).real)


def g2_correlation(
    model: EmitterModel,
    taus: Sequence[float],
    step: float | None = None,
) -> CorrelationSeries:
    """Stationary P(tau) and g2(tau) = P(tau) / <S*S>^2 via quantum regression."""
    taus = _check_tau_grid(taus)
    rho = steady_state(model)
    rate = emission_rate(model, rho)
    if rate <= EMISSION_RATE_FLOOR:
        raise NormalizationUndefinedError(
            f"stationary emission rate {rate:.3e} is zero; g2 is undefined"
        )
    p = regression_correlation(model, taus, rho.matrix, step)
    return CorrelationSeries(tau=taus, p_raw=p, g2=p / rate**2, mean_intensity=rate)


# -- detection ----------------------------------------------------------------


def _margins(series: CorrelationSeries, tol: float):
    p = series.p_raw
    margin = p[1:] - p[0]
    threshold = np.full(margin.shape, float(tol))
    if series.stderr is not None:
        threshold = threshold + 3.0 * series.stderr[1:]
    return margin, threshold


def detect_antibunching(series: CorrelationSeries, tol: float = DEFAULT_DETECT_TOL) -> AntibunchingReport:
    """Look for tau > 0 with P(tau) - P(0) above tol (plus 3 stderr for Monte Carlo)."""
    if series.tau.size < 2:
        return AntibunchingReport(False, None, 0.0, float(tol))
    margin, threshold = _margins(series, tol)
    excess = margin - threshold
    i = int(np.argmax(margin))
    hit = bool(np.any(excess > 0))
    if hit:
        i = int(np.argmax(np.where(excess > 0, margin, -np.inf)))
    return AntibunchingReport(
        antibunched=hit,
        witness_tau=float(series.tau[i + 1]) if hit else None,
        margin=float(margin[i]),
        tolerance=float(threshold[i]),
    )


def schwarz_violation_test(series: CorrelationSeries, tol: float = DEFAULT_DETECT_TOL) -> bool:
    """True iff some P(tau) exceeds P(0) beyond tol (and the 3-sigma band when present)."""
    if series.tau.size < 2:
        return False
    margin, threshold = _margins(series, tol)
    return bool(np.any(margin > threshold))


# -- classical stationary intensities ----------------------------------------


@dataclass(frozen=True)
class ClassicalProcessModel:
    """Stationary nonnegative intensity I(t).

    ``random-telegraph``: I jumps between ``levels`` (low, high) with rates
    ``rate_up`` (low to high) and ``rate_down``; both default to ``rate``.
    ``ou-intensity``: I = (X + offset)^2 with X an Ornstein-Uhlenbeck process
    of stationary std ``sigma`` and correlation decay rate ``rate``.
    """

    kind: str
    rate: float = 1.0
    levels: tuple[float, float] = (0.0, 1.0)
    rate_up: float | None = None
    rate_down: float | None = None
    sigma: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.kind not in PROCESS_KINDS:
            raise InvalidArgumentError(f"unknown process kind {self.kind!r}")
        if not (np.isfinite(self.rate) and self.rate > 0):
            raise InvalidArgumentError("rate must be positive")
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        if self.kind == "random-telegraph":
            if len(self.levels) != 2 or min(self.levels) < 0 or not np.all(np.isfinite(self.levels)):
                raise InvalidArgumentError("telegraph levels must be two finite values >= 0")
            for name in ("rate_up", "rate_down"):
                v = getattr(self, name)
                v = self.rate if v is None else float(v)
                if not (np.isfinite(v) and v > 0):
                    raise InvalidArgumentError(f"{name} must be positive")
                object.__setattr__(self, name, v)
        else:
            if not (np.isfinite(self.sigma) and self.sigma >= 0 and np.isfinite(self.offset)):
                raise InvalidArgumentError("sigma must be >= 0 and offset finite")


def stationary_autocorrelation(model: ClassicalProcessModel, taus) -> np.ndarray:
    """Closed-form E[I(0) I(tau)] for the stationary process."""
    taus = np.asarray(taus, dtype=float)
    if model.kind == "random-telegraph":
        lo, hi = model.levels
        lam = model.rate_up + model.rate_down
        pi_hi = model.rate_up / lam
        mean = lo + (hi - lo) * pi_hi
        var = (hi - lo) ** 2 * pi_hi * (1 - pi_hi)
        return mean**2 + var * np.exp(-lam * taus)
    s2, c2 = model.sigma**2, model.offset**2
    rho = np.exp(-model.rate * taus)
    return (s2 + c2) ** 2 + 2 * s2**2 * rho**2 + 4 * c2 * s2 * rho


def _sample_block(model, taus, n, rng) -> tuple[np.ndarray, np.ndarray]:
    """Products I(0) I(tau_j), shape (n, len(taus)), and the initial intensities."""
    out = np.empty((n, taus.size))
    dts = np.diff(taus)
    if model.kind == "random-telegraph":
        lo, hi = model.levels
        lam = model.rate_up + model.rate_down
        pi_hi = model.rate_up / lam
        up = rng.random(n) < pi_hi
        i0 = np.where(up, hi, lo)
        out[:, 0] = i0 * i0
        for j, dt in enumerate(dts, start=1):
            decay = math.exp(-lam * dt)
            p_hi = pi_hi + (up - pi_hi) * decay
            up = rng.random(n) < p_hi
            out[:, j] = i0 * np.where(up, hi, lo)
    else:
        x = model.sigma * rng.standard_normal(n)
        i0 = (x + model.offset) ** 2
        out[:, 0] = i0 * i0
        for j, dt in enumerate(dts, start=1):
            decay = math.exp(-model.rate * dt)
            x = decay * x + model.sigma * math.sqrt(1 - decay * decay) * rng.standard_normal(n)
            out[:, j] = i0 * (x + model.offset) ** 2
    return out, i0


def _worker(model, taus, start, stop, n_total, seed_seq):
    """Per-batch sums over samples [start, stop) drawn from one RNG stream."""
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    sums = np.zeros((N_BATCHES, taus.size))
    counts = np.zeros(N_BATCHES)
    i_sum = 0.0
    pos = start
    while pos < stop:
        n = min(_SAMPLE_BLOCK, stop - pos)
        prod, i0 = _sample_block(model, taus, n, rng)
        batch = (np.arange(pos, pos + n) * N_BATCHES) // n_total
        for b in np.unique(batch):
            sel = batch == b
            sums[b] += prod[sel].sum(axis=0)
            counts[b] += sel.sum()
        i_sum += i0.sum()
        pos += n
    return sums, counts, i_sum


def simulate_classical_intensity(
    model: ClassicalProcessModel,
    taus: Sequence[float],
    n_samples: int,
    seed: int = 0,
    n_workers: int = 1,
) -> CorrelationSeries:
    """Monte Carlo E[I(0) I(tau)] with batch-means standard errors.

    Worker ``w`` draws from ``SeedSequence(seed).spawn(n_workers)[w]`` and
    handles a contiguous slice of the samples, so results are bitwise
    reproducible for a given ``(seed, n_workers)``.
    """
    taus = _check_tau_grid(taus)
    if n_samples < MIN_SAMPLES:
        raise InvalidArgumentError(f"need at least {MIN_SAMPLES} samples, got {n_samples}")
    if n_workers < 1:
        raise InvalidArgumentError("n_workers must be >= 1")
    children = np.random.SeedSequence(int(seed)).spawn(n_workers)
    edges = np.linspace(0, n_samples, n_workers + 1).astype(int)
    jobs = [
        (model, taus, int(edges[w]), int(edges[w + 1]), n_samples, children[w])
        for w in range(n_workers)
    ]
    if n_workers == 1:
        results = [_worker(*jobs[0])]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda job: _worker(*job), jobs))

    sums = np.zeros((N_BATCHES, taus.size))
    counts = np.zeros(N_BATCHES)
    i_sum = 0.0
    for s, c, i in results:
        sums += s
        counts += c
        i_sum += i
    batch_means = sums / counts[:, None]
    p = sums.sum(axis=0) / n_samples
    stderr = batch_means.std(axis=0, ddof=1) / math.sqrt(N_BATCHES)
    mean_i = i_sum / n_samples
    g2 = p / mean_i**2 if mean_i > 0 else np.full_like(p, np.nan)
    return CorrelationSeries(tau=taus, p_raw=p, g2=g2, mean_intensity=float(mean_i), stderr=stderr)
