"""Photon-number statistics: the K measure, Mandel Q, sub-Poisson test.

K is the photon-number variance minus the mean. Normal ordering turns it
into ``<a*^2 a^2> - <a*a>^2``, which is how :func:`k_measure` evaluates it
(from the norms of ``a psi`` and ``a^2 psi``). :func:`k_from_distribution`
evaluates the same quantity from the populations alone and serves as the
independent route.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import (
    InvalidArgumentError,
    TruncationContaminatedError,
    UndefinedForVacuumError,
)
from .fock import (
    State,
    StateVector,
    annihilation,
    apply,
    creation,
    expectation,
    number_operator,
)

DEFAULT_SUB_POISSON_TOL = 1e-10
CONTAMINATION_TOL = 1e-10
DIST_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PhotonNumberDistribution:
    """Weights x_n over n = 0..len-1; nonnegative and summing to one."""

    weights: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.weights, dtype=float).ravel()
        if x.size == 0 or not np.all(np.isfinite(x)):
            raise InvalidArgumentError("distribution must be a non-empty finite vector")
        if np.any(x < 0):
            raise InvalidArgumentError("distribution has negative weights")
        if abs(x.sum() - 1.0) > DIST_SUM_TOL:
            raise InvalidArgumentError(f"distribution sums to {x.sum()!r}, expected 1")
        x.setflags(write=False)
        object.__setattr__(self, "weights", x)

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.weights.size)

    def mean(self) -> float:
        return float(self.levels @ self.weights)


@dataclass(frozen=True)
class StatsReport:
    mean: float
    variance: float
    k: float
    mandel_q: float | None
    sub_poisson: bool
    tol: float

    def to_dict(self) -> dict:
        return asdict(self)


def photon_distribution(state: State) -> PhotonNumberDistribution:
    x = state.populations
    # rounding can leave the sum a few ulps off 1
    return PhotonNumberDistribution(x / x.sum())


def _check_top_levels(state: State, depth: int):
    top = state.populations[-depth:].sum()
    if top >= CONTAMINATION_TOL:
        raise TruncationContaminatedError(
            f"weight {top:.3e} on the top {depth} levels; enlarge dim"
        )


def k_measure(state: State) -> float:
    """K = ||a^2 psi||^2 - ||a psi||^4 (or the trace form for mixed states)."""
    _check_top_levels(state, 2)
    a = annihilation(state.space)
    if isinstance(state, StateVector):
        return apply(a @ a, state).norm ** 2 - apply(a, state).norm ** 4
    ad = creation(state.space)
    m2 = expectation(ad @ ad @ a @ a, state).real
    m1 = expectation(ad @ a, state).real
    return m2 - m1**2


def k_from_distribution(dist: PhotonNumberDistribution) -> float:
    n = dist.levels
    x = dist.weights
    return float(n * (n - 1) @ x - (n @ x) ** 2)


def mandel_q(state: State) -> float:
    mean = expectation(number_operator(state.space), state).real
    if mean <= 0:
        raise UndefinedForVacuumError("Mandel Q is undefined when <n> = 0")
    return k_measure(state) / mean


def stats_report(state: State, tol: float = DEFAULT_SUB_POISSON_TOL) -> StatsReport:
    if not tol > 0:
        raise InvalidArgumentError(f"tol must be positive, got {tol!r}")
    k = k_measure(state)
    num = number_operator(state.space)
    mean = expectation(num, state).real
    variance = expectation(num @ num, state).real - mean**2
    q = k / mean if mean > 0 else None
    return StatsReport(
        mean=float(mean),
        variance=float(variance),
        k=float(k),
        mandel_q=None if q is None else float(q),
        sub_poisson=bool(k < -tol),
        tol=float(tol),
    )


def is_sub_poisson(state: State, tol: float = DEFAULT_SUB_POISSON_TOL) -> tuple[bool, StatsReport]:
    """Strict test K < -tol; coherent states sit on the boundary and return False."""
    report = stats_report(state, tol)
    return report.sub_poisson, report

