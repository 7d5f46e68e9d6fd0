"""Single-mode truncated Fock space: ladder operators, states, expectations.

Levels |0>..|dim-1> are retained. The ladder operators are exact on every
level except the top one, where ``[a, a*]`` picks up the familiar
truncation defect ``-(dim-1)``. Constructors for states with infinite
support (coherent, thermal) refuse to build when the discarded tail is
larger than ``tail_tol``; nothing is ever resized automatically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .errors import (
    DimensionMismatchError,
    InvalidArgumentError,
    OutOfRangeError,
    TruncationTooSmallError,
)

DEFAULT_TAIL_TOL = 1e-12

# state validation tolerances
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10

# largest dimension suggested when reporting a required truncation
_MAX_SUGGESTED_DIM = 1 << 16


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockSpace:
    dim: int

    def __post_init__(self):
        if isinstance(self.dim, bool) or not isinstance(self.dim, (int, np.integer)):
            raise InvalidArgumentError(f"dim must be an integer, got {self.dim!r}")
        if self.dim < 2:
            raise InvalidArgumentError(f"dim must be >= 2, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def levels(self) -> range:
        return range(self.dim)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense complex matrix acting on a :class:`FockSpace`."""

    space: FockSpace
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        d = self.space.dim
        if entries.shape != (d, d):
            raise DimensionMismatchError(
                f"operator shape {entries.shape} does not match dim {d}"
            )
        object.__setattr__(self, "entries", _frozen(entries))

    def dag(self) -> OperatorMatrix:
        return OperatorMatrix(self.space, self.entries.conj().T)

    def __matmul__(self, other: OperatorMatrix) -> OperatorMatrix:
        _check_same_space(self.space, other.space)
        return OperatorMatrix(self.space, self.entries @ other.entries)

    def __add__(self, other: OperatorMatrix) -> OperatorMatrix:
        _check_same_space(self.space, other.space)
        return OperatorMatrix(self.space, self.entries + other.entries)

    def __sub__(self, other: OperatorMatrix) -> OperatorMatrix:
        _check_same_space(self.space, other.space)
        return OperatorMatrix(self.space, self.entries - other.entries)

    def __pow__(self, k: int) -> OperatorMatrix:
        return OperatorMatrix(self.space, np.linalg.matrix_power(self.entries, k))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state; ``amplitudes`` are the Fock coefficients c_n."""

    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise DimensionMismatchError(
                f"amplitude vector of shape {amps.shape} does not match dim {self.space.dim}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidArgumentError(f"state is not normalized (norm {norm!r})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def to_density(self) -> DensityOperator:
        c = self.amplitudes
        return DensityOperator(self.space, np.outer(c, c.conj()))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Mixed state: Hermitian, unit trace, positive semidefinite."""

    space: FockSpace
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        d = self.space.dim
        if rho.shape != (d, d):
            raise DimensionMismatchError(f"density matrix shape {rho.shape} does not match dim {d}")
        if not np.all(np.isfinite(rho)):
            raise InvalidArgumentError("density matrix has non-finite entries")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise InvalidArgumentError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidArgumentError(f"density matrix trace is {tr!r}, expected 1")
        min_eig = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
        if min_eig < -PSD_TOL:
            raise InvalidArgumentError(f"density matrix has negative eigenvalue {min_eig:.3e}")
        object.__setattr__(self, "matrix", _frozen(rho))

    @property
    def populations(self) -> np.ndarray:
        return np.clip(np.diag(self.matrix).real, 0.0, None)


State = Union[StateVector, DensityOperator]


@dataclass(frozen=True, eq=False)
class RawVector:
    """Unnormalized image of a state under an operator, with its norm."""

    space: FockSpace
    vector: np.ndarray
    norm: float


def _check_same_space(s1: FockSpace, s2: FockSpace):
    if s1.dim != s2.dim:
        raise DimensionMismatchError(f"space dimensions differ: {s1.dim} vs {s2.dim}")


def make_space(dim: int) -> FockSpace:
    return FockSpace(dim)


def annihilation(space: FockSpace) -> OperatorMatrix:
    """Lowering operator: entry sqrt(n) at (n-1, n)."""
    return OperatorMatrix(space, np.diag(np.sqrt(np.arange(1, space.dim)), k=1))


def creation(space: FockSpace) -> OperatorMatrix:
    return annihilation(space).dag()


def number_operator(space: FockSpace) -> OperatorMatrix:
    return OperatorMatrix(space, np.diag(np.arange(space.dim, dtype=float)))


def identity(space: FockSpace) -> OperatorMatrix:
    return OperatorMatrix(space, np.eye(space.dim))


def fock_state(space: FockSpace, n: int) -> StateVector:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise InvalidArgumentError(f"level index must be an integer, got {n!r}")
    if not 0 <= n < space.dim:
        raise OutOfRangeError(f"level {n} outside 0..{space.dim - 1}")
    amps = np.zeros(space.dim, dtype=complex)
    amps[n] = 1.0
    return StateVector(space, amps)


def poisson_tail(mean: float, dim: int) -> float:
    """Probability mass of levels >= dim under a Poisson law."""
    if mean == 0:
        return 0.0
    return float(stats.poisson.sf(dim - 1, mean))


def geometric_tail(nbar: float, dim: int) -> float:
    """Probability mass of levels >= dim under the thermal (geometric) law."""
    if nbar == 0:
        return 0.0
    return float((nbar / (1.0 + nbar)) ** dim)


def _required_dim(tail, tail_tol) -> int | None:
    hi = 2
    while tail(hi) >= tail_tol:
        hi *= 2
        if hi > _MAX_SUGGESTED_DIM:
            return None
    if hi == 2:
        return 2
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tail(mid) < tail_tol:
            hi = mid
        else:
            lo = mid
    return hi


def _check_tail_tol(tail_tol):
    if not (np.isfinite(tail_tol) and tail_tol > 0):
        raise InvalidArgumentError(f"tail_tol must be positive, got {tail_tol!r}")


def coherent_state(space: FockSpace, alpha: complex, tail_tol: float = DEFAULT_TAIL_TOL) -> StateVector:
    """Coherent state |alpha>, renormalized after truncation.

    Raises :class:`TruncationTooSmallError` (with ``required_dim``) when the
    Poisson mass beyond the top level is not below ``tail_tol``.
    """
    _check_tail_tol(tail_tol)
    alpha = complex(alpha)
    if not np.isfinite(alpha):
        raise InvalidArgumentError(f"alpha must be finite, got {alpha!r}")
    mean = abs(alpha) ** 2
    tail = poisson_tail(mean, space.dim)
    if tail >= tail_tol:
        need = _required_dim(lambda d: poisson_tail(mean, d), tail_tol)
        raise TruncationTooSmallError(
            f"coherent state |alpha|^2={mean:g} loses tail mass {tail:.3e} >= {tail_tol:g} "
            f"at dim={space.dim}; need dim >= {need}",
            required_dim=need,
        )
    amps = np.empty(space.dim, dtype=complex)
    amps[0] = np.exp(-mean / 2)
    for n in range(1, space.dim):
        amps[n] = amps[n - 1] * alpha / np.sqrt(n)
    return StateVector(space, amps / np.linalg.norm(amps))


def superposition(space: FockSpace, coeffs: Sequence[complex]) -> StateVector:
    c = np.asarray(coeffs, dtype=complex).ravel()
    if c.size == 0 or c.size > space.dim:
        raise InvalidArgumentError(f"need 1..{space.dim} coefficients, got {c.size}")
    if not np.all(np.isfinite(c)):
        raise InvalidArgumentError("coefficients must be finite")
    norm = np.linalg.norm(c)
    if norm == 0:
        raise InvalidArgumentError("coefficients are all zero")
    amps = np.zeros(space.dim, dtype=complex)
    amps[: c.size] = c / norm
    return StateVector(space, amps)


def thermal_state(space: FockSpace, nbar: float, tail_tol: float = DEFAULT_TAIL_TOL) -> DensityOperator:
    """Diagonal thermal state with p_n proportional to nbar^n / (1+nbar)^(n+1)."""
    _check_tail_tol(tail_tol)
    nbar = float(nbar)
    if not (np.isfinite(nbar) and nbar >= 0):
        raise InvalidArgumentError(f"nbar must be >= 0, got {nbar!r}")
    tail = geometric_tail(nbar, space.dim)
    if tail >= tail_tol:
        need = _required_dim(lambda d: geometric_tail(nbar, d), tail_tol)
        raise TruncationTooSmallError(
            f"thermal state nbar={nbar:g} loses tail mass {tail:.3e} >= {tail_tol:g} "
            f"at dim={space.dim}; need dim >= {need}",
            required_dim=need,
        )
    n = np.arange(space.dim)
    ratio = nbar / (1.0 + nbar)
    p = ratio**n / (1.0 + nbar)
    return DensityOperator(space, np.diag(p / p.sum()))


def coherent_mixture(
    space: FockSpace,
    alphas: Sequence[complex],
    weights: Sequence[float],
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> DensityOperator:
    """Convex mixture of coherent projectors; weights are renormalized."""
    w = np.asarray(weights, dtype=float)
    if len(alphas) != w.size or w.size == 0:
        raise InvalidArgumentError("alphas and weights must be non-empty and equally long")
    if np.any(w < 0) or w.sum() <= 0:
        raise InvalidArgumentError("mixture weights must be nonnegative and not all zero")
    w = w / w.sum()
    rho = np.zeros((space.dim, space.dim), dtype=complex)
    for a, p in zip(alphas, w):
        c = coherent_state(space, a, tail_tol).amplitudes
        rho += p * np.outer(c, c.conj())
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(space, rho / np.trace(rho).real)


def density_operator(space: FockSpace, matrix) -> DensityOperator:
    return DensityOperator(space, matrix)


def expectation(op: OperatorMatrix, state: State) -> complex:
    """<psi|A|psi> for pure states, Tr(rho A) for density operators."""
    _check_same_space(op.space, state.space)
    if isinstance(state, StateVector):
        c = state.amplitudes
        return complex(np.vdot(c, op.entries @ c))
    return complex(np.trace(state.matrix @ op.entries))


def apply(op: OperatorMatrix, state: StateVector) -> RawVector:
    _check_same_space(op.space, state.space)
    v = op.entries @ state.amplitudes
    return RawVector(state.space, _frozen(v), float(np.linalg.norm(v)))
