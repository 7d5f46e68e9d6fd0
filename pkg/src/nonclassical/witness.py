"""Can a state's photon statistics come from a classical intensity variable?

If a classical complex amplitude alpha reproduced the normally ordered
moments, the factorial moments ``m_k = <a*^k a^k>`` would be the ordinary
moments ``E[s^k]`` of the nonnegative variable ``s = |alpha|^2``. That is a
Stieltjes moment problem. Two independent checks are provided:

* :func:`hankel_witness` tests the necessary Hankel positivity conditions
  (the order-2 minor is the Cauchy-Bunyakovsky inequality ``m_1^2 <= m_2``).
* :func:`fit_classical_measure` tries to build a representing measure by
  nonnegative least squares on a grid, then polishes the atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import InvalidArgumentError, TruncationContaminatedError
from .fock import State, annihilation, creation, expectation
from .stats import CONTAMINATION_TOL

DEFAULT_ORDER = 4
DEFAULT_GRID_POINTS = 2048
DEFAULT_GRID_SCALE = 8.0
DEFAULT_PSD_TOL = 1e-10
DEFAULT_FIT_TOL = 1e-6
NORMALIZATION_WEIGHT = 1e3
# pruning keeps residuals three decades below the feasibility tolerance
PRUNE_FACTOR = 1e-3
# relative eigenvalue floor for the Hankel rank in the quadrature start
RANK_TOL = 1e-12
MOMENT_ZERO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MomentSequence:
    """Factorial moments m_0..m_kmax with m_0 = 1."""

    moments: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.moments, dtype=float).ravel()
        if m.size < 3:
            raise InvalidArgumentError("need moments up to order k_max >= 2")
        if not np.all(np.isfinite(m)):
            raise InvalidArgumentError("moments must be finite")
        if abs(m[0] - 1.0) > MOMENT_ZERO_TOL:
            raise InvalidArgumentError(f"m_0 must be 1, got {m[0]!r}")
        if np.any(m < -MOMENT_ZERO_TOL * np.maximum(1.0, np.abs(m).max())):
            raise InvalidArgumentError("factorial moments must be nonnegative")
        m = np.clip(m, 0.0, None)
        m[0] = 1.0
        m.setflags(write=False)
        object.__setattr__(self, "moments", m)

    @property
    def k_max(self) -> int:
        return self.moments.size - 1


@dataclass(frozen=True)
class FailingMinor:
    matrix: str  # "H0" (m_{i+j}) or "H1" (m_{i+j+1})
    size: int
    eigenvalue: float


@dataclass(frozen=True)
class WitnessReport:
    classical_feasible: bool
    failing_minor: FailingMinor | None
    cb_margin: float
    hankel_min_eigs: dict = field(default_factory=dict)
    tol: float = DEFAULT_PSD_TOL

    def to_dict(self) -> dict:
        return {
            "classical_feasible": self.classical_feasible,
            "failing_minor": None
            if self.failing_minor is None
            else {
                "matrix": self.failing_minor.matrix,
                "size": self.failing_minor.size,
                "eigenvalue": self.failing_minor.eigenvalue,
            },
            "cb_margin": self.cb_margin,
            "hankel_min_eigs": {k: list(v) for k, v in self.hankel_min_eigs.items()},
            "tol": self.tol,
        }


@dataclass(frozen=True, eq=False)
class MeasureFitResult:
    """Discrete measure on s = |alpha|^2 >= 0.

    ``grid``/``weights`` hold the raw NNLS solution; ``atoms``/``atom_weights``
    the polished measure whose moments are compared against the target.
    """

    grid: np.ndarray
    weights: np.ndarray
    atoms: np.ndarray
    atom_weights: np.ndarray
    residual: float
    feasible: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "atoms": self.atoms.tolist(),
            "atom_weights": self.atom_weights.tolist(),
            "grid_points": int(self.grid.size),
            "grid_max": float(self.grid[-1]),
            "residual": self.residual,
            "feasible": self.feasible,
            "tol": self.tol,
        }


def factorial_moments(state: State, k_max: int = DEFAULT_ORDER) -> MomentSequence:
    """m_k = <a*^k a^k> for k = 0..k_max."""
    if k_max < 2:
        raise InvalidArgumentError(f"k_max must be >= 2, got {k_max}")
    dim = state.space.dim
    if k_max >= dim:
        raise TruncationContaminatedError(f"k_max={k_max} needs dim > {k_max}, got {dim}")
    top = state.populations[dim - k_max :].sum()
    if top >= CONTAMINATION_TOL:
        raise TruncationContaminatedError(
            f"weight {top:.3e} on the top {k_max} levels; enlarge dim"
        )
    a = annihilation(state.space)
    ad = creation(state.space)
    m = [1.0]
    lower, upper = a, ad
    for _ in range(1, k_max + 1):
        m.append(expectation(upper @ lower, state).real)
        lower, upper = a @ lower, upper @ ad
    return MomentSequence(np.array(m))


def stirling2(k_max: int) -> np.ndarray:
    """Table S[k, j] of Stirling numbers of the second kind, 0 <= j <= k <= k_max."""
    S = np.zeros((k_max + 1, k_max + 1))
    S[0, 0] = 1.0
    for k in range(1, k_max + 1):
        for j in range(1, k + 1):
            S[k, j] = j * S[k - 1, j] + S[k - 1, j - 1]
    return S


def power_moments(moments: MomentSequence) -> np.ndarray:
    """E[n^k] from factorial moments: sum_j S(k, j) m_j."""
    return stirling2(moments.k_max) @ moments.moments


def cb_check(moments: MomentSequence) -> float:
    """Cauchy-Bunyakovsky margin m_2 - m_1^2; negative rules out a classical variable."""
    m = moments.moments
    return float(m[2] - m[1] ** 2)


def hankel_matrices(moments: MomentSequence) -> dict[str, np.ndarray]:
    m = moments.moments
    K = moments.k_max
    r0 = K // 2 + 1
    r1 = (K - 1) // 2 + 1
    i0 = np.add.outer(np.arange(r0), np.arange(r0))
    i1 = np.add.outer(np.arange(r1), np.arange(r1)) + 1
    return {"H0": m[i0], "H1": m[i1]}


def hankel_witness(moments: MomentSequence, tol: float = DEFAULT_PSD_TOL) -> WitnessReport:
    """Stieltjes positivity test on the factorial moments.

    Every leading principal block of both Hankel matrices must have minimum
    eigenvalue >= -tol * (1 + trace of that block).
    """
    margin = cb_check(moments)
    min_eigs: dict[str, list[float]] = {}
    failing = None
    for name, H in hankel_matrices(moments).items():
        eigs = []
        for r in range(1, H.shape[0] + 1):
            block = H[:r, :r]
            lam = float(np.linalg.eigvalsh(block)[0])
            eigs.append(lam)
            if failing is None and lam < -tol * (1.0 + np.trace(block)):
                failing = FailingMinor(name, r, lam)
        min_eigs[name] = eigs
    if failing is None and margin < -tol:
        # the order-2 minor of H0 is exactly this margin
        failing = FailingMinor("H0", 2, min_eigs["H0"][1])
    return WitnessReport(
        classical_feasible=failing is None,
        failing_minor=failing,
        cb_margin=margin,
        hankel_min_eigs=min_eigs,
        tol=tol,
    )


def default_grid_max(moments: MomentSequence, scale: float = DEFAULT_GRID_SCALE) -> float:
    m = moments.moments
    k = np.arange(1, m.size)
    roots = m[1:] ** (1.0 / k)
    return float(scale * (1.0 + roots.max()))


def _row_scale(m: np.ndarray) -> np.ndarray:
    return np.maximum(1.0, np.abs(m))


def _scaled_residual(atoms, weights, m) -> np.ndarray:
    k = np.arange(m.size)
    fitted = (atoms[None, :] ** k[:, None]) @ weights
    return (fitted - m) / _row_scale(m)


def _cluster(grid, w):
    """Merge runs of adjacent nonzero grid weights into single atoms."""
    idx = np.flatnonzero(w > 0)
    if idx.size == 0:
        return np.array([0.0]), np.array([1.0])
    groups = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    atoms, weights = [], []
    for g in groups:
        tot = w[g].sum()
        atoms.append(float(grid[g] @ w[g] / tot))
        weights.append(float(tot))
    return np.array(atoms), np.array(weights)


def _polish(atoms, weights, m):
    n = atoms.size
    kk = np.arange(m.size)
    row = np.ones(m.size)
    row[0] = NORMALIZATION_WEIGHT
    row = row / _row_scale(m)

    def resid(p):
        s, w = p[:n], p[n:]
        return row * ((s[None, :] ** kk[:, None]) @ w - m)

    def jac(p):
        s, w = p[:n], p[n:]
        d_s = kk[:, None] * s[None, :] ** np.maximum(kk - 1, 0)[:, None] * w[None, :]
        d_w = s[None, :] ** kk[:, None]
        return row[:, None] * np.hstack([d_s, d_w])

    sol = optimize.least_squares(
        resid,
        np.concatenate([atoms, weights]),
        jac=jac,
        bounds=(0.0, np.inf),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=200,
    )
    return sol.x[:n], sol.x[n:]


def _gauss_nodes(mu: np.ndarray) -> np.ndarray:
    """Nodes of the largest well-conditioned Gauss rule matching ``mu``."""
    N = mu.size // 2
    while N >= 1:
        H = np.array([[mu[i + j] for j in range(N)] for i in range(N)])
        eig = np.linalg.eigvalsh(H / max(np.trace(H), 1e-300))
        if eig[0] > RANK_TOL:
            c = np.linalg.solve(H, -mu[N : 2 * N])
            nodes = np.roots(np.concatenate([[1.0], c[::-1]]))
            if np.all(np.abs(nodes.imag) < 1e-9):
                return np.clip(nodes.real, 0.0, None)
        N -= 1
    return np.array([mu[1] / mu[0]]) if mu.size > 1 and mu[0] > 0 else np.array([0.0])


def _principal_start(m: np.ndarray):
    """Starting measure from a quadrature rule, with an atom at 0 for even orders."""
    if (m.size - 1) % 2 == 0 and m[1] > 0:
        nodes = np.concatenate([[0.0], _gauss_nodes(m[1:])])
    else:
        nodes = _gauss_nodes(m)
    nodes = np.unique(nodes)
    kk = np.arange(m.size)
    V = (nodes[None, :] ** kk[:, None]) / _row_scale(m)[:, None]
    w, _ = optimize.nnls(V, m / _row_scale(m))
    return nodes, w


def _prune(atoms, weights, m, threshold):
    """Drop atoms, lightest first, while the re-polished measure still fits."""
    residual = np.linalg.norm(_scaled_residual(atoms, weights, m))
    changed = True
    while changed and atoms.size > 1:
        changed = False
        for j in np.argsort(weights):
            a, w = _polish(np.delete(atoms, j), np.delete(weights, j), m)
            r = np.linalg.norm(_scaled_residual(a, w, m))
            if r < threshold:
                atoms, weights, residual = a, w, r
                changed = True
                break
    return atoms, weights, residual


def fit_classical_measure(
    moments: MomentSequence,
    n_grid: int = DEFAULT_GRID_POINTS,
    s_max: float | None = None,
    tol: float = DEFAULT_FIT_TOL,
) -> MeasureFitResult:
    """Fit a nonnegative measure on [0, s_max] to the factorial moments.

    Solves ``min ||V w - m||`` over ``w >= 0`` with V the moment
    (Vandermonde) matrix of the grid, rows scaled to relative units and the
    normalization row weighted by ``NORMALIZATION_WEIGHT``. The NNLS atoms
    are then moved off-grid by a bounded least-squares polish and, when the
    fit succeeds, greedily pruned to a sparse representation. ``residual``
    is the Euclidean norm of the relative moment errors of the final measure.
    """
    if n_grid < 2:
        raise InvalidArgumentError("grid must have at least 2 points")
    if s_max is None:
        s_max = default_grid_max(moments)
    if not (np.isfinite(s_max) and s_max > 0):
        raise InvalidArgumentError(f"s_max must be positive, got {s_max!r}")
    m = moments.moments
    grid = np.linspace(0.0, s_max, n_grid)
    kk = np.arange(m.size)
    row_w = np.ones(m.size)
    row_w[0] = NORMALIZATION_WEIGHT
    scale = _row_scale(m)
    V = (grid[None, :] ** kk[:, None]) * (row_w / scale)[:, None]
    b = m * row_w / scale
    w, _ = optimize.nnls(V, b, maxiter=50 * n_grid)

    atoms, weights = _cluster(grid, w)
    best = (atoms, weights, np.linalg.norm(_scaled_residual(atoms, weights, m)))
    # the polish is local, so it is run from several starting measures
    on_grid = np.flatnonzero(w > 0)
    starts = [(atoms, weights), (grid[on_grid], w[on_grid]), _principal_start(m)]
    for a0, w0 in starts:
        if a0.size == 0:
            continue
        if best[2] < PRUNE_FACTOR * tol:
            break
        p_atoms, p_weights = _polish(a0, w0, m)
        p_res = np.linalg.norm(_scaled_residual(p_atoms, p_weights, m))
        if p_res < best[2]:
            best = (p_atoms, p_weights, p_res)
    atoms, weights, residual = best
    if residual < tol:
        atoms, weights, residual = _prune(atoms, weights, m, PRUNE_FACTOR * tol)
    keep = weights > 0
    order = np.argsort(atoms[keep])
    return MeasureFitResult(
        grid=grid,
        weights=w,
        atoms=atoms[keep][order],
        atom_weights=weights[keep][order],
        residual=float(residual),
        feasible=bool(residual < tol),
        tol=tol,
    )
