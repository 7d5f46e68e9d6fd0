"""K as a function of the photon-number distribution.

On a support set {n_1 < ... < n_r} the measure

    K(x) = sum_n n(n-1) x_n - (sum_n n x_n)^2

is a linear function minus the square of another, hence concave on the
simplex. Its minimum therefore sits at a vertex, and vertex enumeration is
exact: min K = -max(support). The grid scan and projected gradient descent
below are independent numerical cross-checks of that.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidArgumentError

SIMPLEX_TOL = 1e-12
DEFAULT_STEP = 0.05
DEFAULT_MAX_ITER = 10_000
METHODS = ("vertex", "grid", "projected-gradient")


@dataclass(frozen=True)
class SupportSet:
    """Occupation numbers carrying weight; stored sorted."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if not idx:
            raise InvalidArgumentError("support must be non-empty")
        if any(i < 0 for i in idx):
            raise InvalidArgumentError("occupation numbers must be >= 0")
        if len(set(idx)) != len(idx):
            raise InvalidArgumentError(f"duplicate occupation numbers in {idx}")
        object.__setattr__(self, "indices", tuple(sorted(idx)))

    @classmethod
    def parse(cls, text: str) -> SupportSet:
        try:
            return cls(tuple(int(t) for t in text.split(",") if t.strip()))
        except ValueError as exc:
            raise InvalidArgumentError(f"bad support list {text!r}: {exc}") from None

    @property
    def n(self) -> np.ndarray:
        return np.array(self.indices, dtype=float)

    def __len__(self):
        return len(self.indices)


@dataclass(frozen=True, eq=False)
class LandscapeResult:
    min_k: float
    argmin: np.ndarray
    support: SupportSet
    method: str
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "min_k": self.min_k,
            "argmin": {str(n): float(x) for n, x in zip(self.support.indices, self.argmin)},
            "method": self.method,
            "evaluations": self.evaluations,
        }


def _as_support(support) -> SupportSet:
    return support if isinstance(support, SupportSet) else SupportSet(tuple(support))


def _check_simplex(x, size):
    x = np.asarray(x, dtype=float)
    if x.shape != (size,):
        raise InvalidArgumentError(f"expected {size} weights, got shape {x.shape}")
    if np.any(x < -SIMPLEX_TOL) or abs(x.sum() - 1.0) > SIMPLEX_TOL:
        raise InvalidArgumentError("point is not on the probability simplex")
    return x


def _k(n: np.ndarray, x: np.ndarray) -> np.ndarray:
    # vectorized over leading axes of x
    return x @ (n * (n - 1)) - (x @ n) ** 2


def k_of(support, x) -> float:
    s = _as_support(support)
    return float(_k(s.n, _check_simplex(x, len(s))))


def k_gradient(support, x) -> np.ndarray:
    n = _as_support(support).n
    return n * (n - 1) - 2.0 * n * (np.asarray(x) @ n)


def min_k_vertex(support) -> LandscapeResult:
    """Exact minimum by evaluating every vertex e_n (K is concave)."""
    s = _as_support(support)
    vals = [_k(s.n, np.eye(len(s))[i]) for i in range(len(s))]
    # ties broken toward the lower index
    i = int(np.argmin(vals))
    return LandscapeResult(float(vals[i]), np.eye(len(s))[i], s, "vertex", len(s))


def barycentric_grid(dim: int, resolution: int) -> np.ndarray:
    """All points with coordinates in {0, 1/(R-1), ..., 1} summing to one."""
    steps = resolution - 1
    if dim == 1:
        return np.ones((1, 1))
    if dim == 2:
        t = np.arange(resolution) / steps
        return np.column_stack([1.0 - t, t])
    rows = [
        (steps - i - j, i, j)
        for i in range(resolution)
        for j in range(resolution - i)
    ]
    return np.array(rows, dtype=float) / steps


def scan_k(support, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """K on the barycentric grid; supports of size 2 or 3 only.

    Returns ``(points, k_values)`` with one row per grid point.
    """
    s = _as_support(support)
    if len(s) not in (2, 3):
        raise InvalidArgumentError(f"dense scan needs a support of size 2 or 3, got {len(s)}")
    if resolution < 2:
        raise InvalidArgumentError("resolution must be >= 2")
    pts = barycentric_grid(len(s), resolution)
    return pts, _k(s.n, pts)


def min_k_grid(support, resolution: int) -> LandscapeResult:
    s = _as_support(support)
    pts, vals = scan_k(s, resolution)
    i = int(np.argmin(vals))
    return LandscapeResult(float(vals[i]), pts[i], s, "grid", len(vals))


def scan_to_csv(support, points: np.ndarray, values: np.ndarray) -> str:
    s = _as_support(support)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow([f"x_{n}" for n in s.indices] + ["k"])
    for p, v in zip(points, values):
        writer.writerow([repr(float(c)) for c in p] + [repr(float(v))])
    return buf.getvalue()


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = 1} by sort and threshold."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, v.size + 1)
    rho = np.flatnonzero(u - css / ks > 0)[-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def projected_gradient_min(
    support,
    init=None,
    max_iter: int = DEFAULT_MAX_ITER,
    step: float = DEFAULT_STEP,
    min_step: float = 1e-14,
) -> LandscapeResult:
    """Projected gradient descent on K with a fixed step halved on non-decrease.

    Stops when the projection no longer moves the iterate. Raises
    :class:`ConvergenceError` after ``max_iter`` iterations.
    """
    s = _as_support(support)
    r = len(s)
    x = np.full(r, 1.0 / r) if init is None else _check_simplex(init, r).copy()
    k = float(_k(s.n, x))
    evals = 1
    if r == 1:
        return LandscapeResult(k, x, s, "projected-gradient", 0)
    h = step
    for it in range(1, max_iter + 1):
        y = project_simplex(x - h * k_gradient(s, x))
        if np.max(np.abs(y - x)) <= SIMPLEX_TOL:
            return LandscapeResult(k, x, s, "projected-gradient", evals)
        ky = float(_k(s.n, y))
        evals += 1
        if ky < k:
            x, k = y, ky
        else:
            h /= 2
            if h < min_step:
                return LandscapeResult(k, x, s, "projected-gradient", evals)
    raise ConvergenceError(f"projected gradient did not converge in {max_iter} iterations")


def minimize_k(support, method: str = "vertex", resolution: int = 1001, **kwargs) -> LandscapeResult:
    if method == "vertex":
        return min_k_vertex(support)
    if method == "grid":
        return min_k_grid(support, resolution)
    if method in ("projected-gradient", "pgd"):
        return projected_gradient_min(support, **kwargs)
    raise InvalidArgumentError(f"unknown method {method!r}; choose from {METHODS}")

