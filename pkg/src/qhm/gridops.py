"""Dense momentum-grid operators and the measurement layer.

Everything downstream builds on four ingredients defined here:

* ``Grid`` — a symmetric, uniformly spaced momentum window with an interior
  mask that excludes boundary-contaminated rows from all norms.
* ``Operator`` — a dense complex matrix bound to its grid.
* elementary algebra (products, adjoints, commutators, Hermitian matrix
  functions, masked norms).
* residual measurements.  Identities between band matrices hold *in action*
  on smooth vectors, not entry-by-entry: a central-difference commutator
  ``[D, diag(p)]`` equals the neighbor-averaging stencil, whose action on
  constant and linear vectors is exactly the identity while its entries never
  are.  ``action_residual`` therefore measures ``L = R`` by applying both
  sides to probe vectors and comparing interior rows; ``stencil_probes``
  (constant and linear) witness identities that are exact for second-order
  stencils, and ``smooth_probes`` (Hermite–Gaussian profiles) represent the
  low-energy subspace for identities that hold only in the continuum limit.
  Entrywise masked Frobenius norms remain available via ``masked_norm`` and
  are reported alongside as diagnostics.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "NumericGuardError",
    "Grid",
    "Operator",
    "derivative_matrix",
    "op_product",
    "op_sum",
    "op_scale",
    "adjoint",
    "commutator",
    "anticommutator",
    "hermitian_matrix_function",
    "masked_norm",
    "stencil_probes",
    "smooth_probes",
    "action_residual",
]

OVERFLOW_RATIO = 1e14


class NumericGuardError(RuntimeError):
    """A numeric safety guard tripped (conditioning or overflow)."""


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric momentum grid with an interior mask.

    ``n_points`` must be odd so that p = 0 is a sample point; ``mask_fraction``
    of the points is excluded at each end whenever a masked norm or an
    interior row-block is taken.
    """

    n_points: int
    p_max: float
    mask_fraction: float = 0.25

    def __post_init__(self) -> None:
        if self.n_points < 3 or self.n_points % 2 == 0:
            raise ValueError(
                f"n_points must be an odd integer >= 3, got {self.n_points}"
            )
        if not self.p_max > 0:
            raise ValueError(f"p_max must be positive, got {self.p_max}")
        if not 0 <= self.mask_fraction < 0.5:
            raise ValueError(
                f"mask_fraction must lie in [0, 0.5), got {self.mask_fraction}"
            )
        if self.n_points - 2 * self.mask_offset() < 3:
            raise ValueError("interior must retain at least 3 points")

    @property
    def spacing(self) -> float:
        return 2.0 * self.p_max / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(-self.p_max, self.p_max, self.n_points)

    def mask_offset(self) -> int:
        return int(np.floor(self.mask_fraction * self.n_points))

    def interior(self) -> slice:
        k = self.mask_offset()
        return slice(k, self.n_points - k)


@dataclass
class Operator:
    """Dense complex matrix living on a grid."""

    entries: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"entries must be square, got shape {arr.shape}")
        if arr.shape[0] != self.grid.n_points:
            raise ValueError(
                f"operator dimension {arr.shape[0]} does not match grid "
                f"n_points {self.grid.n_points}"
            )
        self.entries = arr

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def _raw(x) -> np.ndarray:
    return x.entries if isinstance(x, Operator) else np.asarray(x, dtype=complex)


def _grid_of(*xs) -> Grid | None:
    for x in xs:
        if isinstance(x, Operator):
            return x.grid
    return None


def _check_compatible(a, b) -> None:
    ra, rb = _raw(a), _raw(b)
    if ra.shape != rb.shape:
        raise ValueError(f"dimension mismatch: {ra.shape} vs {rb.shape}")
    ga, gb = _grid_of(a), _grid_of(b)
    if ga is not None and gb is not None and ga != gb:
        raise ValueError("operators live on different grids")


def _wrap(arr: np.ndarray, *sources):
    grid = _grid_of(*sources)
    return Operator(arr, grid) if grid is not None else arr


def op_product(a, b):
    """Matrix product; accepts ``Operator`` or raw arrays."""
    _check_compatible(a, b)
    return _wrap(_raw(a) @ _raw(b), a, b)


def op_sum(a, b):
    _check_compatible(a, b)
    return _wrap(_raw(a) + _raw(b), a, b)


def op_scale(c: complex, a):
    return _wrap(c * _raw(a), a)


def adjoint(a):
    """Conjugate transpose."""
    return _wrap(_raw(a).conj().T, a)


def commutator(a, b):
    _check_compatible(a, b)
    ra, rb = _raw(a), _raw(b)
    return _wrap(ra @ rb - rb @ ra, a, b)


def anticommutator(a, b):
    _check_compatible(a, b)
    ra, rb = _raw(a), _raw(b)
    return _wrap(ra @ rb + rb @ ra, a, b)


def derivative_matrix(grid: Grid) -> Operator:
    """Second-order differentiation matrix.

    Central differences on interior rows, one-sided second-order stencils on
    the two boundary rows.  Real-valued.
    """
    n = grid.n_points
    if n < 5:
        raise ValueError(f"derivative_matrix requires n_points >= 5, got {n}")
    c = 1.0 / (2.0 * grid.spacing)
    d = np.zeros((n, n))
    for j in range(1, n - 1):
        d[j, j - 1] = -c
        d[j, j + 1] = c
    d[0, 0], d[0, 1], d[0, 2] = -3.0 * c, 4.0 * c, -c
    d[-1, -1], d[-1, -2], d[-1, -3] = 3.0 * c, -4.0 * c, c
    return Operator(d, grid)


def hermitian_matrix_function(
    a,
    f: Callable[[np.ndarray], np.ndarray],
    *,
    require_positive_spectrum: bool = False,
    tol_herm: float = 1e-10,
) -> Operator | np.ndarray:
    """Apply a real scalar function to a Hermitian matrix by eigendecomposition.

    Guards: the input must be Hermitian to ``tol_herm`` (relative Frobenius);
    with ``require_positive_spectrum`` (fractional powers) every eigenvalue
    must be strictly positive; and the dynamic range max|f|/min|f| of the
    transformed spectrum must stay below 1e14.
    """
    arr = _raw(a)
    scale = np.linalg.norm(arr)
    if scale > 0 and np.linalg.norm(arr - arr.conj().T) / scale > tol_herm:
        raise ValueError("input is not Hermitian within tolerance")
    w, u = np.linalg.eigh(arr)
    if require_positive_spectrum and w.min() <= 0:
        raise NumericGuardError(
            f"non-positive eigenvalue {w.min():.3e} under a fractional power"
        )
    fw = np.asarray(f(w), dtype=float)
    fmax = np.abs(fw).max() if fw.size else 0.0
    fmin = np.abs(fw).min() if fw.size else 0.0
    if fmax > 0 and (fmin == 0 or fmax / fmin > OVERFLOW_RATIO):
        raise NumericGuardError(
            "matrix function overflows the supported dynamic range "
            f"(max|f|/min|f| > {OVERFLOW_RATIO:.0e})"
        )
    out = (u * fw) @ u.conj().T
    return _wrap(out, a)


def masked_norm(a, relative_to: Sequence | None = None) -> float:
    """Frobenius norm of the interior-by-interior block.

    With ``relative_to`` (a list of operators), divides by the product of
    their interior Frobenius norms, yielding a dimensionless value.
    """
    grid = _grid_of(a, *(relative_to or ()))
    if grid is None:
        raise ValueError("masked_norm needs at least one grid-bound Operator")
    sl = grid.interior()
    val = float(np.linalg.norm(_raw(a)[sl, sl]))
    if relative_to is not None:
        denom = 1.0
        for b in relative_to:
            nb = float(np.linalg.norm(_raw(b)[sl, sl]))
            if nb == 0.0:
                raise ValueError("relative normalization against a zero block")
            denom *= nb
        val /= denom
    return val


def stencil_probes(grid: Grid) -> np.ndarray:
    """Constant and linear probe vectors (unit columns).

    Second-order difference stencils reproduce these exactly, so identities
    in the stencil-exactness class are machine-exact in action on them.
    """
    n = grid.n_points
    p = grid.points
    ones = np.ones(n) / np.sqrt(n)
    lin = p / np.linalg.norm(p)
    return np.stack([ones, lin], axis=1)


def smooth_probes(grid: Grid, count: int = 8, width: float = 1.0) -> np.ndarray:
    """Hermite–Gaussian momentum profiles, unit-normalized columns.

    The first ``count`` oscillator-like profiles of the given width, spanning
    the low-energy subspace on which continuum identities are compared.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    t = grid.points / width
    env = np.exp(-0.5 * t * t)
    cols = []
    h_prev = np.zeros_like(t)
    h_cur = np.ones_like(t)
    for k in range(count):
        col = h_cur * env
        nrm = np.linalg.norm(col)
        cols.append(col / nrm if nrm > 0 else col)
        h_next = 2.0 * t * h_cur - 2.0 * k * h_prev
        h_prev, h_cur = h_cur, h_next
    return np.stack(cols, axis=1)


def action_residual(lhs, rhs, probes: np.ndarray, grid: Grid | None = None) -> float:
    """Relative disagreement of two operators in action on probe vectors.

    ``‖((L−R)·V)[interior]‖_F / max(‖(L·V)[interior]‖_F, ‖(R·V)[interior]‖_F)``;
    returns 0 when both actions vanish on the interior.
    """
    if grid is None:
        grid = _grid_of(lhs, rhs)
    if grid is None:
        raise ValueError("action_residual needs a grid")
    sl = grid.interior()
    la = (_raw(lhs) @ probes)[sl, :]
    ra = (_raw(rhs) @ probes)[sl, :]
    denom = max(float(np.linalg.norm(la)), float(np.linalg.norm(ra)))
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(la - ra)) / denom
