"""Clamped thin-plate bending under a central disc load.

Closed forms for the circular plate (centre deflection and limiting force) plus
two finite-difference solvers of D lap^2 w = q used to check them: an
axisymmetric radial solver and a 13-point Cartesian solver for square and
rectangular plates. Small-deflection Kirchhoff theory throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl

from . import kernels
from .errors import DiscretizationWarning, GeometryError, SolverError

LIMIT_BRANCH_THRESHOLD = 4.5
REFINEMENT_RTOL = 0.02


def _kappa(a, c):
    if not (c > 0 and a > 0):
        raise GeometryError("plate and load radii must be positive")
    k = a / c
    if not k > 1:
        raise GeometryError(f"a/c = {k:.6g} must exceed 1 (magnet as large as the plate)")
    return k


def _shape_factor(k):
    return k * k - math.log(k) - 0.75


def center_deflection_eq2(F: float, a: float, c: float, D: float) -> float:
    """Centre deflection of a clamped circular plate, load F spread over radius c.

    w = F c^2 / (16 pi D) * (k^2 - ln k - 3/4), k = a / c.
    """
    k = _kappa(a, c)
    if not D > 0:
        raise ValueError("rigidity must be positive")
    return F * c * c / (16.0 * math.pi * D) * _shape_factor(k)


def force_for_deflection(w_target: float, a: float, c: float, D: float) -> float:
    """Total disc load that produces centre deflection ``w_target``."""
    k = _kappa(a, c)
    if w_target < 0:
        raise ValueError("target deflection must be non-negative")
    return w_target * 16.0 * math.pi * D / (c * c * _shape_factor(k))


@dataclass(frozen=True)
class LimitingForce:
    force: float
    branch: str
    note: str

    def __float__(self):
        return self.force


def limiting_force_coefficient(k: float, nu: float, branch: str | None = None) -> float:
    """F_lim / (h^2 sigma_y); ``branch`` ('wide-load' or 'narrow-load') overrides the k < 4.5 switch."""
    if branch is None:
        branch = "wide-load" if k < LIMIT_BRANCH_THRESHOLD else "narrow-load"
    if branch == "wide-load":
        den = 6.0 * k * k - 3.0
        if not den > 0:
            raise ValueError(f"k = {k} gives a non-positive denominator")
        return 4.0 * math.pi * k * k / den
    if branch == "narrow-load":
        return 8.0 * math.pi * k * k / ((1.0 + nu) * (12.0 * k * k * math.log(k) + 3.0))
    raise ValueError(f"unknown branch {branch!r}")


def limiting_force_eq3(h: float, sigma_y: float, k: float, nu: float) -> LimitingForce:
    """Collapse load of a clamped circular plate with a central disc load.

    Piecewise in k = a/c with the switch at k = 4.5; ``log`` is natural.
    The two pieces do not meet at the switch.
    """
    if not k > 1:
        raise GeometryError(f"k = {k} must exceed 1")
    if not (h > 0 and sigma_y > 0):
        raise ValueError("thickness and yield strength must be positive")
    branch = "wide-load" if k < LIMIT_BRANCH_THRESHOLD else "narrow-load"
    f = h * h * sigma_y * limiting_force_coefficient(k, nu, branch)
    rule = "k < 4.5" if branch == "wide-load" else "k >= 4.5"
    return LimitingForce(f, branch, f"limiting force from branch {branch} ({rule}, k = {k:.4f})")


# --------------------------------------------------------------------------
# geometry and loads
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LoadPatch:
    kind: str  # "central-disc" or "uniform"
    total_force: float
    radius: float = 0.0

    def __post_init__(self):
        if self.kind not in ("central-disc", "uniform"):
            raise ValueError(f"unknown load kind {self.kind!r}")
        if self.total_force < 0:
            raise ValueError("total_force must be >= 0")
        if self.kind == "central-disc" and not self.radius > 0:
            raise ValueError("central-disc load needs a positive radius")

    @property
    def pressure(self) -> float:
        return self.total_force / (math.pi * self.radius**2)


@dataclass(frozen=True)
class PlateGeometry:
    shape: str  # "circle", "square" or "rectangle"
    thickness: float
    a: float = 0.0  # circle radius
    lx: float = 0.0
    ly: float = 0.0

    def __post_init__(self):
        if self.shape == "circle":
            ok = self.a > 0
        elif self.shape in ("square", "rectangle"):
            ok = self.lx > 0 and self.ly > 0
            if self.shape == "square" and not math.isclose(self.lx, self.ly, rel_tol=1e-12):
                raise ValueError("square needs lx == ly")
        else:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not ok:
            raise ValueError("plate dimensions must be positive")

    @classmethod
    def circle(cls, a, thickness):
        return cls("circle", thickness, a=a)

    @classmethod
    def square(cls, side, thickness):
        return cls("square", thickness, lx=side, ly=side)

    @classmethod
    def rectangle(cls, lx, ly, thickness):
        return cls("rectangle", thickness, lx=lx, ly=ly)

    @classmethod
    def equal_area_square(cls, a, thickness):
        return cls.square(math.sqrt(math.pi) * a, thickness)

    @classmethod
    def equal_area_rectangle(cls, a, thickness, aspect=2.0):
        area = math.pi * a * a
        return cls.rectangle(math.sqrt(area * aspect), math.sqrt(area / aspect), thickness)

    @property
    def area(self):
        if self.shape == "circle":
            return math.pi * self.a**2
        return self.lx * self.ly

    @property
    def in_radius(self):
        return self.a if self.shape == "circle" else 0.5 * min(self.lx, self.ly)


# --------------------------------------------------------------------------
# axisymmetric solver
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialProfile:
    r: np.ndarray
    w: np.ndarray

    @property
    def center(self) -> float:
        return float(self.w[0])


def _radial_laplacian(n, h, rows_out):
    """Discrete (1/r) d/dr (r d/dr) on nodes 0..rows_out-1 acting on nodes 0..n."""
    r = np.arange(rows_out) * h
    lo = np.empty(rows_out)
    hi = np.empty(rows_out)
    lo[1:] = 1.0 / h**2 - 1.0 / (2.0 * r[1:] * h)
    hi[1:] = 1.0 / h**2 + 1.0 / (2.0 * r[1:] * h)
    diag = np.full(rows_out, -2.0 / h**2)
    # r = 0: mirror node w_{-1} = w_1 and the limit (1/r) w' -> w''
    diag[0] = -4.0 / h**2
    lo[0] = 0.0
    hi[0] = 4.0 / h**2
    return sp.diags([lo[1:], diag, hi[:n]], [-1, 0, 1], shape=(rows_out, n + 1), format="lil")


def solve_circular_fd(a: float, c: float, F: float, D: float, n_nodes: int = 512) -> RadialProfile:
    """Clamped circular plate, disc load F over radius c, on a uniform radial grid.

    Unknowns w_0..w_{n-1} at r_i = i a / n with w_n = 0. The biharmonic is the
    composition of two discrete axisymmetric Laplacians; w'(a) = 0 enters as
    the ghost value w_{n+1} = w_{n-1}, regularity at r = 0 as mirror nodes.
    The load is averaged over each annular cell. Passing c = a gives the
    uniformly loaded plate.
    """
    if n_nodes < 64:
        raise ValueError("n_nodes must be >= 64")
    if not (a > 0 and 0 < c <= a and D > 0):
        raise GeometryError("need a > 0, 0 < c <= a and D > 0")
    n = int(n_nodes)
    h = a / n
    # w (nodes 0..n) -> lap w (nodes 0..n), then fold the ghost and w_n = 0
    inner = _radial_laplacian(n, h, n + 1)
    inner[n, n - 1] += 1.0 / h**2 + 1.0 / (2.0 * a * h)
    l1 = inner.tocsr()[:, :n]
    l2 = _radial_laplacian(n, h, n).tocsr()
    A = (l2 @ l1).tocsc()

    r = np.arange(n + 1) * h
    lo = np.clip(r[:n] - h / 2, 0.0, None)
    hi = np.minimum(r[:n] + h / 2, a)
    covered = np.clip(np.minimum(hi, c) ** 2 - lo**2, 0.0, None) / (hi**2 - lo**2)
    q = F / (math.pi * c * c) * covered
    try:
        w = spl.splu(A).solve(q / D)
    except RuntimeError as exc:
        raise SolverError(f"radial plate system is singular: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise SolverError("radial plate solve produced non-finite values")
    return RadialProfile(r, np.append(w, 0.0))


# --------------------------------------------------------------------------
# Cartesian solver
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PlateField:
    x: np.ndarray
    y: np.ndarray
    w: np.ndarray  # (nx, ny), edge nodes included
    center: float
    nodal_force: np.ndarray

    @property
    def spacing(self):
        return self.x[1] - self.x[0], self.y[1] - self.y[0]


def _grid(geom, n):
    short, long_ = sorted((geom.lx, geom.ly))
    h = short / (n - 1)
    n_long = int(round(long_ / h)) + 1
    if geom.lx <= geom.ly:
        return n, n_long
    return n_long, n


def rect_nodal_forces(geom: PlateGeometry, load: LoadPatch, nx: int, ny: int) -> np.ndarray:
    """Force carried by each node (edge nodes zero); sums to the load total."""
    hx = geom.lx / (nx - 1)
    hy = geom.ly / (ny - 1)
    if load.kind == "uniform":
        p = np.full((nx, ny), load.total_force / geom.area * hx * hy)
    else:
        if load.radius > geom.in_radius * (1 + 1e-12):
            raise GeometryError("disc load larger than the plate in-radius")
        p = kernels.disc_load_fraction(nx, ny, hx, hy, geom.lx / 2, geom.ly / 2, load.radius)
    p[0, :] = p[-1, :] = p[:, 0] = p[:, -1] = 0.0
    if load.kind == "central-disc":
        total = p.sum()
        p = p * (load.total_force / total) if total > 0 else p
    return p


def solve_rect_fd(geom: PlateGeometry, load: LoadPatch, D: float, n: int = 129,
                  refinement_check: bool = False) -> PlateField:
    """Clamped square/rectangular plate by the 13-point biharmonic stencil.

    ``n`` is the node count along the shorter side, edges included. With
    ``refinement_check`` the solve is repeated at 2n - 1 nodes and a
    DiscretizationWarning is issued when the centre value moves by more than 2 %
    (only meaningful for n >= 257).
    """
    if geom.shape not in ("square", "rectangle"):
        raise ValueError("solve_rect_fd handles square and rectangle plates")
    if n < 65:
        raise ValueError("n must be >= 65")
    nx, ny = _grid(geom, n)
    hx = geom.lx / (nx - 1)
    hy = geom.ly / (ny - 1)
    rows, cols, vals = kernels.assemble_biharmonic(nx, ny, hx, hy)
    m = (nx - 2) * (ny - 2)
    A = sp.csc_matrix((vals, (rows, cols)), shape=(m, m))
    p = rect_nodal_forces(geom, load, nx, ny)
    rhs = p[1:-1, 1:-1].ravel() / (hx * hy * D)
    try:
        # the reflected-ghost operator is symmetric positive definite: no pivoting
        lu = spl.splu(A, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        sol = lu.solve(rhs)
    except RuntimeError as exc:
        raise SolverError(f"plate system is singular: {exc}") from exc
    w = np.zeros((nx, ny))
    w[1:-1, 1:-1] = sol.reshape(nx - 2, ny - 2)
    x = np.arange(nx) * hx
    y = np.arange(ny) * hy
    field = PlateField(x, y, w, _center_value(x, y, w, geom), p)
    if refinement_check and n >= 257:
        fine = solve_rect_fd(geom, load, D, 2 * n - 1)
        if _relative_change(field.center, fine.center) > REFINEMENT_RTOL:
            warnings.warn(
                f"centre deflection changed by more than {REFINEMENT_RTOL:.0%} from n={n} to n={2 * n - 1}",
                DiscretizationWarning,
                stacklevel=2,
            )
    return field


def _center_value(x, y, w, geom):
    xc, yc = geom.lx / 2, geom.ly / 2
    i = min(int(np.searchsorted(x, xc) - 1), x.size - 2)
    j = min(int(np.searchsorted(y, yc) - 1), y.size - 2)
    tx = (xc - x[i]) / (x[i + 1] - x[i])
    ty = (yc - y[j]) / (y[j + 1] - y[j])
    return float(
        (1 - tx) * (1 - ty) * w[i, j] + tx * (1 - ty) * w[i + 1, j] + (1 - tx) * ty * w[i, j + 1] + tx * ty * w[i + 1, j + 1]
    )


def _relative_change(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def observed_order(values) -> np.ndarray:
    """Convergence orders log2(|e_k| / |e_{k+1}|) from successive halvings."""
    v = np.asarray(values, dtype=float)
    d = np.diff(v)
    return np.log2(np.abs(d[:-1] / d[1:]))


# --------------------------------------------------------------------------
# shape comparison
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ShapeRow:
    force: float
    w_circle_closed: float
    w_circle: float
    w_square: float
    w_rectangle: float

    @property
    def ordered(self) -> bool:
        return self.w_circle > self.w_square > self.w_rectangle


@dataclass(frozen=True)
class ShapeComparison:
    rows: list
    aspect: float
    square_side: float
    rectangle_sides: tuple
    refinement_change: dict  # shape -> relative centre change on refinement

    @property
    def converged(self) -> bool:
        return all(v <= REFINEMENT_RTOL for v in self.refinement_change.values())

    @property
    def ordered(self) -> bool:
        return all(row.ordered for row in self.rows if row.force > 0)


def compare_shapes(a: float, c: float, thickness: float, D: float, forces, aspect: float = 2.0,
                   n_circle: int = 512, n_rect: int = 129) -> ShapeComparison:
    """Centre deflection of equal-area circle, square and rectangle plates.

    Each plate carries the same central disc load of radius ``c``. The
    Cartesian solves are repeated at 2n - 1 nodes to report the refinement
    change. The problem is linear, so each plate is solved once per
    resolution at unit load and scaled.
    """
    if aspect <= 1:
        raise ValueError("rectangle aspect must exceed 1")
    square = PlateGeometry.equal_area_square(a, thickness)
    rect = PlateGeometry.equal_area_rectangle(a, thickness, aspect)
    unit = LoadPatch("central-disc", 1.0, c)
    circ = solve_circular_fd(a, c, 1.0, D, n_circle)
    circ_fine = solve_circular_fd(a, c, 1.0, D, 2 * n_circle)
    sq = solve_rect_fd(square, unit, D, n_rect)
    sq_fine = solve_rect_fd(square, unit, D, 2 * n_rect - 1)
    re = solve_rect_fd(rect, unit, D, n_rect)
    re_fine = solve_rect_fd(rect, unit, D, 2 * n_rect - 1)
    change = {
        "circle": _relative_change(circ.center, circ_fine.center),
        "square": _relative_change(sq.center, sq_fine.center),
        "rectangle": _relative_change(re.center, re_fine.center),
    }
    eq2_unit = center_deflection_eq2(1.0, a, c, D) if a > c else float("nan")
    rows = [
        ShapeRow(float(f), f * eq2_unit, f * circ_fine.center, f * sq_fine.center, f * re_fine.center)
        for f in forces
    ]
    return ShapeComparison(rows, aspect, square.lx, (rect.lx, rect.ly), change)
