"""Fields, gradients, forces and resistance of a planar coil acting on a disc magnet.

The spiral is replaced by concentric circular filaments lying in the plane
z = 0, so everything here is axisymmetric. Positive current circulates
counter-clockwise seen from +z, which puts +B_z above the coil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from . import kernels
from .errors import ConvergenceError, GeometryError, SingularPointError
from .model import MU0, RHO_COPPER, CoilSpec, FieldSample, MagnetSpec, derive_pitch, magnetization

MAX_QUADRATURE_ORDER = 64
VOLUME_FORCE_RTOL = 1e-3

MAGNETIZATION_MODELS = ("auto", "rigid", "demagnetized")


@dataclass(frozen=True, eq=False)
class LoopSet:
    """Filament loops carrying one shared terminal current.

    Each filament j has radius ``radii[j]``, height ``zs[j]`` and carries
    ``current * weights[j]``. For the default centerline model every weight is
    1 and every height 0.
    """

    radii: np.ndarray
    current: float
    zs: np.ndarray = None
    weights: np.ndarray = None
    plane_z: float = 0.0

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        n = radii.size
        zs = np.full(n, self.plane_z) if self.zs is None else np.asarray(self.zs, dtype=float)
        weights = np.ones(n) if self.weights is None else np.asarray(self.weights, dtype=float)
        if n == 0 or np.any(radii <= 0):
            raise ValueError("loop radii must be positive and non-empty")
        if np.any(np.diff(radii) < 0):
            raise ValueError("loop radii must be sorted")
        if not math.isfinite(self.current):
            raise ValueError("current must be finite")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "zs", zs)
        object.__setattr__(self, "weights", weights)

    @property
    def filament_currents(self) -> np.ndarray:
        return self.current * self.weights

    def with_current(self, current: float) -> "LoopSet":
        return LoopSet(self.radii, float(current), self.zs, self.weights, self.plane_z)

    def __len__(self):
        return self.radii.size


def spiral_to_loops(coil: CoilSpec, current: float, fidelity: int = 1) -> LoopSet:
    """Discretize the coil into ``turns`` centerline loops.

    With ``fidelity`` f > 1 each conductor cross-section is split into an
    f x f grid of filaments carrying current / f**2 each.
    """
    if fidelity < 1:
        raise ValueError("fidelity must be >= 1")
    pitch = derive_pitch(coil)
    starts = coil.inner_radius + pitch * np.arange(coil.turns)
    if fidelity == 1:
        return LoopSet(starts + coil.conductor_width / 2, float(current))
    frac = (np.arange(fidelity) + 0.5) / fidelity
    dr = coil.conductor_width * frac
    dz = coil.conductor_thickness * (frac - 0.5)
    radii = (starts[:, None] + dr[None, :]).ravel()
    radii = np.repeat(radii, fidelity)
    zs = np.tile(dz, coil.turns * fidelity)
    weights = np.full(radii.size, 1.0 / fidelity**2)
    return LoopSet(radii, float(current), zs, weights)


def single_loop(radius: float, current: float) -> LoopSet:
    return LoopSet(np.array([radius]), float(current))


def loop_bz_onaxis(R: float, I: float, z):
    """On-axis B_z of one loop, mu0 I R^2 / (2 (R^2 + z^2)^1.5)."""
    z = np.asarray(z, dtype=float)
    out = MU0 * I * R * R / (2.0 * (R * R + z * z) ** 1.5)
    return out if out.ndim else float(out)


def loop_dbz_dz_onaxis(R: float, I: float, z):
    z = np.asarray(z, dtype=float)
    out = -3.0 * MU0 * I * R * R * z / (2.0 * (R * R + z * z) ** 2.5)
    return out if out.ndim else float(out)


def _field(loops: LoopSet, r, z):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r, z = np.broadcast_arrays(r, z)
    shape = r.shape
    br, bz = kernels.loop_field(loops.radii, loops.zs, loops.filament_currents, r.ravel(), z.ravel())
    if np.isnan(bz).any():
        k = int(np.flatnonzero(np.isnan(bz))[0])
        raise SingularPointError(f"point (r={r.ravel()[k]:.6g} m, z={z.ravel()[k]:.6g} m) lies on a filament")
    return br.reshape(shape), bz.reshape(shape)


def loop_field_offaxis(R: float, I: float, r, z):
    """(B_r, B_z) [T] of one loop of radius R at (r, z), elliptic-integral form."""
    scalar = np.ndim(r) == 0 and np.ndim(z) == 0
    br, bz = _field(single_loop(R, I), r, z)
    if scalar:
        return float(br[0]), float(bz[0])
    return br, bz


def coil_field(loops: LoopSet, r, z):
    """Superposed (B_r, B_z) of all filaments, as arrays shaped like r, z."""
    return _field(loops, r, z)


def coil_bz(loops: LoopSet, r, z):
    return _field(loops, r, z)[1]


def _fd_step(z: np.ndarray) -> np.ndarray:
    step = np.minimum(1e-6, np.abs(z) / 100.0)
    return np.where(step > 0, step, 1e-6)


def coil_dbz_dz(loops: LoopSet, r, z):
    """dB_z/dz [T/m] by central differences with one Richardson step.

    Step is min(1 um, |z|/100); the estimate combines steps h and h/2 as
    (4 D(h/2) - D(h)) / 3.
    """
    scalar = np.ndim(r) == 0 and np.ndim(z) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    r, z = np.broadcast_arrays(r, z)
    h = _fd_step(z)
    # The point itself must be off the filaments too.
    _field(loops, r, z)
    offsets = np.stack([h, -h, h / 2, -h / 2])
    bz = _field(loops, np.broadcast_to(r, offsets.shape), z[None] + offsets)[1]
    d1 = (bz[0] - bz[1]) / (2 * h)
    d2 = (bz[2] - bz[3]) / h
    out = (4.0 * d2 - d1) / 3.0
    return float(out.ravel()[0]) if scalar else out


def field_profile(loops: LoopSet, z_values, r: float = 0.0) -> list[FieldSample]:
    """B_z and dB_z/dz at heights ``z_values`` (order preserved)."""
    z = np.asarray(z_values, dtype=float)
    bz = coil_bz(loops, r, z)
    g = coil_dbz_dz(loops, np.full_like(z, r), z)
    return [FieldSample(float(r), float(zi), float(b), float(d)) for zi, b, d in zip(z, bz, g)]


# --------------------------------------------------------------------------
# magnet
# --------------------------------------------------------------------------


def _coaxial_mutual_inductance(radius: float, distance: float) -> float:
    # Two equal coaxial loops; K(m) via ellipkm1 keeps precision as m -> 1.
    p = distance * distance / (4 * radius * radius + distance * distance)
    k = math.sqrt(1.0 - p)
    return MU0 * radius * ((2.0 / k - k) * special.ellipkm1(p) - 2.0 / k * special.ellipe(1.0 - p))


@lru_cache(maxsize=256)
def demagnetizing_factor(radius: float, thickness: float) -> float:
    """Magnetometric demagnetizing factor of an axially magnetized cylinder.

    The magnet is replaced by its equivalent surface current; the volume
    average of its own B_z is the flux linkage of that sheet with itself,
    integrated over pairs of rings. N = 1 - <B_z> / (mu0 M).
    """

    def integrand(s):
        # d = t s^2 removes the log singularity at d = 0
        if s == 0.0:
            return 0.0
        d = thickness * s * s
        return (thickness - d) * _coaxial_mutual_inductance(radius, d) * 2.0 * thickness * s

    val, _ = integrate.quad(integrand, 0.0, 1.0, limit=400, epsabs=0.0, epsrel=1e-11)
    return 1.0 - 2.0 * val / (MU0 * math.pi * radius**2 * thickness)


def effective_magnetization(magnet: MagnetSpec, model: str = "auto") -> float:
    """Magnetization [A/m] used by the force models.

    ``rigid``: B_r / mu0.
    ``demagnetized``: self-consistent magnetization of a linear-recoil magnet
    (recoil permeability B_r / (mu0 H_c)) in its own demagnetizing field,
    B_r / (mu0 (1 + N (mu_r - 1))). Needs ``magnet.coercivity``.
    ``auto`` picks ``demagnetized`` when the coercivity is known.
    """
    if model not in MAGNETIZATION_MODELS:
        raise ValueError(f"unknown magnetization model {model!r}")
    if model == "auto":
        model = "demagnetized" if magnet.coercivity is not None else "rigid"
    if model == "rigid":
        return magnetization(magnet)
    if magnet.coercivity is None:
        raise ValueError("demagnetized model needs the magnet coercivity")
    mu_r = magnet.remanence / (MU0 * magnet.coercivity)
    n = demagnetizing_factor(magnet.radius, magnet.thickness)
    return magnet.remanence / (MU0 * (1.0 + n * (mu_r - 1.0)))


def force_point(loops: LoopSet, magnet: MagnetSpec, gap: float, magnetization_model: str = "auto") -> float:
    """Point-dipole force M V dB_z/dz on the axis at ``gap`` [N]; negative pulls toward the coil."""
    if not gap > 0:
        raise GeometryError(f"gap must be positive, got {gap!r}")
    m = effective_magnetization(magnet, magnetization_model)
    return m * magnet.volume * coil_dbz_dz(loops, 0.0, gap)


def _volume_force(loops, magnet, gap, order, m):
    x, w = np.polynomial.legendre.leggauss(order)
    r = 0.5 * magnet.radius * (x + 1.0)
    wr = 0.5 * magnet.radius * w
    z = gap + 0.5 * magnet.thickness * x
    wz = 0.5 * magnet.thickness * w
    rr, zz = np.meshgrid(r, z, indexing="ij")
    g = coil_dbz_dz(loops, rr, zz)
    return m * float(np.einsum("i,j,ij->", 2.0 * np.pi * r * wr, wz, g))


def volume_force_sequence(loops: LoopSet, magnet: MagnetSpec, gap: float, orders, magnetization_model="auto"):
    """Volume-integrated force at each Gauss-Legendre order in ``orders``."""
    _check_volume_gap(magnet, gap)
    m = effective_magnetization(magnet, magnetization_model)
    return [_volume_force(loops, magnet, gap, int(n), m) for n in orders]


def _check_volume_gap(magnet, gap):
    if not gap - magnet.thickness / 2 > 0:
        raise GeometryError(f"magnet bottom face at {gap - magnet.thickness / 2:.3g} m is not above the coil plane")


def force_volavg(loops: LoopSet, magnet: MagnetSpec, gap: float, quadrature_order: int = 16,
                 magnetization_model: str = "auto") -> float:
    """Force M * integral of dB_z/dz over the magnet cylinder [N].

    Axisymmetric Gauss-Legendre quadrature in (r, z), ``quadrature_order``
    nodes per dimension, doubled until two successive results agree to 0.1 %.
    Orders above 64 are not attempted.
    """
    _check_volume_gap(magnet, gap)
    m = effective_magnetization(magnet, magnetization_model)
    n = max(2, min(int(quadrature_order), MAX_QUADRATURE_ORDER // 2))
    prev = _volume_force(loops, magnet, gap, n, m)
    while 2 * n <= MAX_QUADRATURE_ORDER:
        n *= 2
        cur = _volume_force(loops, magnet, gap, n, m)
        if abs(cur - prev) <= VOLUME_FORCE_RTOL * abs(cur) or cur == prev:
            return cur
        prev = cur
    raise ConvergenceError(
        f"volume force not converged at quadrature order {MAX_QUADRATURE_ORDER} (gap {gap:.4g} m)"
    )


def coil_length(coil: CoilSpec) -> float:
    """Total centerline track length, sum of 2 pi r over the rings [m]."""
    return float(2.0 * np.pi * spiral_to_loops(coil, 1.0).radii.sum())


def coil_resistance(coil: CoilSpec, resistivity: float = RHO_COPPER) -> float:
    """DC resistance rho L / (w t) [ohm]."""
    area = coil.conductor_width * coil.conductor_thickness
    if not area > 0:
        raise ValueError("conductor cross-section must be positive")
    return resistivity * coil_length(coil) / area
