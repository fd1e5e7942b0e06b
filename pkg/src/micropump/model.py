"""Domain types, unit conversion and derived quantities.

Everything here is SI. The ``um``/``from_um`` helpers exist for the config and
report boundary, where lengths are written in micrometers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidMaterialError, InvalidSpecError

MU0 = 4e-7 * math.pi  # vacuum permeability [T m / A]
RHO_COPPER = 1.68e-8  # [ohm m] at 20 C

# Largest remanence accepted for a permanent magnet [T].
MAX_REMANENCE = 1.5

_NU_SLACK = 1e-9


def um(value: float) -> float:
    """Micrometers to meters."""
    return value * 1e-6


def from_um(value: float) -> float:
    """Meters to micrometers."""
    return value * 1e6


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise InvalidSpecError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class CoilSpec:
    """Planar spiral coil of ``turns`` concentric windings.

    Attributes:
        turns: Number of windings.
        inner_radius: Inner edge of the first winding (m).
        conductor_width: Radial width of the copper track (m).
        turn_spacing: Gap between neighbouring tracks (m).
        conductor_thickness: Plating thickness of the track (m).
    """

    turns: int
    inner_radius: float
    conductor_width: float
    turn_spacing: float
    conductor_thickness: float = 20e-6

    def __post_init__(self):
        if int(self.turns) != self.turns or self.turns < 1:
            raise InvalidSpecError(f"turns must be an integer >= 1, got {self.turns!r}")
        _positive("inner_radius", self.inner_radius)
        _positive("conductor_width", self.conductor_width)
        _positive("conductor_thickness", self.conductor_thickness)
        # zero spacing is a legal (touching) layout
        if not (self.turn_spacing >= 0 and math.isfinite(self.turn_spacing)):
            raise InvalidSpecError(f"turn_spacing must be >= 0, got {self.turn_spacing!r}")

    @property
    def pitch(self) -> float:
        return derive_pitch(self)

    @property
    def outer_radius(self) -> float:
        return outer_radius(self)


@dataclass(frozen=True)
class MagnetSpec:
    """Axially magnetized disc magnet sitting on the diaphragm.

    ``coercivity`` is optional; when given it enables the demagnetized
    magnetization model in :mod:`micropump.magnetics`.
    """

    radius: float
    thickness: float
    remanence: float
    coercivity: float | None = None

    def __post_init__(self):
        _positive("radius", self.radius)
        _positive("thickness", self.thickness)
        if not (0 < self.remanence <= MAX_REMANENCE):
            raise InvalidSpecError(f"remanence must be in (0, {MAX_REMANENCE}] T, got {self.remanence!r}")
        if self.coercivity is not None:
            _positive("coercivity", self.coercivity)

    @property
    def volume(self) -> float:
        return math.pi * self.radius**2 * self.thickness


@dataclass(frozen=True)
class DiaphragmSpec:
    radius: float
    thickness: float
    youngs_modulus: float
    poisson_ratio: float
    yield_strength: float

    def __post_init__(self):
        _positive("radius", self.radius)
        _positive("thickness", self.thickness)
        _positive("youngs_modulus", self.youngs_modulus)
        _positive("yield_strength", self.yield_strength)
        if not (0 <= self.poisson_ratio < 0.5 + _NU_SLACK):
            raise InvalidMaterialError(f"poisson_ratio must be in [0, 0.5], got {self.poisson_ratio!r}")

    @property
    def rigidity(self) -> float:
        return flexural_rigidity(self)

    def kappa(self, magnet: MagnetSpec) -> float:
        """Plate radius over loaded-area (magnet) radius."""
        return self.radius / magnet.radius


@dataclass(frozen=True)
class FieldSample:
    r: float
    z: float
    bz: float
    dbz_dz: float


@dataclass(frozen=True)
class DesignReport:
    """Outcome of the inverse design pipeline.

    Forces are magnitudes; ``attractive`` records the direction for the
    chosen current polarity. ``stage`` names the stage that made the design
    infeasible, or is ``None``.
    """

    target_deflection: float
    required_force: float
    required_current: float
    optimal_gap: float
    limiting_force: float
    safety_factor_achieved: float
    feasible: bool
    attractive: bool = True
    force_per_amp: float = 0.0
    limiting_force_branch: str = ""
    stage: str | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)
    config_hash: str = ""


def derive_pitch(coil: CoilSpec) -> float:
    """Centre-to-centre distance of neighbouring windings."""
    return coil.conductor_width + coil.turn_spacing


def outer_radius(coil: CoilSpec) -> float:
    """Outer edge of the winding footprint when every turn occupies one pitch."""
    return coil.inner_radius + coil.turns * derive_pitch(coil)


def outermost_conductor_edge(coil: CoilSpec) -> float:
    """Outer copper edge of the last ring in the concentric-ring layout."""
    return coil.inner_radius + (coil.turns - 1) * derive_pitch(coil) + coil.conductor_width


def flexural_rigidity(d: DiaphragmSpec) -> float:
    """Kirchhoff bending stiffness E h^3 / (12 (1 - nu^2)) [N m]."""
    return rigidity(d.youngs_modulus, d.thickness, d.poisson_ratio)


def rigidity(youngs_modulus: float, thickness: float, poisson_ratio: float) -> float:
    if not (0 <= poisson_ratio < 1):
        raise InvalidMaterialError(f"poisson_ratio {poisson_ratio} outside [0, 1)")
    _positive("youngs_modulus", youngs_modulus)
    _positive("thickness", thickness)
    return youngs_modulus * thickness**3 / (12.0 * (1.0 - poisson_ratio**2))


def magnetization(m: MagnetSpec) -> float:
    """Rigid-magnet magnetization B_r / mu0 [A/m]."""
    return m.remanence / MU0


def paper_coil() -> CoilSpec:
    return CoilSpec(turns=10, inner_radius=um(1250), conductor_width=um(25), turn_spacing=um(20),
                    conductor_thickness=um(20))


def paper_magnet() -> MagnetSpec:
    return MagnetSpec(radius=um(1222), thickness=um(20), remanence=0.3, coercivity=47.7e3)


def paper_diaphragm() -> DiaphragmSpec:
    return DiaphragmSpec(radius=um(1955), thickness=um(80), youngs_modulus=750e3, poisson_ratio=0.5,
                         yield_strength=130e3)


# Published values used for cross-checks, in SI.
TABLE_OUTER_RADIUS = um(1725)
TABLE_RESISTANCE = 3.23
TABLE_LIMITING_FORCE = 377e-6
