"""Inverse design: magnet height, drive current, safety margin and coil trend sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import magnetics, plate
from .errors import DesignStageError, NoSolutionError, RangeTooNarrowError
from .magnetics import LoopSet
from .model import (
    TABLE_LIMITING_FORCE,
    CoilSpec,
    DesignReport,
    DiaphragmSpec,
    MagnetSpec,
    flexural_rigidity,
    outer_radius,
    paper_diaphragm,
    paper_magnet,
    um,
)

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
GAP_MODES = ("volume", "point")

DEFAULT_SAFETY_FACTOR = 2.0
DEFAULT_CURRENT_CEILING = 1.0
DEFAULT_PLATEAU_THRESHOLD = 0.15


def _loops(coil_or_loops, current=1.0, fidelity=1) -> LoopSet:
    if isinstance(coil_or_loops, LoopSet):
        return coil_or_loops.with_current(current)
    return magnetics.spiral_to_loops(coil_or_loops, current, fidelity)


def force_at(coil_or_loops, magnet, gap, current=1.0, mode="volume", quadrature_order=16,
             magnetization_model="auto", fidelity=1) -> float:
    """Signed force on the magnet at ``gap`` for the chosen force model."""
    loops = _loops(coil_or_loops, current, fidelity)
    if mode == "point":
        return magnetics.force_point(loops, magnet, gap, magnetization_model)
    if mode == "volume":
        return magnetics.force_volavg(loops, magnet, gap, quadrature_order, magnetization_model)
    raise ValueError(f"unknown force mode {mode!r}")


def golden_section_max(f, lo, hi, tol):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class GapResult:
    gap: float
    force: float
    mode: str


def default_z_range(coil_or_loops, magnet):
    if isinstance(coil_or_loops, LoopSet):
        rmax = float(coil_or_loops.radii.max())
    else:
        rmax = outer_radius(coil_or_loops)
    return magnet.thickness, 5.0 * rmax


def optimal_gap(coil_or_loops, magnet: MagnetSpec, current: float = 1.0, z_range=None, resolution: float = 1e-7,
                mode: str = "volume", coarse_points: int = 96, quadrature_order: int = 16,
                magnetization_model: str = "auto", fidelity: int = 1) -> GapResult:
    """Height of the magnet mid-plane that maximizes |force|.

    A uniform coarse grid over ``z_range`` brackets the peak, golden-section
    search refines it to ``resolution``. In point mode the objective is the
    on-axis gradient (times the constant M V), in volume mode the
    volume-integrated force.
    """
    if mode not in GAP_MODES:
        raise ValueError(f"unknown gap mode {mode!r}")
    if resolution > 1e-6:
        raise ValueError("resolution must be <= 1 um")
    lo, hi = default_z_range(coil_or_loops, magnet) if z_range is None else z_range
    if mode == "volume" and lo <= magnet.thickness / 2:
        raise ValueError("z_range must keep the magnet above the coil plane")
    loops = _loops(coil_or_loops, current, fidelity)

    def objective(z):
        return abs(force_at(loops, magnet, z, current, mode, quadrature_order, magnetization_model))

    zs = np.linspace(lo, hi, coarse_points)
    vals = np.array([objective(z) for z in zs])
    k = int(np.argmax(vals))
    if k == 0 or k == zs.size - 1:
        raise RangeTooNarrowError(
            f"force peak at range boundary z = {zs[k] * 1e6:.1f} um; widen z_range ({lo * 1e6:.1f}-{hi * 1e6:.1f} um)"
        )
    z, _ = golden_section_max(objective, zs[k - 1], zs[k + 1], resolution)
    force = force_at(loops, magnet, z, current, mode, quadrature_order, magnetization_model)
    return GapResult(float(z), float(force), mode)


@dataclass(frozen=True)
class CurrentSolution:
    current: float
    feasible: bool
    force_per_amp: float  # signed force at 1 A
    ceiling: float

    @property
    def attractive(self) -> bool:
        return self.force_per_amp < 0


def solve_current(coil_or_loops, magnet: MagnetSpec, gap: float, F_target: float,
                  ceiling: float = DEFAULT_CURRENT_CEILING, mode: str = "volume", quadrature_order: int = 16,
                  magnetization_model: str = "auto", fidelity: int = 1) -> CurrentSolution:
    """Current whose force magnitude equals ``F_target`` (force is linear in current)."""
    if F_target < 0:
        raise ValueError("F_target must be >= 0")
    per_amp = force_at(coil_or_loops, magnet, gap, 1.0, mode, quadrature_order, magnetization_model, fidelity)
    if per_amp == 0.0 or not math.isfinite(per_amp):
        raise NoSolutionError(f"force at 1 A is {per_amp!r}; no current reaches the target")
    current = F_target / abs(per_amp)
    return CurrentSolution(current, current <= ceiling, per_amp, ceiling)


def safety_margin(F_applied: float, diaphragm: DiaphragmSpec, kappa: float,
                  safety_factor: float = DEFAULT_SAFETY_FACTOR, limiting_force: float | None = None):
    """(limiting force / applied force, margin >= safety_factor).

    ``limiting_force`` overrides the computed collapse load, e.g. with a
    published value.
    """
    if F_applied < 0:
        raise ValueError("F_applied must be >= 0")
    if limiting_force is None:
        limiting_force = plate.limiting_force_eq3(
            diaphragm.thickness, diaphragm.yield_strength, kappa, diaphragm.poisson_ratio
        ).force
    margin = math.inf if F_applied == 0 else limiting_force / F_applied
    return margin, margin >= safety_factor


# --------------------------------------------------------------------------
# sweeps
# --------------------------------------------------------------------------

SWEEP_PARAMETERS = ("turns", "conductor_width", "turn_spacing", "current", "gap")
SWEEP_RESPONSES = ("force", "gradient", "deflection")


def study_coil() -> CoilSpec:
    """Single-layer coil with 400 um inner radius used for the trend study."""
    return CoilSpec(turns=10, inner_radius=um(400), conductor_width=um(25), turn_spacing=um(20))


STUDY_GAP = um(200)


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    values: tuple
    coil: CoilSpec = field(default_factory=study_coil)
    magnet: MagnetSpec = field(default_factory=paper_magnet)
    diaphragm: DiaphragmSpec = field(default_factory=paper_diaphragm)
    current: float = 1.0
    gap: float = STUDY_GAP
    response: str = "force"
    mode: str = "point"
    quadrature_order: int = 16
    magnetization_model: str = "auto"
    plateau_threshold: float = DEFAULT_PLATEAU_THRESHOLD

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if self.response not in SWEEP_RESPONSES:
            raise ValueError(f"unknown sweep response {self.response!r}")
        vals = tuple(self.values)
        if len(vals) < 3:
            raise ValueError("a sweep needs at least 3 values")
        d = np.diff(np.asarray(vals, dtype=float))
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep values must be strictly monotone")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    responses: tuple  # magnitudes, in sweep order
    verdict: str
    passed: bool | None
    details: dict

    def rows(self):
        return list(zip(self.spec.values, self.responses))


def _point_response(spec: SweepSpec, value):
    coil, current, gap = spec.coil, spec.current, spec.gap
    if spec.parameter == "turns":
        coil = replace(coil, turns=int(value))
    elif spec.parameter == "conductor_width":
        coil = replace(coil, conductor_width=float(value))
    elif spec.parameter == "turn_spacing":
        coil = replace(coil, turn_spacing=float(value))
    elif spec.parameter == "current":
        current = float(value)
    else:
        gap = float(value)
    loops = magnetics.spiral_to_loops(coil, current)
    if spec.response == "gradient":
        return abs(magnetics.coil_dbz_dz(loops, 0.0, gap))
    f = abs(force_at(loops, spec.magnet, gap, current, spec.mode, spec.quadrature_order, spec.magnetization_model))
    if spec.response == "force":
        return f
    d = spec.diaphragm
    return plate.center_deflection_eq2(f, d.radius, spec.magnet.radius, flexural_rigidity(d))


def _doubling_gains(values, responses):
    lookup = dict(zip(values, responses))
    return {(n, 2 * n): lookup[2 * n] / lookup[n] - 1.0 for n in values if 2 * n in lookup}


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the response at every sweep value and judge the expected trend.

    turns: the force gain over the largest doubling n -> 2n in the grid must
    stay at or below ``plateau_threshold``. conductor_width, turn_spacing:
    response strictly decreasing. current: response exactly proportional to
    current. gap: no verdict.
    """
    responses = tuple(_point_response(spec, v) for v in spec.values)
    vals = np.asarray(spec.values, dtype=float)
    resp = np.asarray(responses)
    order = np.argsort(vals)
    details = {}
    if spec.parameter == "turns":
        gains = _doubling_gains([int(v) for v in spec.values], responses)
        details["doubling_gains"] = gains
        if not gains:
            return SweepResult(spec, responses, "no n -> 2n pair in the grid", None, details)
        last = max(gains)
        passed = gains[last] <= spec.plateau_threshold
        verdict = f"gain {last[0]}->{last[1]} turns = {gains[last]:.1%} (threshold {spec.plateau_threshold:.0%})"
    elif spec.parameter in ("conductor_width", "turn_spacing"):
        passed = bool(np.all(np.diff(resp[order]) < 0))
        verdict = f"response strictly decreasing in {spec.parameter}: {passed}"
    elif spec.parameter == "current":
        per_amp = resp / np.abs(vals)
        spread = float(np.max(np.abs(per_amp / per_amp[0] - 1.0)))
        details["max_relative_deviation"] = spread
        passed = spread <= 1e-9
        verdict = f"response / current constant to {spread:.1e}"
    else:
        return SweepResult(spec, responses, "gap sweep: no trend verdict", None, details)
    return SweepResult(spec, responses, verdict, bool(passed), details)


@dataclass(frozen=True)
class TrendStudy:
    turns: SweepResult
    width: SweepResult
    spacing: SweepResult

    @property
    def verdicts(self):
        return {"a_turns_plateau": self.turns.passed, "b_width_decreasing": self.width.passed,
                "c_spacing_decreasing": self.spacing.passed}

    @property
    def passed(self):
        return all(self.verdicts.values())


def trend_study(coil: CoilSpec | None = None, magnet: MagnetSpec | None = None, gap: float = STUDY_GAP,
                turns=(10, 20, 40), widths=(um(15), um(25), um(35)), spacings=(um(10), um(20), um(40)),
                mode: str = "point", plateau_threshold: float = DEFAULT_PLATEAU_THRESHOLD) -> TrendStudy:
    """The three coil-parameter sweeps at the 400 um inner-radius study coil."""
    coil = coil or study_coil()
    magnet = magnet or paper_magnet()
    common = dict(coil=coil, magnet=magnet, gap=gap, mode=mode, plateau_threshold=plateau_threshold)
    return TrendStudy(
        run_sweep(SweepSpec("turns", tuple(turns), **common)),
        run_sweep(SweepSpec("conductor_width", tuple(widths), **common)),
        run_sweep(SweepSpec("turn_spacing", tuple(spacings), **common)),
    )


# --------------------------------------------------------------------------
# pipeline
# --------------------------------------------------------------------------


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # re-raised with the stage tag
        raise DesignStageError(name, exc) from exc


def design_pipeline(config) -> DesignReport:
    """Target deflection -> force -> magnet height -> current -> safety margin.

    ``config`` is a :class:`micropump.config.DesignConfig`. Infeasible designs
    come back as reports with ``feasible=False`` and the failing stage named;
    only errors raise.
    """
    coil, magnet, dia = config.coil, config.magnet, config.diaphragm
    D = flexural_rigidity(dia)
    notes = list(config.notes())

    force = _stage("force_for_deflection", plate.force_for_deflection, config.target_deflection,
                   dia.radius, magnet.radius, D)
    gap = _stage("optimal_gap", optimal_gap, coil, magnet, 1.0, mode=config.gap_mode,
                 quadrature_order=config.quadrature_order, magnetization_model=config.magnetization_model,
                 fidelity=config.fidelity)
    sol = _stage("solve_current", solve_current, coil, magnet, gap.gap, force, config.current_ceiling,
                 mode=config.gap_mode, quadrature_order=config.quadrature_order,
                 magnetization_model=config.magnetization_model, fidelity=config.fidelity)
    kappa = dia.kappa(magnet)
    lim = _stage("safety_margin", plate.limiting_force_eq3, dia.thickness, dia.yield_strength, kappa,
                 dia.poisson_ratio)
    margin, safe = _stage("safety_margin", safety_margin, force, dia, kappa, config.safety_factor, lim.force)

    m_eff = magnetics.effective_magnetization(magnet, config.magnetization_model)
    notes.append(lim.note)
    notes.append(
        f"printed limiting force 377 uN disagrees with the computed {lim.force * 1e6:.1f} uN; "
        f"margin against 377 uN is {safety_margin(force, dia, kappa, 1.0, TABLE_LIMITING_FORCE)[0]:.2f}"
    )
    notes.append(f"force model: {config.gap_mode}; magnetization {m_eff:.6g} A/m ({config.magnetization_model})")
    if config.gap_mode == "volume":
        point = optimal_gap(coil, magnet, 1.0, mode="point", fidelity=config.fidelity)
        notes.append(f"on-axis gradient peak at {point.gap * 1e6:.1f} um (point model)")
    notes.append("small-deflection Kirchhoff plate theory")

    stage = None
    if not sol.feasible:
        stage = "solve_current"
    elif not safe:
        stage = "safety_margin"
    return DesignReport(
        target_deflection=config.target_deflection,
        required_force=force,
        required_current=sol.current,
        optimal_gap=gap.gap,
        limiting_force=lim.force,
        safety_factor_achieved=margin,
        feasible=stage is None,
        attractive=sol.attractive,
        force_per_amp=abs(sol.force_per_amp),
        limiting_force_branch=lim.branch,
        stage=stage,
        notes=tuple(notes),
        config_hash=config.hash,
    )
