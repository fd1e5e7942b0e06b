"""Command-line entry point: ``micropump <subcommand> [--config PATH] [--out PATH] [--format ...]``.

Exit codes: 0 success, 1 infeasible design, 2 input error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import design, magnetics, output, plate
from .config import load_paper_config, parse_config
from .errors import (
    ConfigError,
    ConvergenceError,
    DesignStageError,
    GeometryError,
    InvalidSpecError,
    NoSolutionError,
    RangeTooNarrowError,
    SingularPointError,
    SolverError,
)
from .model import RHO_COPPER, TABLE_LIMITING_FORCE, TABLE_OUTER_RADIUS, TABLE_RESISTANCE, flexural_rigidity, um

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

_INPUT_ERRORS = (ConfigError, InvalidSpecError, GeometryError, RangeTooNarrowError, ValueError, TypeError, OSError)
_NUMERIC_ERRORS = (ConvergenceError, SolverError, SingularPointError, NoSolutionError, ArithmeticError)


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _emit(args, header, rows, extra=None):
    """Write a table as csv, json or aligned text to --out or stdout."""
    if args.format == "csv":
        text = output.csv_text(header, rows)
    elif args.format == "json":
        doc = {"columns": list(header), "rows": [[float(v) for v in r] for r in rows]}
        doc.update(extra or {})
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["  ".join(f"{h:>16}" for h in header)]
        lines += ["  ".join(f"{float(v):16.6g}" for v in r) for r in rows]
        lines += [f"{k}: {v}" for k, v in (extra or {}).items()]
        text = "\n".join(lines) + "\n"
    _write(args, text)


def _write(args, text):
    if args.out:
        output.write_text(text, args.out)
    else:
        sys.stdout.write(text)


def cmd_field(cfg, args):
    loops = magnetics.spiral_to_loops(cfg.coil, args.current or cfg.current, cfg.fidelity)
    z = np.arange(args.z_min_um, args.z_max_um + 0.5 * args.z_step_um, args.z_step_um) * 1e-6
    samples = magnetics.field_profile(loops, z, um(args.r_um))
    header, rows = output.profile_table(samples)
    peak = max(samples, key=lambda s: abs(s.dbz_dz))
    _emit(args, header, rows, {"peak_gradient_z_um": peak.z * 1e6})


def cmd_force(cfg, args):
    currents = _floats(args.currents)
    per_amp = design.force_at(cfg.coil, cfg.magnet, um(args.gap_um), 1.0, args.model, cfg.quadrature_order,
                              cfg.magnetization_model, cfg.fidelity)
    rows = [(i, abs(per_amp * i) * 1e6) for i in currents]
    _emit(args, ("current_a", "force_uN"), rows, {"gap_um": args.gap_um, "model": args.model,
                                                  "attractive": bool(per_amp < 0)})


def cmd_deflect(cfg, args):
    dia, mag = cfg.diaphragm, cfg.magnet
    D = flexural_rigidity(dia)
    n = args.nodes or cfg.fd_nodes
    if args.profile_force_un is not None:
        prof = plate.solve_circular_fd(dia.radius, mag.radius, args.profile_force_un * 1e-6, D, n)
        header, rows = output.profile_table(prof)
        _emit(args, header, rows)
        return
    unit = plate.solve_circular_fd(dia.radius, mag.radius, 1.0, D, n).center
    rows = []
    for f in _floats(args.forces_un):
        F = f * 1e-6
        rows.append((f, plate.center_deflection_eq2(F, dia.radius, mag.radius, D) * 1e6, F * unit * 1e6))
    dev = max(abs(r[1] - r[2]) / r[1] for r in rows if r[1] > 0) if rows else 0.0
    _emit(args, ("force_uN", "w_eq2_um", "w_fd_um"), rows, {"max_relative_difference": dev})


def cmd_shapes(cfg, args):
    dia, mag = cfg.diaphragm, cfg.magnet
    D = flexural_rigidity(dia)
    if args.field:
        geom = (plate.PlateGeometry.equal_area_square(dia.radius, dia.thickness) if args.field == "square"
                else plate.PlateGeometry.equal_area_rectangle(dia.radius, dia.thickness, args.aspect))
        load = plate.LoadPatch("central-disc", args.force_un * 1e-6, mag.radius)
        header, rows = output.profile_table(plate.solve_rect_fd(geom, load, D, args.nodes))
        _emit(args, header, rows)
        return
    cmp = plate.compare_shapes(dia.radius, mag.radius, dia.thickness, D, [f * 1e-6 for f in _floats(args.forces_un)],
                               args.aspect, cfg.fd_nodes, args.nodes)
    rows = [(r.force * 1e6, r.w_circle_closed * 1e6, r.w_circle * 1e6, r.w_square * 1e6, r.w_rectangle * 1e6)
            for r in cmp.rows]
    _emit(args, ("force_uN", "w_circle_closed_um", "w_circle_um", "w_square_um", "w_rectangle_um"), rows,
          {"ordered": cmp.ordered, "converged": cmp.converged, "refinement_change": cmp.refinement_change})


def cmd_limit(cfg, args):
    dia = cfg.diaphragm
    k = cfg.kappa
    lim = plate.limiting_force_eq3(dia.thickness, dia.yield_strength, k, dia.poisson_ratio)
    F = (args.force_un * 1e-6 if args.force_un is not None else
         plate.force_for_deflection(cfg.target_deflection, dia.radius, cfg.magnet.radius, flexural_rigidity(dia)))
    m_calc, safe_calc = design.safety_margin(F, dia, k, cfg.safety_factor, lim.force)
    m_tab, safe_tab = design.safety_margin(F, dia, k, cfg.safety_factor, TABLE_LIMITING_FORCE)
    rows = [(k, lim.force * 1e6, TABLE_LIMITING_FORCE * 1e6, F * 1e6, m_calc, m_tab)]
    _emit(args, ("kappa", "limiting_force_uN", "printed_limiting_force_uN", "applied_force_uN", "margin", "margin_printed"),
          rows, {"branch": lim.branch, "note": lim.note, "safe": bool(safe_calc), "safe_printed": bool(safe_tab)})


def cmd_resist(cfg, args):
    r = magnetics.coil_resistance(cfg.coil, args.resistivity)
    rows = [(r, TABLE_RESISTANCE, magnetics.coil_length(cfg.coil) * 1e3, cfg.coil.outer_radius * 1e6)]
    _emit(args, ("resistance_ohm", "printed_resistance_ohm", "length_mm", "outer_radius_um"), rows,
          {"relative_error": r / TABLE_RESISTANCE - 1.0, "printed_outer_radius_um": TABLE_OUTER_RADIUS * 1e6})


_SWEEP_SCALE = {"turns": 1.0, "conductor_width": 1e-6, "turn_spacing": 1e-6, "current": 1.0, "gap": 1e-6}


def cmd_sweep(cfg, args):
    coil = cfg.coil if args.use_config_coil else design.study_coil()
    if args.study:
        study = design.trend_study(coil, cfg.magnet, um(args.gap_um), mode=args.model,
                                   plateau_threshold=args.plateau_threshold)
        rows, extra = [], {}
        for name, res in (("turns", study.turns), ("conductor_width", study.width), ("turn_spacing", study.spacing)):
            scale = _SWEEP_SCALE[name]
            code = ["turns", "conductor_width", "turn_spacing"].index(name)
            rows += [(code, v / scale if scale != 1.0 else v, f * 1e6) for v, f in res.rows()]
            extra[f"verdict_{name}"] = f"{'PASS' if res.passed else 'FAIL'}: {res.verdict}"
        _emit(args, ("parameter_index", "value", "force_uN"), rows, extra)
        return 0 if study.passed else EXIT_INFEASIBLE
    if not args.parameter or not args.values:
        raise ValueError("sweep needs --parameter and --values (or --study)")
    scale = _SWEEP_SCALE[args.parameter]
    values = [v * scale for v in _floats(args.values)]
    if args.parameter == "turns":
        values = [int(v) for v in values]
    spec = design.SweepSpec(args.parameter, tuple(values), coil=coil, magnet=cfg.magnet, diaphragm=cfg.diaphragm,
                            current=cfg.current, gap=um(args.gap_um), response=args.response, mode=args.model,
                            quadrature_order=cfg.quadrature_order, magnetization_model=cfg.magnetization_model,
                            plateau_threshold=args.plateau_threshold)
    res = design.run_sweep(spec)
    unit = {"force": 1e6, "gradient": 1.0, "deflection": 1e6}[args.response]
    col = {"force": "force_uN", "gradient": "dbz_dz_T_per_m", "deflection": "w_um"}[args.response]
    rows = [(v / scale if scale != 1.0 else v, f * unit) for v, f in res.rows()]
    _emit(args, (args.parameter, col), rows, {"verdict": res.verdict, "passed": res.passed})
    return 0


def cmd_design(cfg, args):
    report = design.design_pipeline(cfg)
    fmt = "text" if args.format == "text" else "json"
    if args.format == "csv":
        raise ValueError("design reports are json or text")
    text = output.report_text(report) if fmt == "text" else output.report_json(report)
    _write(args, text)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON design config (default: bundled paper_tables.json)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json", "text"), default=None)

    ap = argparse.ArgumentParser(prog="micropump", description="Electromagnetic diaphragm micropump design tools")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field", parents=[common], help="B_z and dB_z/dz along the coil axis")
    p.add_argument("--z-min-um", type=float, default=10.0)
    p.add_argument("--z-max-um", type=float, default=2000.0)
    p.add_argument("--z-step-um", type=float, default=10.0)
    p.add_argument("--r-um", type=float, default=0.0)
    p.add_argument("--current", type=float, default=None, help="A (default: coil.current_a)")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("force", parents=[common], help="magnet force versus coil current")
    p.add_argument("--gap-um", type=float, default=620.0)
    p.add_argument("--currents", default="0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--model", choices=design.GAP_MODES, default="volume")
    p.set_defaults(func=cmd_force)

    p = sub.add_parser("deflect", parents=[common], help="centre deflection, closed form and finite differences")
    p.add_argument("--forces-un", default=",".join(f"{f:.4g}" for f in np.linspace(4.58, 18.4, 9)))
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--profile-force-un", type=float, default=None, help="emit the radial profile at this force")
    p.set_defaults(func=cmd_deflect)

    p = sub.add_parser("shapes", parents=[common], help="circle / square / rectangle deflection comparison")
    p.add_argument("--forces-un", default="4.58,9.2,13.8,18.4")
    p.add_argument("--aspect", type=float, default=2.0)
    p.add_argument("--nodes", type=int, default=129, help="nodes along the shorter side")
    p.add_argument("--field", choices=("square", "rectangle"), default=None, help="emit the 2-D deflection field")
    p.add_argument("--force-un", type=float, default=18.4)
    p.set_defaults(func=cmd_shapes)

    p = sub.add_parser("limit", parents=[common], help="limiting force and safety margins")
    p.add_argument("--force-un", type=float, default=None, help="applied force (default: from target deflection)")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("resist", parents=[common], help="coil DC resistance")
    p.add_argument("--resistivity", type=float, default=RHO_COPPER)
    p.set_defaults(func=cmd_resist)

    p = sub.add_parser("sweep", parents=[common], help="coil parameter sweeps and trend verdicts")
    p.add_argument("--study", action="store_true", help="run the turns / width / spacing trend study")
    p.add_argument("--parameter", choices=design.SWEEP_PARAMETERS)
    p.add_argument("--values", help="comma list; lengths in um, current in A")
    p.add_argument("--response", choices=design.SWEEP_RESPONSES, default="force")
    p.add_argument("--gap-um", type=float, default=design.STUDY_GAP * 1e6)
    p.add_argument("--model", choices=design.GAP_MODES, default="point")
    p.add_argument("--plateau-threshold", type=float, default=design.DEFAULT_PLATEAU_THRESHOLD)
    p.add_argument("--use-config-coil", action="store_true", help="sweep around the config coil instead of the study coil")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("design", parents=[common], help="full inverse design pipeline")
    p.set_defaults(func=cmd_design)
    return ap


def _exit_code(exc):
    cause = exc.cause if isinstance(exc, DesignStageError) else exc
    if isinstance(cause, _NUMERIC_ERRORS):
        return EXIT_NUMERIC
    return EXIT_INPUT


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.format is None:
        args.format = "json" if args.command in ("design", "limit", "resist") else "csv"
    try:
        cfg = parse_config(args.config) if args.config else load_paper_config()
        code = args.func(cfg, args)
    except DesignStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)
    except _NUMERIC_ERRORS as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _INPUT_ERRORS as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    raise SystemExit(main())
