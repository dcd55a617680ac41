"""``morph`` command-line entry point."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .config import RunConfig, load_config, preset_names
from .design_space import (
    Constraint,
    SegmentConfig,
    check_coupler_constraints,
    cond1_upper_closed_form,
    displacement_amplitude,
    min_friction_coefficient,
    min_segment_count,
    stiffness_sweep,
    strut_inner_radius_bound,
    weight_feasibility,
)
from .errors import ConfigError, MorphError
from .locomotion import bidirectional_check, compare_wheels, run
from .report import Provenance, trace_table, write_csv, write_json, write_svg
from .sweep import SweepResult
from .wheel_model import (
    coupler_delta_r,
    input_torque,
    spring_resistance_force,
)

EXIT_OK, EXIT_CONSTRAINT, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

TORQUE_CURVE_SCHEMA = [
    ("theta_d_deg", "deg"), ("delta_r_mm", "mm"), ("tau_in_Nmm", "N*mm"),
    ("F_s_N", "N"), ("F_out_N", "N"),
]


class Outputs:
    """Collects files written by one command."""

    def __init__(self, cfg: RunConfig, directory: Path, formats: Sequence[str]):
        self.dir = Path(directory)
        self.formats = set(formats)
        self.prov = Provenance(cfg.sha256, __version__)
        self.written: list[Path] = []

    def csv(self, name: str, table: SweepResult):
        if "csv" in self.formats:
            self.written.append(write_csv(self.dir / name, table, self.prov))

    def json(self, name: str, data: dict):
        if "json" in self.formats:
            self.written.append(write_json(self.dir / name, data, self.prov))

    def svg(self, name: str, x: str, series, title: str):
        if "svg" in self.formats:
            self.written.append(write_svg(self.dir / name, x, series, title, self.prov))


def _tag(x: float) -> str:
    return f"{x:g}".replace(".", "p")


def torque_curve(design, points: int) -> SweepResult:
    theta = np.linspace(0.0, design.theta_d_max, points)
    dr = coupler_delta_r(design.coupler, theta)
    tau = input_torque(design, theta)
    fs = spring_resistance_force(design, dr)
    fout = tau / design.effective_radius(dr)
    return SweepResult.from_columns(TORQUE_CURVE_SCHEMA,
                                    [np.degrees(theta), dr, tau, fs, fout],
                                    wheel_weight_kg=design.wheel_weight)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_model_sweep(cfg: RunConfig, out: Outputs) -> int:
    base = cfg.design()
    ms = cfg.model_sweep
    curves, summary = [], []
    for w in ms.wheel_weights_kg:
        d = base.with_weight(w)
        table = torque_curve(d, ms.points)
        out.csv(f"torque_curve_W{_tag(w)}kg.csv", table)
        curves.append((f"W_w = {w:g} kg", table))
        summary.append({
            "wheel_weight_kg": w,
            "tau_in_full_compression_Nmm": table.rows[-1][2],
            "F_out_full_compression_N": table.rows[-1][4],
            "F_out_max_N": max(table.column("F_out_N")),
        })
    stiff = stiffness_sweep(base, ms.stiffness_total_Nmm_per_deg)
    out.csv("stiffness_sweep.csv", stiff)
    out.json("model_sweep.json", {"curves": summary})
    out.svg("torque_curve.svg", "theta_d_deg",
            [(lbl, t, "tau_in_Nmm") for lbl, t in curves], "Input torque vs drivetrain angle")
    out.svg("output_force.svg", "theta_d_deg",
            [(lbl, t, "F_out_N") for lbl, t in curves], "Output force vs drivetrain angle")
    return EXIT_OK


def cmd_feasibility(cfg: RunConfig, out: Outputs) -> int:
    design = cfg.design()
    f = cfg.feasibility
    region = weight_feasibility(design, f.w_min_kg, f.w_max_kg, f.grid_points, f.domain_points)
    out.csv("feasibility_grid.csv", region.to_sweep())
    out.csv("friction_map.csv", min_friction_coefficient(design, f.friction_weights_kg,
                                                         f.domain_points))
    out.json("feasibility_summary.json", {
        "lower_bound_kg": region.lower_bound,
        "upper_bound_kg": region.upper_bound,
        "cond1_upper_kg": region.cond1_upper,
        "cond1_upper_closed_form_kg": cond1_upper_closed_form(design),
        "grid_points": len(region.parameter_grid),
    })
    return EXIT_OK


def cmd_design_check(cfg: RunConfig, out: Outputs) -> int:
    w, dc = cfg.wheel, cfg.design_check
    try:
        report = check_coupler_constraints(w.crank_length_mm, w.slider_length_mm,
                                           w.initial_radius_mm, dc.clearance_mm,
                                           dc.delta_r_target_mm)
        seg = SegmentConfig(w.segment_count, dc.radius_ratio, w.initial_radius_mm)
    except MorphError as exc:
        raise ConfigError(f"[wheel] {exc}", cfg.lines.get(("wheel", 0, None))) from None
    amp, amp_hat = displacement_amplitude(seg)
    report = report.extended(Constraint("displacement_amplitude",
                                        amp_hat <= dc.amplitude_limit_percent,
                                        dc.amplitude_limit_percent - amp_hat, "percent"))
    strut = strut_inner_radius_bound(math.radians(w.strut_max_link_angle_deg),
                                     w.strut_constraint_length_mm, dc.delta_r_target_mm)
    scan = [(n, *displacement_amplitude(SegmentConfig(n, dc.radius_ratio, w.initial_radius_mm)))
            for n in range(3, 21)]
    out.csv("segment_amplitude.csv", SweepResult.from_columns(
        [("n", ""), ("A_mm", "mm"), ("A_hat_percent", "%")], list(zip(*scan))))
    out.json("design_check.json", {
        "passed": report.passed,
        "violated": report.violated,
        "constraints": [
            {"name": c.name, "satisfied": c.satisfied, "margin": c.margin, "unit": c.unit}
            for c in report.constraints
        ],
        "segments": {
            "n": w.segment_count, "radius_ratio": dc.radius_ratio,
            "A_mm": amp, "A_hat_percent": amp_hat,
            "min_segment_count": min_segment_count(dc.radius_ratio, dc.amplitude_limit_percent),
        },
        "strut": {
            "min_link_length_mm": strut.min_link_length,
            "configured_link_length_mm": w.strut_link_length_mm,
            "reference_link_length_mm": strut.reference_link_length,
            "reference_satisfies_stroke": strut.reference_satisfies,
        },
    })
    for name in report.violated:
        print(f"constraint violated: {name}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_CONSTRAINT


def _variant_file(v: str) -> str:
    return v.replace(":", "_").replace(".", "p")


def _trace_svgs(out: Outputs, stem: str, traces: dict):
    tables = [(k, trace_table(t)) for k, t in traces.items()]
    out.svg(f"{stem}_radius.svg", "t_s", [(k, t, "effective_radius_mm") for k, t in tables],
            "Effective radius vs time")
    out.svg(f"{stem}_current.svg", "t_s", [(k, t, "motor_current_A") for k, t in tables],
            "Motor current vs time")


def cmd_simulate(cfg: RunConfig, out: Outputs) -> int:
    s = cfg.simulation
    if s.kind == "compare":
        rep = compare_wheels(cfg.scenario(), s.variants)
        for v, tr in rep.traces.items():
            out.csv(f"trace_{_variant_file(v)}.csv", trace_table(tr))
        out.json("comparison.json", rep.summary())
        _trace_svgs(out, "compare", rep.traces)
        return EXIT_OK
    if s.kind == "load_sweep":
        loads = {}
        steady = []
        for load in s.onboard_loads_kg:
            sc = cfg.scenario(load)
            traces = {v: run(sc, v) for v in s.variants}
            for v, tr in traces.items():
                out.csv(f"trace_load{_tag(load)}kg_{_variant_file(v)}.csv", trace_table(tr))
            loads[f"{load:g}"] = {v: tr.summary for v, tr in traces.items()}
            if "morph" in traces:
                steady.append(traces["morph"].summary["steady_radius_mm"])
        out.json("load_sweep.json", {
            "onboard_loads_kg": s.onboard_loads_kg,
            "morph_steady_radius_mm": steady,
            "loads": loads,
        })
        return EXIT_OK
    rep = bidirectional_check(cfg.scenario())
    out.csv("trace_forward.csv", trace_table(rep.forward))
    out.csv("trace_reverse.csv", trace_table(rep.reverse))
    out.json("symmetry.json", rep.summary())
    _trace_svgs(out, "bidirectional", {"forward": rep.forward, "reverse": rep.reverse})
    if not rep.passed:
        print(f"asymmetry at sample {rep.first_divergence}", file=sys.stderr)
        return EXIT_CONSTRAINT
    return EXIT_OK


COMMANDS = {
    "model-sweep": cmd_model_sweep,
    "feasibility": cmd_feasibility,
    "design-check": cmd_design_check,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="morph", description=(
        "Quasi-static model, design checks and locomotion runs for a passive "
        "variable-radius wheel."))
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=[*COMMANDS, "presets"])
    p.add_argument("--config", help="TOML file, or the name of a bundled preset")
    p.add_argument("--out", help="output directory (overrides [output] directory)")
    p.add_argument("--format", help="comma-separated subset of csv,json,svg")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print("\n".join(preset_names()))
        return EXIT_OK
    if not args.config:
        print("morph: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
        formats = cfg.output.formats
        if args.format:
            formats = [f.strip() for f in args.format.split(",") if f.strip()]
            bad = [f for f in formats if f not in ("csv", "json", "svg")]
            if bad or not formats:
                raise ConfigError(f"unknown output format {bad[0] if bad else ''!r}")
        out = Outputs(cfg, Path(args.out or cfg.output.directory), formats)
        out.dir.mkdir(parents=True, exist_ok=True)
        code = COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"morph: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"morph: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MorphError as exc:
        print(f"morph: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    for path in out.written:
        print(path)
    return code


if __name__ == "__main__":
    sys.exit(main())
