"""CSV, JSON and SVG writers. Output bytes depend only on the data and the provenance."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .locomotion import SimTrace
from .sweep import SweepResult


@dataclass(frozen=True)
class Provenance:
    config_sha256: str
    tool_version: str

    def lines(self) -> list[str]:
        return [f"# morph-wheel {self.tool_version}", f"# config_sha256 {self.config_sha256}"]

    def as_dict(self) -> dict:
        return {"tool_version": self.tool_version, "config_sha256": self.config_sha256}


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: Path, table: SweepResult, prov: Provenance) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for line in prov.lines():
            fh.write(line + "\r\n")
        w = csv.writer(fh)
        w.writerow(table.names)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def write_json(path: Path, data: dict[str, Any], prov: Provenance) -> Path:
    path = Path(path)
    doc = {"provenance": prov.as_dict(), **_jsonable(data)}
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path


def trace_table(trace: SimTrace) -> SweepResult:
    schema = [
        ("t_s", "s"), ("position_m", "m"), ("theta_d_rad", "rad"), ("delta_r_mm", "mm"),
        ("effective_radius_mm", "mm"), ("mode", ""), ("motor_torque_Nmm", "N*mm"),
        ("motor_current_A", "A"), ("ground_speed_m_per_s", "m/s"), ("F_res_N", "N"),
        ("F_out_N", "N"), ("F_c_N", "N"), ("F_s_N", "N"), ("segment", ""), ("slip_risk", "bool"),
    ]
    s = trace.samples
    cols = [
        [x.t for x in s], [x.position for x in s], [x.theta_d for x in s],
        [x.delta_r for x in s], [x.effective_radius for x in s],
        [x.mode.mode.value for x in s], [x.motor_torque for x in s],
        [x.motor_current for x in s], [x.ground_speed for x in s], [x.F_res for x in s],
        [x.mode.deciding_forces.F_out for x in s], [x.mode.deciding_forces.F_c for x in s],
        [x.mode.deciding_forces.F_s for x in s], [x.segment for x in s], [x.slip_risk for x in s],
    ]
    return SweepResult.from_columns(schema, cols, variant=trace.variant)


def write_svg(path: Path, x_name: str, series: Sequence[tuple[str, SweepResult, str]],
              title: str, prov: Provenance) -> Path:
    """Line plot of ``(label, table, y column)`` series. Needs matplotlib."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": prov.config_sha256, "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for label, table, y in series:
            ax.plot(table.column(x_name), table.column(y), label=label)
        ax.set_xlabel(x_name)
        ax.set_title(title)
        if len(series) > 1:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg",
                    metadata={"Date": None, "Creator": f"morph-wheel {prov.tool_version}"})
        plt.close(fig)
    return path
