"""
Run configuration: TOML in, validated dataclasses out.

Every key carries its unit in the name. Unknown keys, wrong types and
out-of-range values are rejected with the offending line number.
"""

from __future__ import annotations

import hashlib
import math
import re
import sys
import typing
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, MorphError
from .locomotion import MotorModel, TerrainProfile, TerrainScenario, TerrainSegment, VehicleSpec
from .wheel_model import CouplerGeometry, SpringSpec, StrutGeometry, WheelDesign

PRESET_PACKAGE = "morph_wheel.presets"


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------

@dataclass
class WheelSection:
    crank_length_mm: float = 30.0
    slider_length_mm: float = 40.0
    strut_link_length_mm: float = 25.0
    strut_max_link_angle_deg: float = 74.0
    strut_constraint_length_mm: float = 5.0
    spring_unit_stiffness_Nmm_per_deg: float = 2.14
    spring_count: int = 12
    initial_radius_mm: float = 80.0
    min_contact_radius_mm: float = 42.0
    segment_count: int = 6
    wheel_weight_kg: float = 2.8
    gravity_m_per_s2: float = 9.80665
    delta_r_cap_mm: float = 40.0
    backlash_deg: float = 0.0

    def design(self) -> WheelDesign:
        return WheelDesign(
            coupler=CouplerGeometry(self.crank_length_mm, self.slider_length_mm),
            strut=StrutGeometry(self.strut_link_length_mm, self.strut_max_link_angle_deg,
                                self.strut_constraint_length_mm),
            spring=SpringSpec(self.spring_unit_stiffness_Nmm_per_deg, self.spring_count),
            initial_radius=self.initial_radius_mm,
            min_contact_radius=self.min_contact_radius_mm,
            segment_count=self.segment_count,
            wheel_weight=self.wheel_weight_kg,
            gravity=self.gravity_m_per_s2,
            delta_r_cap=self.delta_r_cap_mm,
            backlash_deg=self.backlash_deg,
        )


@dataclass
class ModelSweepSection:
    wheel_weights_kg: list[float] = field(default_factory=lambda: [1.8, 2.3, 2.8])
    points: int = 181
    stiffness_total_Nmm_per_deg: list[float] = field(
        default_factory=lambda: [12.0 + 2.0 * i for i in range(20)])

    def check(self, where):
        if not self.wheel_weights_kg:
            raise ConfigError("wheel_weights_kg must not be empty", where("wheel_weights_kg"))
        if any(w < 0 for w in self.wheel_weights_kg):
            raise ConfigError("wheel weights must be non-negative", where("wheel_weights_kg"))
        if self.points < 2:
            raise ConfigError("points must be >= 2", where("points"))
        if not self.stiffness_total_Nmm_per_deg or min(self.stiffness_total_Nmm_per_deg) <= 0:
            raise ConfigError("stiffness values must be positive",
                              where("stiffness_total_Nmm_per_deg"))


@dataclass
class FeasibilitySection:
    w_min_kg: float = 0.2
    w_max_kg: float = 4.0
    grid_points: int = 100
    domain_points: int = 500
    friction_weights_kg: list[float] = field(
        default_factory=lambda: [round(0.5 + 0.1 * i, 10) for i in range(26)])

    def check(self, where):
        if self.w_min_kg > self.w_max_kg:
            raise ConfigError("w_min_kg must not exceed w_max_kg", where("w_min_kg"))
        if self.w_min_kg < 0:
            raise ConfigError("w_min_kg must be non-negative", where("w_min_kg"))
        if self.grid_points < 10:
            raise ConfigError("grid_points must be >= 10", where("grid_points"))
        if self.domain_points < 3:
            raise ConfigError("domain_points must be >= 3", where("domain_points"))
        if any(w <= 0 for w in self.friction_weights_kg):
            raise ConfigError("friction weights must be positive", where("friction_weights_kg"))


@dataclass
class DesignCheckSection:
    clearance_mm: float = 10.0
    delta_r_target_mm: float = 40.0
    radius_ratio: float = 2.0
    amplitude_limit_percent: float = 5.0

    def check(self, where):
        if self.clearance_mm < 0:
            raise ConfigError("clearance_mm must be non-negative", where("clearance_mm"))
        if not self.delta_r_target_mm > 0:
            raise ConfigError("delta_r_target_mm must be positive", where("delta_r_target_mm"))
        if self.radius_ratio < 1:
            raise ConfigError("radius_ratio must be >= 1", where("radius_ratio"))
        if not self.amplitude_limit_percent > 0:
            raise ConfigError("amplitude_limit_percent must be positive",
                              where("amplitude_limit_percent"))


SIM_KINDS = ("compare", "load_sweep", "bidirectional")


@dataclass
class SimulationSection:
    kind: str = "compare"
    duration_s: float = 6.0
    dt_s: float = 0.01
    commanded_speed_rpm: float = 60.0
    cart_mass_kg: float = 1.0
    onboard_load_kg: float = 0.0
    onboard_loads_kg: list[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0, 25.0])
    wheel_count: int = 2
    variants: list[str] = field(default_factory=lambda: ["morph", "fixed:80", "fixed:45"])
    reverse_at_s: float = math.inf
    allow_expansion: bool = False
    stop_at_end: bool = True

    def check(self, where):
        if self.kind not in SIM_KINDS:
            raise ConfigError(f"kind must be one of {', '.join(SIM_KINDS)}", where("kind"))
        if not self.duration_s > 0:
            raise ConfigError("duration_s must be positive", where("duration_s"))
        if not self.dt_s > 0:
            raise ConfigError("dt_s must be positive", where("dt_s"))
        if self.kind == "load_sweep" and not self.onboard_loads_kg:
            raise ConfigError("onboard_loads_kg must not be empty", where("onboard_loads_kg"))
        if self.kind == "compare" and len(self.variants) < 2:
            raise ConfigError("compare needs at least two variants", where("variants"))
        for v in self.variants:
            if v != "morph" and not re.fullmatch(r"fixed:\d+(\.\d*)?", v):
                raise ConfigError(f"unknown wheel variant {v!r}", where("variants"))


@dataclass
class MotorSection:
    torque_constant_Nmm_per_A: float = 1900.0
    no_load_current_A: float = 0.02
    max_torque_Nmm: float = 10600.0
    rated_speed_rpm: float = 60.0

    def motor(self) -> MotorModel:
        return MotorModel(self.torque_constant_Nmm_per_A, self.no_load_current_A,
                          self.max_torque_Nmm, self.rated_speed_rpm)


@dataclass
class TerrainSection:
    length_m: float = 4.0
    slope_deg: float = 0.0
    rolling_resistance: float = 0.02
    friction: float = 0.8

    def segment(self) -> TerrainSegment:
        return TerrainSegment(self.length_m, self.slope_deg, self.rolling_resistance, self.friction)


@dataclass
class OutputSection:
    directory: str = "morph_out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])

    def check(self, where):
        bad = [f for f in self.formats if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigError(f"unknown output format {bad[0]!r}", where("formats"))


_TABLES = {
    "wheel": WheelSection,
    "model_sweep": ModelSweepSection,
    "feasibility": FeasibilitySection,
    "design_check": DesignCheckSection,
    "simulation": SimulationSection,
    "motor": MotorSection,
    "output": OutputSection,
}


@dataclass
class RunConfig:
    wheel: WheelSection = field(default_factory=WheelSection)
    model_sweep: ModelSweepSection = field(default_factory=ModelSweepSection)
    feasibility: FeasibilitySection = field(default_factory=FeasibilitySection)
    design_check: DesignCheckSection = field(default_factory=DesignCheckSection)
    simulation: SimulationSection = field(default_factory=SimulationSection)
    motor: MotorSection = field(default_factory=MotorSection)
    output: OutputSection = field(default_factory=OutputSection)
    terrain: list[TerrainSection] = field(default_factory=lambda: [TerrainSection()])

    # -- conversions -------------------------------------------------------

    lines: dict = field(default_factory=dict, repr=False, compare=False)

    def _line(self, table: str, index: int = 0):
        return self.lines.get((table, index, None))

    def design(self) -> WheelDesign:
        """The wheel as a validated design; physics violations become config errors."""
        try:
            return self.wheel.design()
        except (MorphError, ValueError) as exc:
            raise ConfigError(f"[wheel] {exc}", self._line("wheel")) from None

    def profile(self) -> TerrainProfile:
        return TerrainProfile(tuple(t.segment() for t in self.terrain))

    def scenario(self, onboard_load: float | None = None) -> TerrainScenario:
        s = self.simulation
        load = s.onboard_load_kg if onboard_load is None else onboard_load
        design = self.design()
        try:
            vehicle = VehicleSpec(s.cart_mass_kg, load, s.wheel_count, design,
                                  s.commanded_speed_rpm)
            return TerrainScenario(
                vehicle, self.profile(), self.motor.motor(), s.duration_s, s.dt_s,
                direction=1,
                reverse_at=None if math.isinf(s.reverse_at_s) else s.reverse_at_s,
                allow_expansion=s.allow_expansion,
                stop_at_end=s.stop_at_end,
            )
        except MorphError as exc:
            raise ConfigError(f"[simulation] {exc}", self._line("simulation")) from None

    def to_dict(self) -> dict:
        """Every key, defaults included, in schema order."""
        d = {name: asdict(getattr(self, name)) for name in _TABLES}
        d["terrain"] = [asdict(t) for t in self.terrain]
        return d

    def dumps(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.dumps().encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_HEADER = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_.\-]+)\s*\]\]?")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-]+|\"[^\"]*\")\s*=")


def _key_lines(text: str) -> dict[tuple[str, int, str | None], int]:
    """(table, array index, key) -> 1-based line; key None marks the header."""
    out: dict[tuple[str, int, str | None], int] = {}
    table, index = "", 0
    counts: dict[str, int] = {}
    for n, line in enumerate(text.splitlines(), 1):
        m = _HEADER.match(line)
        if m:
            table = m.group(2)
            if m.group(1) == "[[":
                index = counts.get(table, -1) + 1
                counts[table] = index
            else:
                index = 0
            out.setdefault((table, index, None), n)
            continue
        m = _KEY.match(line)
        if m:
            out.setdefault((table, index, m.group(1).strip('"')), n)
    return out


def _check_type(value, hint, key, line):
    origin = typing.get_origin(hint)
    if origin is list:
        (item,) = typing.get_args(hint)
        if not isinstance(value, list):
            raise ConfigError(f"{key} must be a list", line)
        return [_check_type(v, item, key, line) for v in value]
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false", line)
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer", line)
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number", line)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string", line)
        return value
    raise TypeError(hint)


def _build(cls, raw, table: str, index: int, lines):
    def where(key=None):
        return lines.get((table, index, key)) or lines.get((table, index, None))

    if not isinstance(raw, dict):
        raise ConfigError(f"[{table}] must be a table", where())
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown key {key!r} in [{table}]", where(key))
    kwargs = {k: _check_type(v, hints[k], k, where(k)) for k, v in raw.items()}
    obj = cls(**kwargs)
    check = getattr(obj, "check", None)
    if check is not None:
        check(where)
    return obj, where


def parse_config(text: str) -> RunConfig:
    """Parse TOML text into a fully validated ``RunConfig``."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"TOML syntax: {exc}", int(m.group(1)) if m else None) from None
    lines = _key_lines(text)
    cfg = RunConfig(lines=lines)
    for key, raw in doc.items():
        if key in _TABLES:
            obj, where = _build(_TABLES[key], raw, key, 0, lines)
            setattr(cfg, key, obj)
        elif key == "terrain":
            if not isinstance(raw, list) or not raw:
                raise ConfigError("terrain must be a non-empty array of tables",
                                  lines.get(("", 0, "terrain")) or lines.get(("terrain", 0, None)))
            cfg.terrain = [_build(TerrainSection, r, "terrain", i, lines)[0]
                           for i, r in enumerate(raw)]
        else:
            line = lines.get((key, 0, None)) or lines.get(("", 0, key))
            raise ConfigError(f"unknown key {key!r}", line)

    # the wheel is validated on use, so a design check can still report on
    # a geometry that violates the coupler constraints
    try:
        cfg.motor.motor()
    except MorphError as exc:
        raise ConfigError(f"[motor] {exc}", lines.get(("motor", 0, None))) from None
    for i, t in enumerate(cfg.terrain):
        try:
            t.segment()
        except MorphError as exc:
            raise ConfigError(f"[[terrain]] {exc}", lines.get(("terrain", i, None))) from None
    return cfg


def preset_names() -> list[str]:
    root = resources.files(PRESET_PACKAGE)
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def read_preset(name: str) -> str:
    res = resources.files(PRESET_PACKAGE) / f"{name}.toml"
    if not res.is_file():
        raise ConfigError(f"no preset named {name!r} (available: {', '.join(preset_names())})")
    return res.read_text(encoding="utf-8")


def load_config(source: str | Path) -> RunConfig:
    """Load a config from a file path, or from a bundled preset by name.

    Raises ``OSError`` if a path exists but cannot be read.
    """
    path = Path(source)
    if path.suffix == ".toml" or path.exists():
        text = path.read_text(encoding="utf-8")
    else:
        text = read_preset(str(source))
    return parse_config(text)
