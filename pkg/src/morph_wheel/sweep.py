"""Tabular results shared by the sweeps and the report writers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence


@dataclass(frozen=True)
class Column:
    name: str  # unit-suffixed, e.g. ``tau_in_Nmm``
    unit: str


@dataclass
class SweepResult:
    """Rectangular table with an ordered, unit-annotated schema."""

    columns: tuple[Column, ...]
    rows: list[tuple]
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        width = len(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} values, schema has {width}")

    @classmethod
    def from_columns(cls, schema: Sequence[tuple[str, str]], data: Sequence[Sequence],
                     **meta) -> "SweepResult":
        """Build from column-major data (one sequence per schema entry)."""
        cols = tuple(Column(n, u) for n, u in schema)
        if len(data) != len(cols):
            raise ValueError("data does not match the schema")
        rows = [tuple(_plain(v) for v in r) for r in zip(*data)]
        return cls(cols, rows, dict(meta))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> list:
        k = self.names.index(name)
        return [r[k] for r in self.rows]

    def __len__(self):
        return len(self.rows)


def _plain(v):
    """numpy scalars to builtins, so output formatting is stable."""
    if hasattr(v, "item"):
        return v.item()
    return v
