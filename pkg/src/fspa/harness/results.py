"""Scenario result tables and their on-disk form (CSV + JSON sidecar)."""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__


def format_value(v) -> str:
    """Fixed formatting: 12 significant digits for reals, lowercase booleans."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


@dataclass
class ScenarioResult:
    scenario: str
    config: dict
    columns: tuple[str, ...]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)
    caveats: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        if not self.rows:
            raise ValueError(f"{self.scenario}: empty result table")
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"{self.scenario}: row {i} has {len(row)} values for {len(self.columns)} columns")
            for name, v in zip(self.columns, row):
                if isinstance(v, (float, np.floating)) and not math.isfinite(v):
                    raise ValueError(f"{self.scenario}: non-finite {name} in row {i}")

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows])

    def where(self, **match) -> list[dict]:
        idx = {k: self.columns.index(k) for k in match}
        out = []
        for row in self.rows:
            if all(row[idx[k]] == v for k, v in match.items()):
                out.append(dict(zip(self.columns, row)))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format_value(v) for v in row) + "\n")
        return buf.getvalue()

    def metadata(self) -> dict:
        return _jsonable(
            {
                "scenario": self.scenario,
                "package_version": __version__,
                "numpy_version": np.__version__,
                "config": self.config,
                "columns": list(self.columns),
                "n_rows": len(self.rows),
                "summary": self.summary,
                "caveats": self.caveats,
            }
        )

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{self.scenario}.csv"
        meta_path = out / f"{self.scenario}.meta.json"
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        meta_path.write_text(json.dumps(self.metadata(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return csv_path, meta_path

