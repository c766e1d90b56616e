"""Experiment results with a versioned JSON layout and CSV sample dumps."""
from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1

_OPS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


def check(value: float, op: str, threshold: float, role: str = "criterion", **extra) -> dict:
    """A pass/fail record that can be re-derived from ``value op threshold``."""
    return {"value": float(value), "op": op, "threshold": float(threshold),
            "passed": bool(_OPS[op](value, threshold)), "role": role, **extra}


def reference(value: float, error: float, provenance: str) -> dict:
    return {"value": float(value), "error": float(error), "provenance": provenance}


@dataclass
class ExperimentResult:
    name: str
    config: dict
    statistics: dict = field(default_factory=dict)
    tests: dict = field(default_factory=dict)
    references: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    seed: int = 0
    wall_clock_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(t["passed"] for t in self.tests.values() if t.get("role") == "criterion")

    def recheck(self) -> dict:
        """Pass flags recomputed from the stored values and thresholds."""
        return {k: bool(_OPS[t["op"]](t["value"], t["threshold"])) for k, t in self.tests.items()}

    def to_dict(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "name": self.name, "seed": self.seed,
                "config": self.config, "statistics": _plain(self.statistics),
                "tests": _plain(self.tests), "references": _plain(self.references),
                "metadata": _plain(self.metadata), "passed": self.passed,
                "wall_clock_seconds": self.wall_clock_seconds}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, out_dir, dump_samples: bool = True) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.name}.json"
        path.write_text(self.to_json())
        if dump_samples:
            for key, arr in self.samples.items():
                arr = np.atleast_2d(np.asarray(arr, dtype=float).T).T
                np.savetxt(out / f"{self.name}__{key}.csv", arr, delimiter=",", fmt="%.17g")
        return path


def load_result(path) -> dict:
    data = json.loads(Path(path).read_text())
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("unsupported result schema version")
    return data


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def numeric_diff(a, b, skip=("wall_clock_seconds",), path="") -> list:
    """Paths at which two JSON trees differ beyond 1e-9 relative."""
    out = []
    if isinstance(a, dict) and isinstance(b, dict):
        for k in sorted(set(a) | set(b)):
            if k in skip:
                continue
            if k not in a or k not in b:
                out.append(f"{path}/{k}")
            else:
                out += numeric_diff(a[k], b[k], skip, f"{path}/{k}")
    elif isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [path]
        for i, (x, y) in enumerate(zip(a, b)):
            out += numeric_diff(x, y, skip, f"{path}[{i}]")
    elif isinstance(a, (int, float)) and isinstance(b, (int, float)) and not isinstance(a, bool):
        if abs(a - b) > 1e-9 * max(abs(a), abs(b), 1e-300) and a != b:
            out.append(path)
    elif a != b:
        out.append(path)
    return out
