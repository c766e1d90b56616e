"""Experiment configuration, loadable from TOML."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import tomli

from ..exact import IntegratorConfig
from ..functionals import FaceFunctional
from ..geometry import ConvexPolytope
from ..measures import HyperplaneMeasureSpec


@dataclass
class ExperimentConfig:
    name: str
    dimension: int = 2
    measure: dict = field(default_factory=lambda: {"kind": "isotropic"})
    window: dict = field(default_factory=lambda: {"kind": "box", "size": 1.0})
    functional: dict = field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    t: float = 1.0
    s0: float = 0.5
    checkpoints: list = field(default_factory=list)
    R_list: list = field(default_factory=list)
    replications: int = 10_000
    seed: int = 1
    alpha: float = 0.01
    integrator: dict = field(default_factory=dict)
    output: Optional[str] = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("replications must be at least 2")
        if any(b <= a for a, b in zip(self.R_list, self.R_list[1:])):
            raise ValueError("R list must be ascending")
        if self.s0 < 0:
            raise ValueError("s0 must be nonnegative")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            return cls.from_dict(tomli.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def with_updates(self, **changes) -> "ExperimentConfig":
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig.from_dict(data)

    def make_spec(self) -> HyperplaneMeasureSpec:
        return make_spec(self.measure, self.dimension)

    def make_window(self) -> ConvexPolytope:
        return make_window(self.window, self.dimension)

    def make_functional(self) -> FaceFunctional:
        return make_functional(self.functional)

    def make_integrator(self) -> IntegratorConfig:
        return IntegratorConfig(**self.integrator)


def make_spec(measure: dict, dimension: int) -> HyperplaneMeasureSpec:
    data = {"dimension": dimension, **measure}
    return HyperplaneMeasureSpec.from_dict(data)


def make_window(window: dict, dimension: int) -> ConvexPolytope:
    kind = window.get("kind", "box")
    size = float(window.get("size", 1.0))
    if kind == "box":
        return ConvexPolytope.cube(dimension, size)
    if kind == "ball":
        if dimension == 2:
            return ConvexPolytope.disk(size, int(window.get("resolution", 256)))
        if dimension == 3:
            return ConvexPolytope.ball(size, int(window.get("resolution", 3)))
    raise ValueError(f"unsupported window {window!r} in dimension {dimension}")


def make_functional(functional: dict) -> FaceFunctional:
    kind = functional.get("kind", "constant")
    if kind == "constant":
        return FaceFunctional.constant(float(functional.get("value", 1.0)))
    if kind == "indicator":
        return FaceFunctional.indicator(functional["directions"])
    if kind == "tabulated":
        return FaceFunctional.tabulated(functional["directions"], functional["values"])
    raise ValueError(f"unknown functional kind {kind!r}")
