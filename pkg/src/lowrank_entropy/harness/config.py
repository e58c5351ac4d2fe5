"""Experiment configuration: JSON file, preset name, command-line overrides."""
from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from ..flux import ConvexFlux, make_flux
from ..presets import get_preset
from ..pwlin import PiecewiseConstantFn

OUT_ENV = "LOWRANK_ENTROPY_OUT"


@dataclass
class ExperimentConfig:
    preset: Optional[str] = "merge_two_shocks"
    flux: object = "burgers"
    u0: Optional[dict] = None  # {"breakpoints": [...], "values": [...]}
    T: Optional[float] = None
    K_list: list = field(default_factory=lambda: [16, 32, 64, 128, 256])
    audit_K: list = field(default_factory=lambda: [4, 8, 16])
    timing_K: list = field(default_factory=lambda: [128, 256])
    classical_K: list = field(default_factory=lambda: [16, 32, 64, 128])
    n_table: int = 512
    n_quad: int = 512
    lrnr_max_K: int = 64
    slope_max: float = -0.8
    budget_factor: float = 10.0
    seed: int = 0
    out_dir: str = "out"

    def __post_init__(self):
        for name in ("K_list", "audit_K", "timing_K", "classical_K"):
            setattr(self, name, sorted(int(k) for k in getattr(self, name)))
        env = os.environ.get(OUT_ENV)
        if env:
            self.out_dir = env

    # -- resolution -------------------------------------------------------
    def resolve(self):
        """(u0, flux, T, smooth initial function or None)."""
        flux: ConvexFlux = make_flux(self.flux)
        smooth = None
        if self.u0 is not None:
            u0 = PiecewiseConstantFn(self.u0["breakpoints"], self.u0["values"])
            T = self.T
            if T is None:
                raise ValueError("T is required with explicit u0 data")
        else:
            p = get_preset(self.preset)
            u0, smooth = p.u0, p.smooth
            T = p.T if self.T is None else self.T
        return u0, flux, float(T), smooth

    def to_json(self) -> dict:
        return asdict(self)


def load_config(path: Optional[str] = None, **overrides) -> ExperimentConfig:
    data = {}
    if path:
        with open(path) as fh:
            data = json.load(fh)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    data.update({k: v for k, v in overrides.items() if v is not None})
    if data.get("u0") is not None and "preset" not in overrides:
        data.setdefault("preset", None)
    return ExperimentConfig(**data)
