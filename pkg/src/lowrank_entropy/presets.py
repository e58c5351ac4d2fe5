"""Named initial data used by the CLI, the experiments and the tests."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .pwlin import Interval, PiecewiseConstantFn, p0_cell_average


def bump(amplitude: float = 1.0) -> Callable:
    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.where((x > 0) & (x < 1), amplitude * np.sin(np.pi * x) ** 2, 0.0)
    return u0


@dataclass(frozen=True, eq=False)
class Preset:
    name: str
    u0: PiecewiseConstantFn
    T: float
    flux: str = "burgers"
    smooth: Optional[Callable] = None
    note: str = ""


def _make(name: str, smooth_cells: int = 256) -> Preset:
    if name == "zero":
        return Preset(name, PiecewiseConstantFn([], [0.0]), 0.5, note="no waves at all")
    if name == "stationary_shock":
        return Preset(name, PiecewiseConstantFn([0.0, 0.5, 1.0], [0.0, 1.0, -1.0, 0.0]), 0.4,
                      note="standing shock at 0.5 between two fans")
    if name == "merge_two_shocks":
        return Preset(name, PiecewiseConstantFn([0.0, 0.2, 0.4], [0.0, 2.0, 1.0, 0.0]), 0.25,
                      note="shocks from 0.2 and 0.4 merge at (0.5, 0.2)")
    if name == "shock_rarefaction":
        return Preset(name, PiecewiseConstantFn([0.2, 0.5, 0.7], [0.0, 1.0, -0.5, 0.0]), 0.4,
                      note="fans at 0.2 and 0.7 around a shock from 0.5")
    if name == "smooth_bump":
        f = bump(1.0)
        return Preset(name, p0_cell_average(f, Interval(0.0, 1.0), smooth_cells), 0.2, smooth=f,
                      note="sin^2 bump; characteristics first cross at t = 1/pi")
    raise KeyError(name)


PRESET_NAMES = ("zero", "stationary_shock", "merge_two_shocks", "shock_rarefaction", "smooth_bump")
SHOCK_PRESETS = ("stationary_shock", "merge_two_shocks", "shock_rarefaction")


def get_preset(name: str, **kw) -> Preset:
    try:
        return _make(name, **kw)
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
