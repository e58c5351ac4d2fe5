"""Low-rank ReLU network representations of scalar conservation law solutions."""
from .characteristics import build_shock_table, entropy_eval, extend_initial, relief_eval
from .classical import build_classical_lrnr
from .entropy import EntropyBuildConfig, build, build_5layer_lrnr, hbar_eval, march_eval
from .errors import LowRankEntropyError
from .flux import ConvexFlux, burgers, make_flux
from .oracle import LaxOleinikOracle
from .pwlin import Interval, PiecewiseConstantFn, PiecewiseLinearFn

__all__ = [
    "build_shock_table", "entropy_eval", "extend_initial", "relief_eval", "build_classical_lrnr",
    "EntropyBuildConfig", "build", "build_5layer_lrnr", "hbar_eval", "march_eval",
    "LowRankEntropyError", "ConvexFlux", "burgers", "make_flux", "LaxOleinikOracle",
    "Interval", "PiecewiseConstantFn", "PiecewiseLinearFn",
]
__version__ = "0.1.0"
