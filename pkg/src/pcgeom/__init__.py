"""Chart-based tensor calculus for almost (para)contact metric manifolds and their cones."""

from .cone import ConeManifold, build_cone
from .examples import EXAMPLES, load_builtin, pullback
from .expr import Expression, parse
from .geometry import ChartManifold
from .identities import run_identities
from .specfile import dumps, load, loads
from .structure import AxiomError, PCStructure, classify

__version__ = "0.1.0"

__all__ = [
    "AxiomError",
    "ChartManifold",
    "ConeManifold",
    "EXAMPLES",
    "Expression",
    "PCStructure",
    "build_cone",
    "classify",
    "dumps",
    "load",
    "load_builtin",
    "loads",
    "parse",
    "pullback",
    "run_identities",
]
