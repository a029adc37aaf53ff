"""Exact gonality invariants of polarized classes on Enriques and K3 lattices."""
from .enumeration import (
    FiberQuery,
    FiberResult,
    box_oracle,
    certified_box,
    certified_cap,
    fiber_classes,
    min_fiber,
)
from .errors import GonlatError
from .invariants import (
    InvariantReport,
    dm_min,
    full_report,
    gengon_report,
    hodge_floor,
    k3_report,
    mu,
    phi,
)
from .lattice import (
    Lattice,
    LatticeVector,
    PolarizedClass,
    direct_sum,
    halve,
    is_two_divisible,
    load_lattice,
    make_lattice,
    polarize,
    preset,
    primitivity,
    pullback,
    pushforward,
    rescale,
)
from .verification import SuiteConfig, run_suite, survey


def __getattr__(name):
    # scikit-learn is slow to import; load the adapter on first use
    if name == "GonalityTransformer":
        from .estimator import GonalityTransformer
        return GonalityTransformer
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")

__all__ = [
    "FiberQuery", "FiberResult", "box_oracle", "certified_box", "certified_cap",
    "fiber_classes", "min_fiber", "GonlatError", "GonalityTransformer", "InvariantReport",
    "dm_min", "full_report", "gengon_report", "hodge_floor", "k3_report", "mu", "phi",
    "Lattice", "LatticeVector", "PolarizedClass", "direct_sum", "halve",
    "is_two_divisible", "load_lattice", "make_lattice", "polarize", "preset",
    "primitivity", "pullback", "pushforward", "rescale", "SuiteConfig", "run_suite",
    "survey",
]
