"""cohft: an exact-rational workbench for psi-class correlator calculus,
Koszul bracket hierarchies, and the Givental action on topological field
theories over finite dimensional graded algebras."""

__version__ = "0.1.0"

from .algebra import (
    ConstraintViolation,
    DimensionMismatch,
    GradedAlgebra,
    GradedVectorSpace,
    LinOp,
    PreconditionViolation,
    linop,
    make_algebra,
    zero_op,
)
from .correlators import CorrelatorCache, genus0, genus1
from .koszul import bracket, bracket_explicit, min_order
from .givental import (
    CorrelatorFamily,
    GiventalSeries,
    group_action_exp,
    infinitesimal_action,
    stabilizes_genus0,
    stabilizes_genus01,
    theorem_crosscheck,
)
from .hodge import (
    DeformationRetract,
    GaugeSeries,
    GaugeViolation,
    gauge_check,
    hodge_vanishing_check,
    homology_retract,
    induced_cohft,
    is_multicomplex,
    transfer_sum,
)
from . import catalog

__all__ = [
    "ConstraintViolation",
    "CorrelatorCache",
    "CorrelatorFamily",
    "DeformationRetract",
    "DimensionMismatch",
    "GaugeSeries",
    "GaugeViolation",
    "GiventalSeries",
    "GradedAlgebra",
    "GradedVectorSpace",
    "LinOp",
    "PreconditionViolation",
    "bracket",
    "bracket_explicit",
    "catalog",
    "gauge_check",
    "genus0",
    "genus1",
    "group_action_exp",
    "hodge_vanishing_check",
    "homology_retract",
    "induced_cohft",
    "infinitesimal_action",
    "is_multicomplex",
    "linop",
    "make_algebra",
    "min_order",
    "stabilizes_genus0",
    "stabilizes_genus01",
    "theorem_crosscheck",
    "transfer_sum",
    "zero_op",
]
