"""mootlite: a compiler front-end for a small C-like generic language.

The language layers two constructs over a C subset: protocol/parameter type
declarations and a `+` qualifier marking declarations as compile-time
strengthenable. The compiler infers a static type-subsumption order as the
greatest type-simulation relation over the declared types, types each function
instantiation with a bidirectional antichain worklist over its syntax graph,
resolves overloading under strongest-call semantics, and emits monomorphized C.
"""

__version__ = "0.1.0"

from .diagnostics import CompileError, Diagnostic, InternalError, Span, Stage
from .universe import RelationLabel, TypeDesc, TypeKind, TypeRelation, TypeUniverse, build_universe
from .hierarchy import (
    CandidateSubsumption,
    CounterexamplePath,
    SubsumptionOrder,
    check_subsumption,
    greatest_fixed_point,
    initial_approximation,
    sigma_simulates,
)
from .antichains import Antichain, downward_closure, join, leq, restrict_maximal
from .typeflow import (
    FlowMemo,
    MatchRelation,
    SyntaxGraph,
    classify_typing,
    flow_naive,
    flow_symbolic,
    run_typing,
    validate_cross_closed,
)
from .parser import parse
from .expand import expand_param_typedefs
from .calls import derive_call_relations
from .driver import DriverConfig, compile_source, compile_file

__all__ = [
    "__version__",
    "Antichain",
    "CandidateSubsumption",
    "CompileError",
    "CounterexamplePath",
    "Diagnostic",
    "DriverConfig",
    "FlowMemo",
    "InternalError",
    "MatchRelation",
    "RelationLabel",
    "Span",
    "Stage",
    "SubsumptionOrder",
    "SyntaxGraph",
    "TypeDesc",
    "TypeKind",
    "TypeRelation",
    "TypeUniverse",
    "build_universe",
    "check_subsumption",
    "classify_typing",
    "compile_file",
    "compile_source",
    "derive_call_relations",
    "downward_closure",
    "expand_param_typedefs",
    "flow_naive",
    "flow_symbolic",
    "greatest_fixed_point",
    "initial_approximation",
    "join",
    "leq",
    "parse",
    "restrict_maximal",
    "run_typing",
    "sigma_simulates",
    "validate_cross_closed",
]
