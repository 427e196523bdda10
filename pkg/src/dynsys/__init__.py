"""Dynamic integer systems: definition language, iteration, reverse trees, reductions and convergence criteria."""
from .builtins import NAMES as BUILTIN_NAMES, builtin
from .canonical import ahu_encode, tree_form
from .criteria import (
    CriterionReport,
    check_c1_isomorphic,
    check_c2_coverage,
    check_c3_self_similar,
    check_c4_eta,
    check_c5_branch_peel,
    check_c6_descent,
)
from .expr import ParseError
from .funcgraph import Boundary, FuncGraph, from_system, replay, strip_labels
from .reverse import Caps, build_reverse_tree, coverage_check, eta_profile, predecessors
from .sweep import SweepReport, sweep
from .sysdef import DomainError, SystemDef, admits, eval_forward, parse_system_def, to_dsl
from .trajectory import Limits, Root, TrajectoryRecord, classify_root, descent_check, trace

__version__ = "0.1.0"
