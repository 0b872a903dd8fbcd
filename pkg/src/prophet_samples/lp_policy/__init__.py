"""Policy synthesis by linear programming."""
from .policy import (
    MultisetState,
    RandomizedPolicy,
    all_states,
    attach_tail_rule,
    multiset_orderings,
    support_of,
    uniform_policy,
    without,
)
from .program import FEAS_TOL, OBJ_TOL, LinearProgram, LpSolution, LpStatus, dump_lp, load_lp, solve_lp
from .programs import (
    build_folp,
    build_program,
    build_pslp,
    build_rfolp,
    build_rpslp,
    count_states,
    extract_policy,
)
