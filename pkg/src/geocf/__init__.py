"""Exact simultaneous rational approximation via a parametric reduction sweep.

The static quadratic-form layer lives in `qform`, the affine-in-t sweep
machinery in `tform`, the event-loop driver in `geodesic`, brute-force
ground truth in `oracle`, and the command line in `cli`.
"""

from .geodesic import (
    Convergent,
    Event,
    RunConfig,
    Trace,
    certify_excellent,
    convergents,
    rank_probe,
    run,
    step,
    verify_trace,
)
from .qform import (
    FormMatrix,
    Minors,
    RecursiveForm,
    ReductionResult,
    apply_shift,
    apply_swap,
    evaluate,
    form_from_matrix,
    is_lll_reduced,
    lll_reduce,
    minkowski_reduced_small,
    minors,
    recursive_form,
)
from .tform import (
    AffineInT,
    DetState,
    ParamSetup,
    TPoly,
    conditions,
    critical_t,
    eval_at,
    init_state,
    make_setup,
    recompute_state,
    shift_update,
    sign_below,
    swap_update,
    tpoly_exact_div,
)

__all__ = [name for name in dir() if not name.startswith("_")]
