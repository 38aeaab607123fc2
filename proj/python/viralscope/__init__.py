"""Python access to the viralscope core."""

from ._viralscope import (  # noqa: F401
    InputError,
    NumericalError,
    __version__,
    bisect,
    group_lasso,
    krippendorff_alpha,
    log_likelihood,
    run_stage,
    solve_virality,
    tokenize,
)
