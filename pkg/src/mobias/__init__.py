"""Structural-bias detection for multi-objective optimisers.

The toolkit runs optimisers on position-blind bi-objective test
problems (the objective values ignore the decision vector entirely),
then analyses where in the decision space the search concentrated.
On such problems any deviation of the visited points from uniformity
is a property of the algorithm, not the landscape.
"""

from .problems import (
    PROBLEM_IDS,
    Family,
    ObjectivePair,
    ProblemSpec,
    Variant,
    estimate_pf_count,
    evaluate,
    evaluate_batch,
    get_problem,
    pearson_rho,
    reference_front,
)
from .rng import RngStream, stable_hash64

__version__ = "0.1.0"
