"""Branch-and-bound solvers with approximation-scheme guarantees.

Four solver families over exact rational arithmetic:

* multi-knapsack with a surrogate-relaxation bound and Dantzig rounding,
  stopping at a target ratio alpha (``knapsack``);
* unrelated parallel machines with a parametric LP bound found by binary
  search, stopping at ratio 1+eps (``scheduling``);
* uniform machines with similarity-pruned profiles (``profiles``);
* identical machines with equivalence-pruned profiles (``profiles``).

Plus instance generation and file I/O (``instances``), exact oracles
(``oracle``), the generic search engine (``engine``), an exact LP vertex
solver (``lp``) and the experiment harness (``experiments``/``cli``).
"""
from .engine import Criterion, RunResult, Selection, Strategy, run
from .instances import (
    IDENTICAL,
    KNAPSACK,
    UNIFORM,
    UNRELATED,
    KnapsackInstance,
    SchedulingInstance,
    generate,
    load_instance,
    save_instance,
)
from .kernel import KERNEL
from .knapsack import KnapsackAdapter, dantzig_solve
from .oracle import exact_opt, optimality_gap
from .profiles import solve_identical, solve_uniform
from .rational import Rat, rat
from .scheduling import UnrelatedAdapter, min_feasible_T, solve_unrelated

__version__ = "0.1.0"

__all__ = [
    "Criterion",
    "RunResult",
    "Selection",
    "Strategy",
    "run",
    "KNAPSACK",
    "UNRELATED",
    "UNIFORM",
    "IDENTICAL",
    "KnapsackInstance",
    "SchedulingInstance",
    "generate",
    "load_instance",
    "save_instance",
    "KERNEL",
    "KnapsackAdapter",
    "dantzig_solve",
    "exact_opt",
    "optimality_gap",
    "solve_identical",
    "solve_uniform",
    "Rat",
    "rat",
    "UnrelatedAdapter",
    "min_feasible_T",
    "solve_unrelated",
    "__version__",
]
