"""Matrix product ansatz: word algebra, truncated representation and spectral checks."""

from .checks import (check_gz, check_telescoping, check_zf, hat_vector, mutation_suite,
                     spectral_vector)
from .representation import (TruncatedRep, build_truncated_rep, convergence_ratios,
                             dissep_evaluate, dissep_ma_steady, dissep_ma_weights,
                             dissep_Z_series, evaluate_converged)
from .tasep import (partition_polynomial, tasep_evaluate, tasep_ma_steady, tasep_reduce,
                    weight_polynomial)
from .words import AlgebraWord, ReductionSystem, dissep_system, parse_word, tasep_system

__all__ = [
    "AlgebraWord", "ReductionSystem", "tasep_system", "dissep_system", "parse_word",
    "tasep_reduce", "tasep_evaluate", "weight_polynomial", "partition_polynomial", "tasep_ma_steady",
    "TruncatedRep", "build_truncated_rep", "dissep_evaluate", "evaluate_converged",
    "dissep_ma_weights", "dissep_ma_steady", "dissep_Z_series", "convergence_ratios",
    "spectral_vector", "check_zf", "check_gz", "check_telescoping", "hat_vector", "mutation_suite",
]
