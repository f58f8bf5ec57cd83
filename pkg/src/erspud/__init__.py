"""Exact recovery of sparsely used dictionaries via pairwise l1 programs.

Given ``Y = A X`` with ``A`` square and invertible and ``X`` sparse, every
pair of columns of ``Y`` defines a linear program whose solution is, under
suitable conditions on ``X``, a scaled row of ``X``. A greedy pass over the
candidates then rebuilds ``X`` and ``A`` up to row permutation and scaling.
"""

__version__ = "0.1.0"

from .l1lp import LpError, LpSolution, LpStatus, oracle_vertex_enum, solve_l1
from .metrics import MatchResult, dictionary_error, match_rows_up_to_scale
from .models import DictionarySpec, ModelSpec, gen_coefficients, gen_dictionary, instance, observe
from .recovery import PairingMode, RecoveryResult, RecoveryStatus, greedy_reconstruct, recover, run_erspud

__all__ = [
    "DictionarySpec",
    "LpError",
    "LpSolution",
    "LpStatus",
    "MatchResult",
    "ModelSpec",
    "PairingMode",
    "RecoveryResult",
    "RecoveryStatus",
    "dictionary_error",
    "gen_coefficients",
    "gen_dictionary",
    "greedy_reconstruct",
    "instance",
    "match_rows_up_to_scale",
    "observe",
    "oracle_vertex_enum",
    "recover",
    "run_erspud",
    "solve_l1",
]
