"""Maximum base-pairing RNA folding with Four-Russians speedups, plus packed CNF recognition."""
from .cfl import CnfGrammar, parse_grammar, recognize_naive, recognize_packed
from .fr import fold_fr, precompute_central, reconstruct_m, traceback_fr
from .fr2 import fold_fr2, precompute_updation
from .model import (
    CounterSet,
    FoldResult,
    InputError,
    PairingRule,
    RnaSequence,
    SecondaryStructure,
    TableFault,
    validate_structure,
)
from .oracle import dp_table, enumerate_optimal_count, fold_oracle

__all__ = [
    "CnfGrammar", "CounterSet", "FoldResult", "InputError", "PairingRule", "RnaSequence",
    "SecondaryStructure", "TableFault", "dp_table", "enumerate_optimal_count", "fold_fr",
    "fold_fr2", "fold_oracle", "parse_grammar", "precompute_central", "precompute_updation",
    "recognize_naive", "recognize_packed", "reconstruct_m", "traceback_fr", "validate_structure",
]
