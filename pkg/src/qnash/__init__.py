"""Query-efficient exact Nash equilibria of zero-sum matrix games."""
from .lifted import Exhausted, LiftedOracle, SubsetCodec, find_unique_nash
from .minimax import (
    EquilibriumCertificate,
    MixedStrategy,
    NegativeWeight,
    NotUnique,
    SingularSystem,
    brute_force_unique_nash,
    check_unique_psne_condition,
    solve_full_support_equilibrium,
    solve_value,
    verify_equilibrium,
)
from .oracle import MatrixInstance, OracleHandle, QueryLedger, read_matrix, write_matrix
from .psne import find_psne, sample_probe_set
from .swordfish import EmptyCandidates, swordfish

__all__ = [
    "EmptyCandidates",
    "EquilibriumCertificate",
    "Exhausted",
    "LiftedOracle",
    "MatrixInstance",
    "MixedStrategy",
    "NegativeWeight",
    "NotUnique",
    "OracleHandle",
    "QueryLedger",
    "SingularSystem",
    "SubsetCodec",
    "brute_force_unique_nash",
    "check_unique_psne_condition",
    "find_psne",
    "find_unique_nash",
    "read_matrix",
    "sample_probe_set",
    "solve_full_support_equilibrium",
    "solve_value",
    "swordfish",
    "verify_equilibrium",
    "write_matrix",
]
