"""genuskit: exact localization and genus bookkeeping for T-local groups.

The package computes with groups that live over a set of primes T: it
splits them along block families into local pieces, glues twisted pieces
back together as pullbacks, and decides boundedness, finite generation,
and genus questions with constructive witnesses throughout.
"""

from .abmod import (
    FGModule,
    FractureSquare,
    GenusWitness,
    ModuleMap,
    PullbackData,
    build_fracture,
    genus_witness,
    identity_map,
    is_bounded_above_matrix,
    is_bounded_matrix,
    is_localization,
    mediate,
    mixed_kernel,
    pullback,
    torsion_check,
    xpart,
)
from .dsl import ModPull, ParseError, ElaborateError, parse, parse_values, print_value, read_value
from .errors import DomainError, FamilyError, GenusKitError, VerificationError
from .heis import (
    HeisElement,
    HeisSubgroup,
    commutator,
    localize_subgroup,
    lower_central_series,
    minimal_power_into,
    power_closure_check,
)
from .primeset import (
    ALL_PRIMES,
    EMPTY_SET,
    PartitionFamily,
    PrimeSet,
    XNumber,
    is_prime,
    make_family,
)
from .rank1 import (
    AutFamily1,
    ConstantRational,
    Identity,
    IndexPrimePower,
    double_coset_class,
    is_bounded,
    is_bounded_above,
    is_finitely_generated,
    make_aut,
    pullback_rank1,
    rank1_iso,
    verify_localization_properties,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_PRIMES",
    "AutFamily1",
    "ConstantRational",
    "DomainError",
    "ElaborateError",
    "EMPTY_SET",
    "FamilyError",
    "FGModule",
    "FractureSquare",
    "GenusKitError",
    "GenusWitness",
    "HeisElement",
    "HeisSubgroup",
    "Identity",
    "IndexPrimePower",
    "ModPull",
    "ModuleMap",
    "ParseError",
    "PartitionFamily",
    "PrimeSet",
    "PullbackData",
    "VerificationError",
    "XNumber",
    "build_fracture",
    "commutator",
    "double_coset_class",
    "genus_witness",
    "identity_map",
    "is_bounded",
    "is_bounded_above",
    "is_bounded_above_matrix",
    "is_bounded_matrix",
    "is_finitely_generated",
    "is_localization",
    "is_prime",
    "localize_subgroup",
    "lower_central_series",
    "make_aut",
    "make_family",
    "mediate",
    "minimal_power_into",
    "mixed_kernel",
    "parse",
    "parse_values",
    "power_closure_check",
    "print_value",
    "pullback",
    "pullback_rank1",
    "rank1_iso",
    "read_value",
    "torsion_check",
    "verify_localization_properties",
    "xpart",
]
