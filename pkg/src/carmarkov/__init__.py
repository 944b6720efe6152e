"""Entropy, Markov and separability checks for finite fermionic (CAR) systems."""

__version__ = "0.1.0"

from .car import (  # noqa: E402
    FockRep,
    Region,
    Subalgebra,
    build_fock,
    regional_subalgebra,
    twisted_subalgebra,
)
from .entropy import (  # noqa: E402
    EntropyReport,
    additivity_residual,
    entropy_hat,
    entropy_vn,
    relative_entropy,
    ssa_residual,
)
from .markov import (  # noqa: E402
    MarkovReport,
    PetzPair,
    block_markov_state,
    counterexample,
    hopping_operator,
    markov_report,
    petz_maps,
)
from .separability import (  # noqa: E402
    SeparabilityCertificate,
    certify,
    hopping_witness,
    jw_twist_image,
    ppt_min_eigenvalue,
    product_check,
    verify_decomposition,
)
from .states import (  # noqa: E402
    StateDensity,
    Triple,
    commuting_square_check,
    product_extension,
    random_state,
    regional_triple,
    restrict,
    twisted_triple,
)

__all__ = [
    "__version__",
    "FockRep",
    "Region",
    "Subalgebra",
    "build_fock",
    "regional_subalgebra",
    "twisted_subalgebra",
    "EntropyReport",
    "additivity_residual",
    "entropy_hat",
    "entropy_vn",
    "relative_entropy",
    "ssa_residual",
    "MarkovReport",
    "PetzPair",
    "block_markov_state",
    "counterexample",
    "hopping_operator",
    "markov_report",
    "petz_maps",
    "SeparabilityCertificate",
    "certify",
    "hopping_witness",
    "jw_twist_image",
    "ppt_min_eigenvalue",
    "product_check",
    "verify_decomposition",
    "StateDensity",
    "Triple",
    "commuting_square_check",
    "product_extension",
    "random_state",
    "regional_triple",
    "restrict",
    "twisted_triple",
]
