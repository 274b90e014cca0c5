"""Graded relational structures over finite residuated chains.

Provides the truth-value chains, a graded first-order evaluator, finite
structures with embedding and isomorphism machinery, four built-in
structure classes with hereditary/joint-embedding/amalgamation checks,
amalgamation constructions with a stage-wise limit builder, and the
deterministic random weighted graph with its witness verifier.
"""

from .algebra import (
    Chain,
    boolean_chain,
    make_from_table,
    make_godel,
    make_lukasiewicz,
    resolve_chain,
)
from .classes import (
    ClassSpec,
    check_ap,
    check_hp,
    check_jep,
    enumerate_class,
    get_class,
    k0_member,
    k1_member,
    k2_member,
    k3_member,
)
from .errors import (
    AmalgamationError,
    BudgetError,
    ChainTableError,
    FileFormatError,
    FormulaParseError,
    GradedModelError,
    NotAChainError,
)
from .fraisse import (
    VFormation,
    amalgamate_k1,
    amalgamate_k2,
    amalgamate_k3,
    back_and_forth_isomorphism,
    build_limit,
    check_extension_property,
    check_homogeneity,
    check_random_graph_property,
    jep_union,
    k0_jep,
    random_weighted_graph,
    replay_transcript,
)
from .logic import SIG_LT, Signature, evaluate, format_formula, parse_formula
from .structure import (
    GradedStructure,
    Morphism,
    age,
    binary_structure,
    canonical_form,
    find_embeddings,
    free_union,
    generated_substructure,
    is_embedding,
    is_isomorphic,
    is_substructure,
    make_structure,
    structure_from_text,
    structure_to_text,
    union_of_chain,
)

__version__ = "0.1.0"
