"""Sign-rank dimension estimates and opinion embeddings for comment vote matrices."""

from ._signdim import (
    Embedding,
    SigndimError,
    SignMatrix,
    agreement,
    analyze,
    dimension,
    fit,
    generate_synthetic,
    is_rank_one,
    leave_one_out,
    lexical_similarity,
    search_witness,
    smt_constraints,
    tokenize,
    upper_bound,
    validates,
)

__all__ = [
    "Embedding",
    "SigndimError",
    "SignMatrix",
    "agreement",
    "analyze",
    "dimension",
    "fit",
    "generate_synthetic",
    "is_rank_one",
    "leave_one_out",
    "lexical_similarity",
    "search_witness",
    "smt_constraints",
    "tokenize",
    "upper_bound",
    "validates",
]
