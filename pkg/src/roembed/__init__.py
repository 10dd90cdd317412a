"""Read-once formula canonicalization and two-party disjointness embeddings.

The library parses read-once AND/OR/NOT formulas, reduces them to their
unique alternating AND-OR trees, expands variables into per-party gadgets,
and constructs machine-checked certificates embedding Disjointness or
Non-Disjointness instances into the resulting two-party functions, together
with the communication lower bounds those embeddings imply.
"""

from .errors import (
    DegenerateConstant,
    FormulaSyntaxError,
    LengthMismatch,
    MalformedCertificate,
    MissingVariable,
    PreconditionFailed,
    ReadOnceViolation,
    RoembedError,
    SizeLimitExceeded,
    VerificationFailed,
)
from .extractor import (
    ExtractionResult,
    TheoremReport,
    expose_leaf,
    extract,
    force_const,
    lemma_pipeline,
    s_count,
    theorem_pipeline,
    uniform_leaf_parent_kind,
)
from .formula import (
    AND,
    OR,
    CanonicalTree,
    Formula,
    canonicalize,
    evaluate,
    from_json,
    leaf_levels,
    parse,
    restrict,
    to_dot,
    to_json,
    to_text,
    validate_canonical,
)
from .oracle import SearchConfig, best_projection_embedding, equiv_check, log_rank
from .two_party import (
    ALICE,
    BOB,
    DISJ,
    NDISJ,
    Copy,
    Counterexample,
    EmbeddingCertificate,
    Fixed,
    GadgetTree,
    apply_embedding,
    cert_from_json,
    cert_to_json,
    disj,
    eval_gadget,
    gadget_expand,
    ndisj,
    truth_table,
    validate_gadget,
    verify_embedding,
)
from .cli import GenSpec, generate_formula

__version__ = "0.1.0"
