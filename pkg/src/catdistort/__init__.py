"""Presentations of negatively curved 2-complex groups, with machine
verification of their combinatorial curvature certificates and exact
computation of iterated-exponential subgroup distortion.

Layers, bottom up:

- :mod:`catdistort.words` -- signed-alphabet words, free reduction, the
  square-length positive word with unique two-letter subwords.
- :mod:`catdistort.folding` -- Stallings graphs, folding, membership,
  injectivity certificates and preimage rewriting.
- :mod:`catdistort.presentations` -- the three presentation families
  (building blocks, chains, the double extension) and their serialization.
- :mod:`catdistort.linkgeom` -- right-angled-pentagon cell decompositions,
  vertex links, girth and separation checks.
- :mod:`catdistort.navigator` -- the word problem via pinch reduction,
  rewriting into the distorted free subgroup, Cayley-ball enumeration.
- :mod:`catdistort.distortion` -- witness families and the symbolic
  length calculus (exact big integers and lazy exponential towers).
- :mod:`catdistort.cli` -- batch front end.
"""

from .words import (
    Alphabet,
    Gen,
    PairReport,
    alphabet_of,
    check_pair_uniqueness,
    chop,
    free_reduce,
    invert,
    is_positive,
    is_reduced,
    sigma,
)
from .folding import (
    InjectivityCertificate,
    PositiveEndomorphism,
    StallingsGraph,
    certify_injective,
    fold,
    membership,
    rank,
    rewrite_preimage,
    rose_from_words,
)
from .presentations import (
    BlockParams,
    GroupSpec,
    Relator,
    build_block,
    build_chain,
    build_double,
    free_group,
    spec_from_json,
    spec_to_json,
    verify_retraction,
)
from .linkgeom import (
    CellDecomposition,
    GirthReport,
    GluingReport,
    LinkGraph,
    SeparationReport,
    build_link,
    check_chain_gluing,
    check_large_link,
    check_separation,
    decompose_cell,
)
from .navigator import (
    BallRecord,
    ReductionTrace,
    ball,
    britton_reduce,
    equal,
    is_trivial,
    measure_distortion,
    to_base,
)
from .distortion import (
    DistortionCurve,
    Exact,
    LengthExpr,
    Tower,
    expand_length,
    expr_cmp,
    lower_bound_curve,
    normalize,
    upper_bound_audit,
    witness_block,
    witness_chain,
    witness_tower,
)

__all__ = [
    "Alphabet",
    "Gen",
    "PairReport",
    "alphabet_of",
    "check_pair_uniqueness",
    "chop",
    "free_reduce",
    "invert",
    "is_positive",
    "is_reduced",
    "sigma",
    "InjectivityCertificate",
    "PositiveEndomorphism",
    "StallingsGraph",
    "certify_injective",
    "fold",
    "membership",
    "rank",
    "rewrite_preimage",
    "rose_from_words",
    "BlockParams",
    "GroupSpec",
    "Relator",
    "build_block",
    "build_chain",
    "build_double",
    "free_group",
    "spec_from_json",
    "spec_to_json",
    "verify_retraction",
    "CellDecomposition",
    "GirthReport",
    "GluingReport",
    "LinkGraph",
    "SeparationReport",
    "build_link",
    "check_chain_gluing",
    "check_large_link",
    "check_separation",
    "decompose_cell",
    "BallRecord",
    "ReductionTrace",
    "ball",
    "britton_reduce",
    "equal",
    "is_trivial",
    "measure_distortion",
    "to_base",
    "DistortionCurve",
    "Exact",
    "LengthExpr",
    "Tower",
    "expand_length",
    "expr_cmp",
    "lower_bound_curve",
    "normalize",
    "upper_bound_audit",
    "witness_block",
    "witness_chain",
    "witness_tower",
]

__version__ = "0.1.0"
