"""Exact bounds for stable commutator length and mixed scl of chains in
free groups."""
from .chains import Chain1, Chain2, boundary, chain_power, normalize_signs, parse_chain
from .commutators import Budget, Decomposition, cl_chain_upper, cl_upper_search, lemma26_decompose
from .lp import FillProblem, build_support, solve_min_l1, verify_solution
from .pairs import GroupPair, QuotientSpec, membership_status, mixed_class
from .qm import CountingQm, QmCertificate, auto_certificates, make_certificate
from .scl import Params, SclBounds, sandwich, scl_lower, scl_upper
from .surfaces import LabelledSurface, build_from_decomposition, invariants, validate
from .words import Alphabet, Word, parse_word

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Word", "parse_word",
    "GroupPair", "QuotientSpec", "membership_status", "mixed_class",
    "Chain1", "Chain2", "boundary", "chain_power", "normalize_signs", "parse_chain",
    "CountingQm", "QmCertificate", "auto_certificates", "make_certificate",
    "FillProblem", "build_support", "solve_min_l1", "verify_solution",
    "Budget", "Decomposition", "cl_chain_upper", "cl_upper_search", "lemma26_decompose",
    "LabelledSurface", "build_from_decomposition", "invariants", "validate",
    "Params", "SclBounds", "sandwich", "scl_lower", "scl_upper",
]
