"""Find homomorphism-minimal finite models of bounded first-order theories
with an external SMT-LIB solver."""

from .homs import HomKind, find_hom, hom_equivalent, isomorphic
from .minimize import (
    Claim, MinimizationReport, SupportStream, a_minimize, compute_core, et_stream,
    i_minimize, minimize_both, set_of_support,
)
from .model import FiniteModel, format_text, from_json, satisfies, scrape_model, to_json
from .smtlib import ParseError, parse_theory
from .solver import SolverConfig, SolverError, SolverSession, Verdict
from .syntax import MinfindError, Profile, Signature, Theory, bound_theory, is_geometric

__version__ = "0.1.0"

__all__ = [
    "Claim", "FiniteModel", "HomKind", "MinfindError", "MinimizationReport", "ParseError",
    "Profile", "Signature", "SolverConfig", "SolverError", "SolverSession", "SupportStream",
    "Theory", "Verdict", "a_minimize", "bound_theory", "compute_core", "et_stream",
    "find_hom", "format_text", "from_json", "hom_equivalent", "i_minimize", "is_geometric",
    "isomorphic", "minimize_both", "parse_theory", "satisfies", "scrape_model",
    "set_of_support", "to_json",
]
