"""Leftist grammars as rewrite systems and word transformers."""

__version__ = "0.1.0"
FORMAT_VERSION = "lgr-1"

from .core import Grammar, GrammarError, Kind, Rule, Step, dele, ins, parse_grammar, format_grammar  # noqa: E402
from .derivations import Derivation, classify, greedy_normalize, is_mu_minimal  # noqa: E402
from .reach import SearchBounds, bounded_reach, greedy_reach, oracle_enumerate  # noqa: E402
from .transform import RelationBounds, Transformer, bounded_relation, compose  # noqa: E402

__all__ = [
    "Derivation",
    "Grammar",
    "GrammarError",
    "Kind",
    "RelationBounds",
    "Rule",
    "SearchBounds",
    "Step",
    "Transformer",
    "bounded_reach",
    "bounded_relation",
    "classify",
    "compose",
    "dele",
    "format_grammar",
    "greedy_normalize",
    "greedy_reach",
    "ins",
    "is_mu_minimal",
    "oracle_enumerate",
    "parse_grammar",
]
