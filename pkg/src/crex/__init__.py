"""crex: regex matching with bounded repetition via counting-set automata.

Pipeline: parse -> normalize -> counting automaton -> deterministic
counting-set automaton (state-indexed registers, or shared carriers with
increment postponing) -> offset-list simulation linear in the text and
independent of the counter bounds.  Includes classifiers for the
letter-marked and synchronizing regex classes plus brute-force oracles
for differential testing.
"""

from .augmented import AugmentedCsa, determinize_augmented
from .ca import CountingAutomaton, build_ca, validate_ca_properties
from .classifier import (classify_corpus, classify_pattern, is_letter_marked,
                         is_synchronizing, marker_sets)
from .csa import BasicCsa, determinize_basic, decode, encode
from .errors import (CrexError, NotFlatError, RegexSyntaxError,
                     ReplicationError, ResourceLimitError,
                     UnsupportedFeatureError)
from .matcher import MatchOutcome, Simulation, match_stream, match_word
from .offset_list import OffsetList, Stats, merge
from .oracle import (ast_match, explicit_determinize, oracle_match,
                     synchronizing_witness)
from .parser import RegexStats, normalize, nullable, parse, pretty, stats

__version__ = "0.1.0"

__all__ = [
    "AugmentedCsa", "BasicCsa", "CountingAutomaton", "CrexError",
    "MatchOutcome", "NotFlatError", "OffsetList", "RegexStats",
    "RegexSyntaxError", "ReplicationError", "ResourceLimitError",
    "Simulation", "Stats", "UnsupportedFeatureError", "ast_match",
    "build_ca", "classify_corpus", "classify_pattern", "decode",
    "determinize_augmented", "determinize_basic", "encode",
    "explicit_determinize", "is_letter_marked", "is_synchronizing",
    "marker_sets", "match_stream", "match_word", "merge", "normalize",
    "nullable", "oracle_match", "parse", "pretty", "stats",
    "synchronizing_witness", "validate_ca_properties",
]
