"""Subregular predicate features, minterm separators and linear learners."""

__version__ = "0.1.0"

from .strings import Alphabet, Tier, pad, contains_substring, contains_subsequence, count_occurrences, project_tier
from .predicates import Predicate, PredicateSet, Kind, build_predicate_set, eval_predicate, truth_vector, feature_matrix
from .minterm import minterm_embed, build_separator, decide, accept_set_for_language, CellConflict
from .languages import LanguageSpec, membership, sample_positive, sample_negative, generate_dataset, flip_labels
from .learners import LinearModel, train_perceptron, train_logreg, predict, evaluate, normalized_margin, margin_quantile
