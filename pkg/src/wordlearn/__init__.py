"""Cross-situational word-learning simulator.

An incremental learner accumulates soft word-meaning evidence from
utterance-scene pairs under one of four in-the-moment alignment mechanisms,
and an experiment harness reproduces developmental, frequency,
utterance-length, and referential-uncertainty analyses on synthetic or
user-supplied corpora.
"""

from .alignment import (
    AlignmentTable,
    Mechanism,
    align,
    align_fas,
    align_no_comp,
    align_ref_comp,
    align_word_comp,
    similarity,
)
from .corpus import (
    CorpusSpec,
    InputPair,
    Lexicon,
    Referent,
    filter_by_length,
    generate_corpus,
    generate_lexicon,
    inject_referential_uncertainty,
    load_corpus,
    load_lexicon,
    parse_corpus,
    parse_lexicon,
    serialize_corpus,
    serialize_lexicon,
    word_frequencies,
    write_corpus,
    write_lexicon,
)
from .errors import ConfigError, CorpusFormatError
from .evaluation import (
    AcqReport,
    SplitSpec,
    acq_score,
    evaluate,
    evaluate_by_split,
    trajectory,
)
from .experiments import (
    Condition,
    ExperimentConfig,
    RunRecord,
    compare_mechanisms,
    emit_plot_data,
    run_experiment,
)
from .learner import (
    LearnerConfig,
    MeaningState,
    WordRep,
    load_state,
    meaning_prob,
    process_pair,
    save_state,
    update_assoc,
    word_rep,
)

__version__ = "0.1.0"
