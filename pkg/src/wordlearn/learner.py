"""Incremental learner state: association accumulation and smoothed meaning probabilities.

The learner maintains a sparse word-feature association table. Meaning
probabilities derive from it on demand: p(f|w) is the additively smoothed
share of w's accumulated association mass on f, computed over an assumed
universe of ``universe_size`` features so that mass stays reserved for
features not observed yet.

A state instance is single-writer: process_pair calls must be externally
serialized. Reads (meaning_prob, word_rep) are safe between updates.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from . import alignment as _alignment
from .alignment import AlignmentTable, Mechanism
from .corpus import Feature, InputPair
from .errors import ConfigError

_SNAPSHOT_FORMAT = "wordlearn-state-v1"


@dataclass(frozen=True)
class LearnerConfig:
    """Learner hyperparameters.

    ``smoothing`` is the additive mass credited to every feature;
    ``universe_size`` is the assumed total number of distinct features and
    must stay >= the number actually observed (checked lazily).
    """

    mechanism: Mechanism
    universe_size: int
    smoothing: float = 1e-5
    similarity: str = "cosine"

    def __post_init__(self):
        if isinstance(self.mechanism, str):
            object.__setattr__(self, "mechanism", Mechanism.from_tag(self.mechanism))
        if self.smoothing <= 0:
            raise ConfigError("smoothing must be positive")
        if self.universe_size < 1:
            raise ConfigError("universe_size must be at least 1")
        if self.similarity != "cosine":
            raise ConfigError(f"unknown similarity {self.similarity!r}; only 'cosine' is provided")


@dataclass
class WordRep:
    """Materialized meaning distribution of one word over the observed features.

    ``unseen_prob`` is the smoothed probability any not-yet-observed feature
    would currently receive; the full distribution over the assumed universe
    sums to 1.
    """

    features: tuple[Feature, ...]
    probs: np.ndarray
    unseen_prob: float

    def prob(self, feature: Feature) -> float:
        try:
            return float(self.probs[self._index[feature]])
        except KeyError:
            return self.unseen_prob

    @property
    def _index(self) -> dict[Feature, int]:
        if not hasattr(self, "_index_cache"):
            self._index_cache = {f: i for i, f in enumerate(self.features)}
        return self._index_cache


class MeaningState:
    """Evolving sparse association table assoc(word, feature) plus observation sets.

    Backed by a dense array over the words and features registered so far;
    unregistered entries are implicitly zero. Iteration orders are canonical
    (registration order for features, sorted within each pair for words), so
    runs are bit-reproducible.
    """

    def __init__(self):
        self.t = 0
        self._assoc = np.zeros((16, 64))
        self._n_words = 0
        self._n_feats = 0
        self._word_ix: dict[str, int] = {}
        self._feat_ix: dict[Feature, int] = {}
        self._words: list[str] = []
        self._features: list[Feature] = []

    # -- registration -------------------------------------------------------

    def _ensure_word(self, word: str) -> int:
        wi = self._word_ix.get(word)
        if wi is None:
            if self._n_words == self._assoc.shape[0]:
                grown = np.zeros((max(16, 2 * self._assoc.shape[0]), self._assoc.shape[1]))
                grown[: self._n_words, : self._n_feats] = self._assoc[: self._n_words, : self._n_feats]
                self._assoc = grown
            wi = self._n_words
            self._word_ix[word] = wi
            self._words.append(word)
            self._n_words += 1
        return wi

    def _ensure_feature(self, feature: Feature) -> int:
        fi = self._feat_ix.get(feature)
        if fi is None:
            if self._n_feats == self._assoc.shape[1]:
                grown = np.zeros((self._assoc.shape[0], max(64, 2 * self._assoc.shape[1])))
                grown[: self._n_words, : self._n_feats] = self._assoc[: self._n_words, : self._n_feats]
                self._assoc = grown
            fi = self._n_feats
            self._feat_ix[feature] = fi
            self._features.append(feature)
            self._n_feats += 1
        return fi

    def register_pair(self, pair: InputPair, config: LearnerConfig) -> None:
        """Add the pair's words and features to the observed sets."""
        for word in pair.utterance:
            self._ensure_word(word)
        for referent in pair.scene:
            for f in referent.features:
                self._ensure_feature(f)
        self.check_universe(config)

    def check_universe(self, config: LearnerConfig) -> None:
        if self._n_feats > config.universe_size:
            raise ConfigError(
                f"observed {self._n_feats} distinct features, exceeding "
                f"universe_size {config.universe_size}"
            )

    # -- views ---------------------------------------------------------------

    @property
    def observed_words(self) -> frozenset:
        return frozenset(self._words)

    @property
    def observed_features(self) -> frozenset:
        return frozenset(self._features)

    @property
    def word_list(self) -> tuple[str, ...]:
        return tuple(self._words)

    @property
    def feature_list(self) -> tuple[Feature, ...]:
        """Observed features in registration (first-observation) order."""
        return tuple(self._features)

    def feature_index(self, feature: Feature) -> int | None:
        return self._feat_ix.get(feature)

    def assoc_value(self, word: str, feature: Feature) -> float:
        wi = self._word_ix.get(word)
        fi = self._feat_ix.get(feature)
        if wi is None or fi is None:
            return 0.0
        return float(self._assoc[wi, fi])

    def assoc_items(self) -> Iterator[tuple[str, Feature, float]]:
        """Nonzero association entries, words then features in canonical order."""
        for wi, word in enumerate(self._words):
            row = self._assoc[wi, : self._n_feats]
            for fi in np.nonzero(row)[0]:
                yield word, self._features[fi], float(row[fi])

    def row_denominator(self, word: str, config: LearnerConfig) -> float:
        """Total accumulated mass of the word plus the full smoothing budget."""
        wi = self._word_ix.get(word)
        base = config.universe_size * config.smoothing
        if wi is None:
            return base
        return float(np.sum(self._assoc[wi, : self._n_feats])) + base

    def prob_row(self, word: str, config: LearnerConfig) -> np.ndarray:
        """Smoothed meaning probabilities over the observed features (a copy)."""
        lam = config.smoothing
        denom = self.row_denominator(word, config)
        wi = self._word_ix.get(word)
        if wi is None:
            return np.full(self._n_feats, lam / denom)
        return (self._assoc[wi, : self._n_feats] + lam) / denom

    # -- low-level mutation (tests, hand-built states) ------------------------

    def add_assoc(self, word: str, feature: Feature, amount: float, config: LearnerConfig) -> None:
        """Directly credit association mass, registering word and feature."""
        if amount < 0:
            raise ValueError("association increments must be nonnegative")
        wi = self._ensure_word(word)
        fi = self._ensure_feature(feature)
        self.check_universe(config)
        self._assoc[wi, fi] += amount

    def digest(self) -> str:
        """Content hash of the full state; unchanged by read-only operations."""
        h = hashlib.sha256()
        h.update(str(self.t).encode())
        h.update("\x00".join(self._words).encode())
        h.update("\x00".join(self._features).encode())
        h.update(np.ascontiguousarray(self._assoc[: self._n_words, : self._n_feats]).tobytes())
        return h.hexdigest()


def meaning_prob(state: MeaningState, config: LearnerConfig, word: str, feature: Feature) -> float:
    """Smoothed probability that the feature is part of the word's meaning.

    Defined for unseen words and features: a never-seen word is uniform at
    1/universe_size over any feature.
    """
    state.check_universe(config)
    wi = state._word_ix.get(word)
    fi = state._feat_ix.get(feature)
    value = 0.0
    if wi is not None and fi is not None:
        value = float(state._assoc[wi, fi])
    return (value + config.smoothing) / state.row_denominator(word, config)


def word_rep(state: MeaningState, config: LearnerConfig, word: str) -> WordRep:
    """Materialize the word's meaning distribution over the observed features."""
    state.check_universe(config)
    probs = state.prob_row(word, config)
    unseen = config.smoothing / state.row_denominator(word, config)
    return WordRep(state.feature_list, probs, unseen)


def update_assoc(
    state: MeaningState, config: LearnerConfig, table: AlignmentTable, pair: InputPair
) -> MeaningState:
    """Fold one pair's alignment table into the association scores.

    Referent mechanisms credit each feature with the maximum alignment among
    the scene referents containing it; the feature-level mechanism credits
    each (word, feature) alignment directly. Entries outside the pair are
    untouched, and every increment is nonnegative, so association scores
    never decrease.
    """
    if table.mechanism is not config.mechanism:
        raise ValueError(
            f"alignment table was built for {table.mechanism.value!r}, "
            f"learner is configured for {config.mechanism.value!r}"
        )
    if table.pair_index != pair.index:
        raise ValueError(
            f"alignment table was built from pair {table.pair_index}, got pair {pair.index}"
        )
    state.register_pair(pair, config)
    feats = pair.scene_features()
    try:
        if config.mechanism is Mechanism.FAS:
            for word in pair.utterance:
                row = state._assoc[state._word_ix[word]]
                for f in feats:
                    increment = table.entries[(word, f)]
                    if increment < 0:
                        raise ValueError("alignment strengths must be nonnegative")
                    row[state._feat_ix[f]] += increment
        else:
            containing = {f: [r for r in pair.scene if f in r] for f in feats}
            for word in pair.utterance:
                row = state._assoc[state._word_ix[word]]
                for f in feats:
                    increment = max(table.entries[(word, r)] for r in containing[f])
                    if increment < 0:
                        raise ValueError("alignment strengths must be nonnegative")
                    row[state._feat_ix[f]] += increment
    except KeyError as missing:
        raise ValueError(f"alignment table does not cover the pair: missing {missing}") from None
    return state


def process_pair(state: MeaningState, config: LearnerConfig, pair: InputPair) -> MeaningState:
    """One incremental step: observe, align in the moment, accumulate.

    The pair's features join the observed set before alignment, so alignment
    similarity vectors and subsequent probability queries share one support.
    """
    state.register_pair(pair, config)
    table = _alignment.align(pair, state, config)
    update_assoc(state, config, table, pair)
    state.t += 1
    return state


# ---------------------------------------------------------------------------
# checkpoint snapshots (exact numeric round-trip)
# ---------------------------------------------------------------------------


def save_state(state: MeaningState, config: LearnerConfig, path: str | Path) -> Path:
    """Write a self-describing snapshot; restores bit-identically.

    Returns the written path (an `.npz` suffix is appended when missing).
    """
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(path.suffix + ".npz")
    meta = json.dumps(
        {
            "format": _SNAPSHOT_FORMAT,
            "t": state.t,
            "words": state._words,
            "features": state._features,
            "config": {
                "mechanism": config.mechanism.value,
                "universe_size": config.universe_size,
                "smoothing": config.smoothing,
                "similarity": config.similarity,
            },
        },
        sort_keys=True,
    )
    assoc = np.ascontiguousarray(state._assoc[: state._n_words, : state._n_feats])
    np.savez_compressed(path, meta=np.array(meta), assoc=assoc)
    return path


def load_state(path: str | Path) -> tuple[MeaningState, LearnerConfig]:
    with np.load(path) as data:
        meta = json.loads(str(data["meta"][()]))
        if meta.get("format") != _SNAPSHOT_FORMAT:
            raise ValueError(f"not a {_SNAPSHOT_FORMAT} snapshot: {path}")
        assoc = data["assoc"]
    state = MeaningState()
    state.t = int(meta["t"])
    state._words = list(meta["words"])
    state._features = list(meta["features"])
    state._word_ix = {w: i for i, w in enumerate(state._words)}
    state._feat_ix = {f: i for i, f in enumerate(state._features)}
    state._n_words = len(state._words)
    state._n_feats = len(state._features)
    state._assoc = np.array(assoc, dtype=float)
    cfg = meta["config"]
    config = LearnerConfig(
        mechanism=Mechanism.from_tag(cfg["mechanism"]),
        universe_size=int(cfg["universe_size"]),
        smoothing=float(cfg["smoothing"]),
        similarity=cfg["similarity"],
    )
    return state, config
