"""In-the-moment alignment: per-pair word-target strengths under four mechanisms.

Given one utterance-scene pair and the learner's current meaning state, each
mechanism assigns every word a soft alignment in [0, 1] to each candidate
target. Targets are whole referents, except for the feature-level mechanism
("fas"), which discards referent grouping and aligns words to individual
features. Alignment is read-only: it never mutates the learner state.

Competition structure per mechanism:
  fas        words compete for each scene feature (normalized over the utterance)
  no-comp    raw word-referent similarity, no normalization
  ref-comp   referents compete for each word (normalized over the scene)
  word-comp  words compete for each referent (normalized over the utterance)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Union

import numpy as np

from .corpus import Feature, InputPair, Referent

if TYPE_CHECKING:
    from .learner import LearnerConfig, MeaningState

Target = Union[Referent, Feature]


class Mechanism(Enum):
    """Selects the alignment formula and the matching association update."""

    FAS = "fas"
    NO_COMP = "no-comp"
    REF_COMP = "ref-comp"
    WORD_COMP = "word-comp"

    @classmethod
    def from_tag(cls, tag: str) -> "Mechanism":
        try:
            return cls(tag)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown mechanism {tag!r}; expected one of: {valid}") from None


def similarity(word_rep, referent_rep) -> float:
    """Cosine similarity between a meaning vector and a binary referent vector.

    Returns 0 iff the supports are disjoint and 1 iff the vectors are
    parallel. A zero word vector is rejected: smoothed meaning
    representations are strictly positive, so it can only signal misuse.
    """
    w = np.asarray(word_rep, dtype=float)
    r = np.asarray(referent_rep, dtype=float)
    if w.shape != r.shape:
        raise ValueError(f"vector shapes differ: {w.shape} vs {r.shape}")
    w_norm = math.sqrt(float(np.sum(w * w)))
    r_norm = math.sqrt(float(np.sum(r * r)))
    if w_norm == 0.0:
        raise ValueError("word meaning vector is all-zero")
    if r_norm == 0.0:
        raise ValueError("referent vector needs at least one nonzero entry")
    value = float(np.sum(w * r)) / (w_norm * r_norm)
    return min(1.0, max(0.0, value))


@dataclass
class AlignmentTable:
    """Per-pair alignment strengths keyed by (word, referent) or (word, feature)."""

    mechanism: Mechanism
    pair_index: int
    entries: dict[tuple[str, Target], float]

    def strength(self, word: str, target: Target) -> float:
        return self.entries.get((word, target), 0.0)


def _referent_similarities(pair: InputPair, state: "MeaningState", config: "LearnerConfig") -> np.ndarray:
    """Cosine similarity of every utterance word to every scene referent.

    Word vectors are the smoothed meaning distributions over the observed
    feature set, extended with reserved smoothing mass for any pair feature
    the state has not registered yet (the state is left untouched).
    """
    lam = config.smoothing
    scene = pair.scene
    ref_idx: list[np.ndarray] = []
    ref_missing: list[int] = []
    seen_missing: set[Feature] = set()
    for referent in scene:
        idx = []
        missing = 0
        for f in referent.features:
            fi = state.feature_index(f)
            if fi is None:
                missing += 1
                seen_missing.add(f)
            else:
                idx.append(fi)
        ref_idx.append(np.asarray(idx, dtype=np.intp))
        ref_missing.append(missing)
    unseen_pair_feats = len(seen_missing)

    sims = np.empty((len(pair.utterance), len(scene)))
    for i, word in enumerate(pair.utterance):
        probs = state.prob_row(word, config)
        denom = state.row_denominator(word, config)
        ext = lam / denom
        norm = math.sqrt(float(np.sum(probs * probs)) + unseen_pair_feats * ext * ext)
        for j, referent in enumerate(scene):
            dot = float(probs[ref_idx[j]].sum()) + ref_missing[j] * ext
            value = dot / (norm * math.sqrt(len(referent.features)))
            sims[i, j] = min(1.0, max(0.0, value))
    return sims


def align_fas(pair: InputPair, state: "MeaningState", config: "LearnerConfig") -> AlignmentTable:
    """Feature-level alignment: the scene is flattened to the union of its
    features, and for each feature the utterance words split a unit of
    alignment in proportion to their current meaning probabilities."""
    feats = pair.scene_features()
    words = pair.utterance
    probs = np.empty((len(words), len(feats)))
    for i, word in enumerate(words):
        row = state.prob_row(word, config)
        denom = state.row_denominator(word, config)
        ext = config.smoothing / denom
        for j, f in enumerate(feats):
            fi = state.feature_index(f)
            probs[i, j] = ext if fi is None else row[fi]
    totals = probs.sum(axis=0)
    entries: dict[tuple[str, Target], float] = {}
    for j, f in enumerate(feats):
        total = float(totals[j])
        for i, word in enumerate(words):
            entries[(word, f)] = float(probs[i, j]) / total
    return AlignmentTable(Mechanism.FAS, pair.index, entries)


def align_no_comp(pair: InputPair, state: "MeaningState", config: "LearnerConfig") -> AlignmentTable:
    """Independent word-referent alignment: the raw similarity, unnormalized."""
    sims = _referent_similarities(pair, state, config)
    entries: dict[tuple[str, Target], float] = {}
    for i, word in enumerate(pair.utterance):
        for j, referent in enumerate(pair.scene):
            entries[(word, referent)] = float(sims[i, j])
    return AlignmentTable(Mechanism.NO_COMP, pair.index, entries)


def align_ref_comp(pair: InputPair, state: "MeaningState", config: "LearnerConfig") -> AlignmentTable:
    """Referents compete for each word: similarities normalized over the scene.

    If every similarity for a word is zero (impossible for a smoothed state,
    possible for hand-built ones) the word falls back to a uniform split.
    """
    sims = _referent_similarities(pair, state, config)
    n_refs = len(pair.scene)
    entries: dict[tuple[str, Target], float] = {}
    for i, word in enumerate(pair.utterance):
        total = float(sims[i].sum())
        for j, referent in enumerate(pair.scene):
            if total == 0.0:
                entries[(word, referent)] = 1.0 / n_refs
            else:
                entries[(word, referent)] = float(sims[i, j]) / total
    return AlignmentTable(Mechanism.REF_COMP, pair.index, entries)


def align_word_comp(pair: InputPair, state: "MeaningState", config: "LearnerConfig") -> AlignmentTable:
    """Words compete for each referent: similarities normalized over the
    utterance; referents are aligned independently of each other. Zero
    columns fall back to a uniform split."""
    sims = _referent_similarities(pair, state, config)
    n_words = len(pair.utterance)
    entries: dict[tuple[str, Target], float] = {}
    for j, referent in enumerate(pair.scene):
        total = float(sims[:, j].sum())
        for i, word in enumerate(pair.utterance):
            if total == 0.0:
                entries[(word, referent)] = 1.0 / n_words
            else:
                entries[(word, referent)] = float(sims[i, j]) / total
    return AlignmentTable(Mechanism.WORD_COMP, pair.index, entries)


_ALIGNERS = {
    Mechanism.FAS: align_fas,
    Mechanism.NO_COMP: align_no_comp,
    Mechanism.REF_COMP: align_ref_comp,
    Mechanism.WORD_COMP: align_word_comp,
}


def align(pair: InputPair, state: "MeaningState", config: "LearnerConfig") -> AlignmentTable:
    """Compute the alignment table for the configured mechanism."""
    return _ALIGNERS[config.mechanism](pair, state, config)
