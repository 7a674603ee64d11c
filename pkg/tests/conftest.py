"""Shared fixtures and helpers for the test suite."""

import numpy as np
import pytest

from wordlearn import (
    CorpusSpec,
    InputPair,
    LearnerConfig,
    MeaningState,
    Referent,
    generate_corpus,
    generate_lexicon,
    process_pair,
)


def train(pairs, config):
    state = MeaningState()
    for pair in pairs:
        process_pair(state, config, pair)
    return state


def small_corpus(seed, vocab=25, n_pairs=250, pool=60, lengths=(1, 5), feats=(2, 4)):
    """A quick synthetic corpus for invariant and property tests."""
    spec = CorpusSpec(
        vocab_size=vocab,
        features_per_referent=feats,
        utterance_length=lengths,
        n_pairs=n_pairs,
        seed=seed,
        feature_pool=pool,
    )
    lexicon = generate_lexicon(spec)
    return lexicon, generate_corpus(lexicon, spec)


def tiny_random_pairs(rng, n_words=3, n_features=4, n_pairs=5):
    """Random tiny instances for oracle-equivalence checks.

    Every sum in play stays short enough that summation order cannot differ
    between dict-based and array-based arithmetic.
    """
    words = [f"w{i}" for i in range(n_words)]
    features = [f"f{i}" for i in range(n_features)]
    gold = {}
    for i, w in enumerate(words):
        k = int(rng.integers(1, min(3, n_features) + 1))
        chosen = sorted(rng.choice(n_features, size=k, replace=False).tolist())
        gold[w] = Referent(tuple(features[j] for j in chosen))
    pairs = []
    for t in range(n_pairs):
        size = int(rng.integers(1, n_words + 1))
        utter = sorted(rng.choice(n_words, size=size, replace=False).tolist())
        utterance = tuple(words[i] for i in utter)
        scene = tuple(gold[w] for w in utterance)
        pairs.append(InputPair(utterance, scene, index=t + 1))
    return pairs


@pytest.fixture
def word_comp_config():
    return LearnerConfig("word-comp", universe_size=200, smoothing=1e-4)
