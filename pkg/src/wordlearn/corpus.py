"""Utterance-scene corpus model: interchange format, synthetic generation, manipulations.

A corpus is a sequence of input pairs, each coupling an utterance (a set of
words, order ignored) with a scene (a list of referents, each a bundle of
semantic features). Everything here is a pure function of its inputs;
generators are bit-deterministic under a fixed seed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, CorpusFormatError

Feature = str

# utterance-length cutoffs for the short/long corpus conditions
SHORT_MAX_LEN = 3
LONG_MIN_LEN = 5

_FEATURE_RESERVED = set(",;:#\t\n ")

_LEXICON_STREAM = 0  # rng substream ids, so lexicon and corpus draws never interleave
_CORPUS_STREAM = 1


@dataclass(frozen=True)
class Referent:
    """A bundle of semantic features denoting one thing a word can refer to."""

    features: tuple[Feature, ...]

    def __post_init__(self):
        feats = tuple(sorted(set(self.features)))
        if not feats:
            raise ValueError("referent must carry at least one feature")
        if any(not f for f in feats):
            raise ValueError("feature names must be non-empty")
        object.__setattr__(self, "features", feats)

    @cached_property
    def feature_set(self) -> frozenset:
        return frozenset(self.features)

    def __len__(self) -> int:
        return len(self.features)

    def __contains__(self, feature: Feature) -> bool:
        return feature in self.feature_set


@dataclass(frozen=True)
class InputPair:
    """One utterance-scene observation.

    The utterance is stored as a deduplicated, sorted word tuple (set
    semantics); the scene keeps referent order as given.
    """

    utterance: tuple[str, ...]
    scene: tuple[Referent, ...]
    index: int = 0

    def __post_init__(self):
        words = tuple(sorted(set(self.utterance)))
        if not words:
            raise ValueError("utterance must contain at least one word")
        if any(not w for w in words):
            raise ValueError("words must be non-empty")
        scene = tuple(self.scene)
        if not scene:
            raise ValueError("scene must contain at least one referent")
        object.__setattr__(self, "utterance", words)
        object.__setattr__(self, "scene", scene)

    @property
    def length(self) -> int:
        return len(self.utterance)

    def scene_features(self) -> tuple[Feature, ...]:
        """Unique features across the scene, in first-occurrence order."""
        seen: dict[Feature, None] = {}
        for referent in self.scene:
            for f in referent.features:
                seen.setdefault(f)
        return tuple(seen)


@dataclass
class Lexicon:
    """Gold-standard word meanings: exactly one referent per word form."""

    entries: dict[str, Referent]

    def __post_init__(self):
        if any(not w for w in self.entries):
            raise ValueError("lexicon words must be non-empty")

    @property
    def words(self) -> list[str]:
        return list(self.entries)

    def gold(self, word: str) -> Referent:
        return self.entries[word]

    @property
    def feature_universe(self) -> frozenset:
        universe: set[Feature] = set()
        for referent in self.entries.values():
            universe.update(referent.features)
        return frozenset(universe)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries


@dataclass(frozen=True)
class CorpusSpec:
    """Parameters for synthetic lexicon and corpus generation.

    ``feature_pool`` bounds the number of distinct features meanings are
    drawn from; distinct words may share features but never whole feature
    sets. ``length_weights`` selects the utterance-length distribution over
    the configured range: "uniform", or "inverse" (mass proportional to
    1/length, skewing toward short utterances).
    """

    vocab_size: int
    features_per_referent: tuple[int, int] = (3, 8)
    zipf_exponent: float = 1.0
    utterance_length: tuple[int, int] = (1, 8)
    n_pairs: int = 20000
    seed: int = 0
    feature_pool: int | None = None
    length_weights: str = "uniform"

    def __post_init__(self):
        if self.vocab_size < 1:
            raise ConfigError("vocab_size must be at least 1")
        flo, fhi = self.features_per_referent
        if not (1 <= flo <= fhi):
            raise ConfigError("features_per_referent range must be non-empty with min >= 1")
        ulo, uhi = self.utterance_length
        if not (1 <= ulo <= uhi):
            raise ConfigError("utterance_length range must be non-empty with min >= 1")
        if self.zipf_exponent <= 0:
            raise ConfigError("zipf_exponent must be positive")
        if self.n_pairs < 1:
            raise ConfigError("n_pairs must be at least 1")
        if self.feature_pool is not None and self.feature_pool < fhi:
            raise ConfigError("feature_pool smaller than the largest referent size")
        if self.length_weights not in ("uniform", "inverse"):
            raise ConfigError("length_weights must be 'uniform' or 'inverse'")


# ---------------------------------------------------------------------------
# interchange format
#
# One pair per line: `word1 word2 ...<TAB>F,F,...;F,F,...` where `;` separates
# referents and `,` separates features. A referent may carry an optional
# `word:` label for readability; the parser drops it. `#` lines are comments.
# ---------------------------------------------------------------------------


def parse_corpus(stream: str | Iterable[str]) -> list[InputPair]:
    """Parse interchange-format text into input pairs, indexed from 1.

    Unknown features are admitted: the learner discovers features from data.
    Raises CorpusFormatError naming the offending line and violation.
    """
    lines = stream.splitlines() if isinstance(stream, str) else stream
    pairs: list[InputPair] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        pairs.append(_parse_line(line, line_no, index=len(pairs) + 1))
    return pairs


def _parse_line(line: str, line_no: int, index: int) -> InputPair:
    parts = line.split("\t")
    if len(parts) != 2:
        raise CorpusFormatError(line_no, "expected 'utterance<TAB>scene'")
    words = parts[0].split()
    if not words:
        raise CorpusFormatError(line_no, "empty utterance")
    scene_text = parts[1].strip()
    if not scene_text:
        raise CorpusFormatError(line_no, "empty scene")
    referents = []
    for chunk in scene_text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            raise CorpusFormatError(line_no, "empty referent")
        body = chunk.split(":", 1)[1] if ":" in chunk else chunk
        feats = [f.strip() for f in body.split(",")]
        if any(not f for f in feats):
            raise CorpusFormatError(line_no, "empty feature name in referent")
        referents.append(Referent(tuple(feats)))
    return InputPair(tuple(words), tuple(referents), index=index)


def serialize_corpus(pairs: Iterable[InputPair]) -> str:
    """Render pairs in the interchange format (no referent labels)."""
    out = []
    for pair in pairs:
        for w in pair.utterance:
            if any(c.isspace() for c in w) or w.startswith("#"):
                raise ValueError(f"word {w!r} cannot be serialized")
        for referent in pair.scene:
            for f in referent.features:
                if set(f) & _FEATURE_RESERVED:
                    raise ValueError(f"feature {f!r} contains reserved characters")
        scene = ";".join(",".join(r.features) for r in pair.scene)
        out.append(" ".join(pair.utterance) + "\t" + scene)
    return "\n".join(out) + ("\n" if out else "")


def load_corpus(path: str | Path) -> list[InputPair]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"))


def write_corpus(pairs: Iterable[InputPair], path: str | Path) -> None:
    Path(path).write_text(serialize_corpus(pairs), encoding="utf-8")


def parse_lexicon(stream: str | Iterable[str]) -> Lexicon:
    """Parse a gold lexicon: one `word<TAB>F,F,...` entry per line."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    entries: dict[str, Referent] = {}
    for line_no, raw in enumerate(lines, start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("\t")
        if len(parts) != 2:
            raise CorpusFormatError(line_no, "expected 'word<TAB>features'")
        word = parts[0].strip()
        feats = [f.strip() for f in parts[1].split(",")]
        if not word:
            raise CorpusFormatError(line_no, "empty word")
        if any(not f for f in feats):
            raise CorpusFormatError(line_no, "empty feature name")
        if word in entries:
            raise CorpusFormatError(line_no, f"duplicate lexicon entry for {word!r}")
        entries[word] = Referent(tuple(feats))
    return Lexicon(entries)


def serialize_lexicon(lexicon: Lexicon) -> str:
    lines = [f"{w}\t{','.join(r.features)}" for w, r in lexicon.entries.items()]
    return "\n".join(lines) + ("\n" if lines else "")


def load_lexicon(path: str | Path) -> Lexicon:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


def write_lexicon(lexicon: Lexicon, path: str | Path) -> None:
    Path(path).write_text(serialize_lexicon(lexicon), encoding="utf-8")


# ---------------------------------------------------------------------------
# synthetic generation
# ---------------------------------------------------------------------------


def _default_feature_pool(spec: CorpusSpec) -> int:
    return max(16, 2 * spec.vocab_size, 4 * spec.features_per_referent[1])


def generate_lexicon(spec: CorpusSpec) -> Lexicon:
    """Draw a gold lexicon: per word, a feature set sampled from a shared pool.

    Words may share individual features (semantic overlap) but no two words
    get identical feature sets. Entry order is rank order: the first word is
    the most frequent under the corpus generator's Zipf law.
    """
    lo, hi = spec.features_per_referent
    pool = spec.feature_pool if spec.feature_pool is not None else _default_feature_pool(spec)
    rng = np.random.default_rng([spec.seed, _LEXICON_STREAM])
    width_w = max(4, len(str(spec.vocab_size - 1)))
    width_f = max(4, len(str(pool - 1)))
    feature_names = [f"f{i:0{width_f}d}" for i in range(pool)]
    entries: dict[str, Referent] = {}
    seen: set[tuple[int, ...]] = set()
    for rank in range(spec.vocab_size):
        chosen = None
        for _ in range(64):
            k = int(rng.integers(lo, hi + 1))
            candidate = tuple(sorted(int(i) for i in rng.choice(pool, size=k, replace=False)))
            if candidate not in seen:
                chosen = candidate
                break
        if chosen is None:
            raise ConfigError(
                f"could not draw {spec.vocab_size} distinct feature sets from a pool of "
                f"{pool} features; increase feature_pool"
            )
        seen.add(chosen)
        entries[f"w{rank:0{width_w}d}"] = Referent(tuple(feature_names[i] for i in chosen))
    return Lexicon(entries)


def zipf_rank_weights(vocab_size: int, exponent: float) -> np.ndarray:
    """Normalized Zipf mass over ranks 1..vocab_size."""
    ranks = np.arange(1, vocab_size + 1, dtype=float)
    weights = ranks ** (-exponent)
    return weights / weights.sum()


def generate_corpus(lexicon: Lexicon, spec: CorpusSpec) -> list[InputPair]:
    """Sample utterance-scene pairs from the lexicon under a Zipf rank law.

    Each utterance draws its length from the configured range, then samples
    that many distinct words (weighted sampling without replacement over
    vocabulary ranks). The scene is exactly the gold referents of the
    sampled words, so the stream is free of referential uncertainty.
    """
    words = list(lexicon.entries)
    if not words:
        raise ValueError("lexicon is empty")
    lo, hi = spec.utterance_length
    if hi > len(words):
        raise ConfigError(
            f"utterance_length max {hi} exceeds vocabulary size {len(words)}"
        )
    rng = np.random.default_rng([spec.seed, _CORPUS_STREAM])
    weights = zipf_rank_weights(len(words), spec.zipf_exponent)
    inv_weights = 1.0 / weights
    n_words = len(words)

    if spec.length_weights == "inverse":
        lens = np.arange(lo, hi + 1, dtype=float)
        mass = 1.0 / lens
        cdf = np.cumsum(mass / mass.sum())

    pairs: list[InputPair] = []
    for k in range(spec.n_pairs):
        if spec.length_weights == "uniform":
            length = int(rng.integers(lo, hi + 1))
        else:
            length = lo + int(np.searchsorted(cdf, rng.random(), side="right"))
            length = min(length, hi)
        if length >= n_words:
            chosen = range(n_words)
        else:
            # weighted sampling without replacement: keep the top-k of the
            # exponential race log(u)/w, equivalent to successive renormalized draws
            keys = np.log(rng.random(n_words)) * inv_weights
            top = np.argpartition(keys, n_words - length)[n_words - length:]
            chosen = sorted(int(i) for i in top)
        utterance = tuple(words[i] for i in chosen)
        scene = tuple(lexicon.entries[w] for w in utterance)
        pairs.append(InputPair(utterance, scene, index=k + 1))
    return pairs


# ---------------------------------------------------------------------------
# corpus manipulations
# ---------------------------------------------------------------------------


def filter_by_length(pairs: Iterable[InputPair], condition: str) -> list[InputPair]:
    """Keep pairs whose utterance size is short (<= 3) or long (>= 5); re-index."""
    if condition == "short":
        keep = lambda n: n <= SHORT_MAX_LEN
    elif condition == "long":
        keep = lambda n: n >= LONG_MIN_LEN
    else:
        raise ValueError(f"unknown length condition {condition!r}; use 'short' or 'long'")
    out: list[InputPair] = []
    for pair in pairs:
        if keep(pair.length):
            out.append(InputPair(pair.utterance, pair.scene, index=len(out) + 1))
    return out


def inject_referential_uncertainty(pairs: list[InputPair], level: int) -> list[InputPair]:
    """Thin the stream to every (level+1)-th pair, folding the skipped pairs'
    referents into the kept scenes.

    The kept utterance is unchanged and its own referents stay first; extra
    referents append in stream order with duplicates (identical feature sets)
    collapsed. A trailing window shorter than the stride is dropped.
    """
    if level not in (0, 1, 2):
        raise ValueError(f"uncertainty level must be 0, 1 or 2, got {level!r}")
    if level == 0:
        return list(pairs)
    stride = level + 1
    out: list[InputPair] = []
    for k in range(len(pairs) // stride):
        base = pairs[k * stride]
        merged: dict[Referent, None] = {}
        for referent in base.scene:
            merged.setdefault(referent)
        for skipped in pairs[k * stride + 1 : k * stride + stride]:
            for referent in skipped.scene:
                merged.setdefault(referent)
        out.append(InputPair(base.utterance, tuple(merged), index=k + 1))
    return out


def word_frequencies(pairs: Iterable[InputPair]) -> dict[str, int]:
    """Count, per word, the number of utterances it occurs in."""
    counts: Counter[str] = Counter()
    for pair in pairs:
        counts.update(pair.utterance)
    return dict(counts)
