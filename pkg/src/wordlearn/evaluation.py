"""Scoring learned meanings against the gold lexicon.

The acquisition score of a word is the cosine between its materialized
meaning distribution and the binary vector of its gold feature set, taken
over the union of observed and gold features (gold features not yet observed
contribute their reserved smoothing mass). A word counts as learned when its
score strictly exceeds the threshold.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Lexicon, Referent
from .errors import ConfigError
from .learner import LearnerConfig, MeaningState, WordRep, word_rep

REPORT_FIELDS = ("t", "mechanism", "condition", "band", "mean_acq", "prop_learned", "n_words")


@dataclass
class AcqReport:
    """Per-word acquisition scores and aggregates at one checkpoint.

    ``empty`` flags a vacuous report (no scorable word observed yet), in
    which case the aggregates are reported as 0. ``missing_words`` lists
    observed words that have no gold entry and were excluded.
    """

    checkpoint_t: int
    theta: float
    per_word: dict[str, float]
    mean_acq: float
    prop_learned: float
    n_words: int
    empty: bool
    missing_words: tuple[str, ...] = ()


@dataclass(frozen=True)
class SplitSpec:
    """Frequency banding: low is count < low_below, high is count > high_above.

    Words in between belong to neither band. Defaults follow the usual
    child-corpus banding (low under 5 occurrences, high over 10).
    """

    kind: str = "frequency_bands"
    low_below: int = 5
    high_above: int = 10

    def __post_init__(self):
        if self.kind not in ("frequency_bands", "corpus_condition"):
            raise ConfigError(f"unknown split kind {self.kind!r}")
        if self.low_below > self.high_above + 1:
            raise ConfigError("frequency bands overlap: low_below > high_above + 1")

    def band_of(self, count: int) -> str | None:
        if count < self.low_below:
            return "low"
        if count > self.high_above:
            return "high"
        return None


def acq_score(rep: WordRep, gold: Referent) -> float:
    """Cosine between a word's meaning distribution and its gold feature set.

    Computed over the union of the rep's support and the gold features; gold
    features absent from the support take the rep's reserved unseen mass.
    """
    if len(gold.features) == 0:
        raise ValueError("gold referent is empty")
    index = rep._index
    dot = 0.0
    n_missing = 0
    for f in gold.features:
        fi = index.get(f)
        if fi is None:
            n_missing += 1
        else:
            dot += float(rep.probs[fi])
    dot += n_missing * rep.unseen_prob
    norm_sq = float(np.sum(rep.probs * rep.probs)) + n_missing * rep.unseen_prob**2
    norm = math.sqrt(norm_sq)
    if norm == 0.0:
        return 0.0
    value = dot / (norm * math.sqrt(len(gold.features)))
    return min(1.0, max(0.0, value))


def _report_from_scores(
    scores: dict[str, float], theta: float, checkpoint_t: int, missing: tuple[str, ...] = ()
) -> AcqReport:
    if not scores:
        return AcqReport(checkpoint_t, theta, {}, 0.0, 0.0, 0, True, missing)
    values = list(scores.values())
    mean = sum(values) / len(values)
    learned = sum(1 for v in values if v > theta)
    return AcqReport(checkpoint_t, theta, scores, mean, learned / len(values), len(scores), False, missing)


def evaluate(
    state: MeaningState,
    config: LearnerConfig,
    lexicon: Lexicon,
    theta: float = 0.7,
    checkpoint_t: int | None = None,
) -> AcqReport:
    """Score every observed word that has a gold entry; read-only.

    Words observed in the input but missing from the lexicon are excluded
    from the aggregates and listed in the report's diagnostics.
    """
    if not (0.0 < theta < 1.0):
        raise ConfigError(f"theta must lie strictly between 0 and 1, got {theta}")
    observed = sorted(state.observed_words)
    scores: dict[str, float] = {}
    missing: list[str] = []
    for word in observed:
        if word in lexicon:
            scores[word] = acq_score(word_rep(state, config, word), lexicon.gold(word))
        else:
            missing.append(word)
    t = state.t if checkpoint_t is None else checkpoint_t
    return _report_from_scores(scores, theta, t, tuple(missing))


def split_report(report: AcqReport, split: SplitSpec, freqs: dict[str, int]) -> dict[str, AcqReport]:
    """Band an existing full report by training-stream frequency."""
    banded: dict[str, dict[str, float]] = {"low": {}, "high": {}}
    for word, score in report.per_word.items():
        band = split.band_of(freqs.get(word, 0))
        if band is not None:
            banded[band][word] = score
    return {
        band: _report_from_scores(scores, report.theta, report.checkpoint_t)
        for band, scores in banded.items()
    }


def evaluate_by_split(
    state: MeaningState,
    config: LearnerConfig,
    lexicon: Lexicon,
    theta: float,
    split: SplitSpec,
    freqs: dict[str, int],
) -> dict[str, AcqReport]:
    """Partition observed words into frequency bands and score each band.

    ``freqs`` must be counted over the same training stream the state was
    fed; words outside both bands are omitted from the result.
    """
    return split_report(evaluate(state, config, lexicon, theta), split, freqs)


def trajectory(
    checkpoints: Iterable[tuple[int, MeaningState]],
    config: LearnerConfig,
    lexicon: Lexicon,
    theta: float = 0.7,
) -> list[tuple[int, float, float]]:
    """Evaluate a stream of (t, state) checkpoints into developmental points."""
    points = []
    last_t = None
    for t, state in checkpoints:
        if last_t is not None and t <= last_t:
            raise ValueError("checkpoint schedule must be increasing")
        last_t = t
        report = evaluate(state, config, lexicon, theta, checkpoint_t=t)
        points.append((t, report.mean_acq, report.prop_learned))
    return points


# ---------------------------------------------------------------------------
# report emission
# ---------------------------------------------------------------------------


def _sig6(value: float) -> str:
    return f"{value:.6g}"


def report_row(
    t: int, mechanism: str, condition: str, band: str, report: AcqReport
) -> dict[str, object]:
    return {
        "t": t,
        "mechanism": mechanism,
        "condition": condition,
        "band": band,
        "mean_acq": report.mean_acq,
        "prop_learned": report.prop_learned,
        "n_words": report.n_words,
    }


def write_report_csv(rows: Sequence[dict], path: str | Path) -> None:
    """One row per (checkpoint x band); floats carry 6 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(REPORT_FIELDS)
        for row in rows:
            writer.writerow(
                [
                    row["t"],
                    row["mechanism"],
                    row["condition"],
                    row["band"],
                    _sig6(row["mean_acq"]),
                    _sig6(row["prop_learned"]),
                    row["n_words"],
                ]
            )


def write_report_jsonl(rows: Sequence[dict], path: str | Path) -> None:
    """JSON-lines mirror of the CSV report, same rounding."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            mirrored = dict(row)
            mirrored["mean_acq"] = float(_sig6(row["mean_acq"]))
            mirrored["prop_learned"] = float(_sig6(row["prop_learned"]))
            fh.write(json.dumps(mirrored, sort_keys=True) + "\n")
