"""Experiment harness: deterministic end-to-end runs, comparisons, plot data, CLI.

A run trains one fresh learner per (mechanism x condition) over a shared
corpus, evaluates at every checkpoint, and writes CSV/JSON-lines reports plus
a machine-readable run record. Re-running an identical configuration
reproduces byte-identical result files.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .alignment import Mechanism
from .corpus import (
    CorpusSpec,
    InputPair,
    Lexicon,
    filter_by_length,
    generate_corpus,
    generate_lexicon,
    inject_referential_uncertainty,
    load_corpus,
    load_lexicon,
    word_frequencies,
    write_corpus,
    write_lexicon,
    LONG_MIN_LEN,
    SHORT_MAX_LEN,
)
from .errors import ConfigError, CorpusFormatError
from .evaluation import (
    AcqReport,
    SplitSpec,
    evaluate,
    report_row,
    split_report,
    write_report_csv,
    write_report_jsonl,
)
from .learner import LearnerConfig, MeaningState, process_pair

log = logging.getLogger("wordlearn")

LENGTH_CONDITIONS = ("full", "short", "long")
UNCERTAINTY_LEVELS = (0, 1, 2)
ALL_MECHANISMS = tuple(m.value for m in Mechanism)

# generation headroom over the analytically required raw-corpus size
_RAW_SLACK = 1.3
_RECORD_FORMAT = "wordlearn-record-v1"


@dataclass(frozen=True)
class Condition:
    """One training condition: a length filter crossed with an uncertainty level."""

    length: str = "full"
    uncertainty: int = 0

    def __post_init__(self):
        if self.length not in LENGTH_CONDITIONS:
            raise ConfigError(f"length condition must be one of {LENGTH_CONDITIONS}")
        if self.uncertainty not in UNCERTAINTY_LEVELS:
            raise ConfigError(f"uncertainty level must be one of {UNCERTAINTY_LEVELS}")

    @property
    def label(self) -> str:
        return f"{self.length}:u{self.uncertainty}"


@dataclass
class ExperimentConfig:
    """Everything that determines a run; the digest changes iff any field does."""

    mechanisms: tuple[str, ...] = ALL_MECHANISMS
    conditions: tuple[Condition, ...] = (Condition(),)
    corpus_file: str | None = None
    lexicon_file: str | None = None
    corpus_spec: CorpusSpec | None = None
    n_pairs: int = 20000
    checkpoint_every: int = 500
    checkpoints: tuple[int, ...] | None = None
    theta: float = 0.7
    smoothing: float = 1e-5
    universe_size: int | None = None
    split: SplitSpec = field(default_factory=SplitSpec)
    seed: int = 1
    out_dir: str = "runs"

    def __post_init__(self):
        if not self.mechanisms:
            raise ConfigError("at least one mechanism is required")
        for tag in self.mechanisms:
            try:
                Mechanism.from_tag(tag)
            except ValueError as err:
                raise ConfigError(str(err)) from None
        if not self.conditions:
            raise ConfigError("at least one condition is required")
        has_file = self.corpus_file is not None
        has_spec = self.corpus_spec is not None
        if has_file == has_spec:
            raise ConfigError("configure exactly one corpus source: a file or a generator spec")
        if has_file and self.lexicon_file is None:
            raise ConfigError("a corpus file needs a gold lexicon file for evaluation")
        if self.n_pairs < 1:
            raise ConfigError("n_pairs must be at least 1")
        if self.checkpoints is None and self.checkpoint_every < 1:
            raise ConfigError("checkpoint_every must be at least 1")

    def schedule(self) -> tuple[int, ...]:
        if self.checkpoints is not None:
            sched = tuple(self.checkpoints)
            if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
                raise ConfigError("explicit checkpoint schedule must be non-empty and increasing")
            if sched[-1] > self.n_pairs:
                raise ConfigError("checkpoint beyond the end of training")
            if sched[-1] != self.n_pairs:
                sched = sched + (self.n_pairs,)
            return sched
        sched = tuple(range(self.checkpoint_every, self.n_pairs + 1, self.checkpoint_every))
        if not sched or sched[-1] != self.n_pairs:
            sched = sched + (self.n_pairs,)
        return sched

    def to_dict(self) -> dict:
        return {
            "mechanisms": list(self.mechanisms),
            "conditions": [{"length": c.length, "uncertainty": c.uncertainty} for c in self.conditions],
            "corpus_file": self.corpus_file,
            "lexicon_file": self.lexicon_file,
            "corpus_spec": None
            if self.corpus_spec is None
            else {
                "vocab_size": self.corpus_spec.vocab_size,
                "features_per_referent": list(self.corpus_spec.features_per_referent),
                "zipf_exponent": self.corpus_spec.zipf_exponent,
                "utterance_length": list(self.corpus_spec.utterance_length),
                "n_pairs": self.corpus_spec.n_pairs,
                "seed": self.corpus_spec.seed,
                "feature_pool": self.corpus_spec.feature_pool,
                "length_weights": self.corpus_spec.length_weights,
            },
            "n_pairs": self.n_pairs,
            "checkpoint_every": self.checkpoint_every,
            "checkpoints": None if self.checkpoints is None else list(self.checkpoints),
            "theta": self.theta,
            "smoothing": self.smoothing,
            "universe_size": self.universe_size,
            "split": {
                "kind": self.split.kind,
                "low_below": self.split.low_below,
                "high_above": self.split.high_above,
            },
            "seed": self.seed,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class BandSummary:
    mean_acq: float
    prop_learned: float
    n_words: int


@dataclass
class CheckpointSummary:
    t: int
    mean_acq: float
    prop_learned: float
    n_words: int
    bands: dict[str, BandSummary]


@dataclass
class TrainingRunResult:
    """Aggregates for one (mechanism x condition) training run."""

    mechanism: str
    length: str
    uncertainty: int
    checkpoints: list[CheckpointSummary]
    final_per_word: dict[str, float]
    missing_words: tuple[str, ...]

    @property
    def condition_label(self) -> str:
        return f"{self.length}:u{self.uncertainty}"

    @property
    def final(self) -> CheckpointSummary:
        return self.checkpoints[-1]


@dataclass
class RunRecord:
    """Complete result of run_experiment; wall clock stays out of the files."""

    config: ExperimentConfig
    config_digest: str
    corpus_digest: str
    runs: list[TrainingRunResult]
    emitted: list[str] = field(default_factory=list)
    wall_clock_s: float = 0.0


# ---------------------------------------------------------------------------
# corpus materialization
# ---------------------------------------------------------------------------


def _length_share(spec: CorpusSpec, length_condition: str) -> float:
    """Probability mass of the condition under the spec's length distribution."""
    lo, hi = spec.utterance_length
    lengths = range(lo, hi + 1)
    if spec.length_weights == "uniform":
        weights = {n: 1.0 for n in lengths}
    else:
        weights = {n: 1.0 / n for n in lengths}
    total = sum(weights.values())
    if length_condition == "short":
        kept = sum(w for n, w in weights.items() if n <= SHORT_MAX_LEN)
    elif length_condition == "long":
        kept = sum(w for n, w in weights.items() if n >= LONG_MIN_LEN)
    else:
        kept = total
    return kept / total


def required_raw_pairs(config: ExperimentConfig) -> int:
    """Raw pairs to generate so every condition can yield n_pairs training pairs."""
    assert config.corpus_spec is not None
    need = config.n_pairs
    for cond in config.conditions:
        base = config.n_pairs * (cond.uncertainty + 1)
        share = _length_share(config.corpus_spec, cond.length)
        if share <= 0.0:
            raise ConfigError(
                f"length condition {cond.length!r} is impossible for utterance "
                f"lengths {config.corpus_spec.utterance_length}"
            )
        need = max(need, math.ceil(base / share * _RAW_SLACK))
    return need


def _materialize_corpus(config: ExperimentConfig) -> tuple[Lexicon, list[InputPair], str]:
    """Produce (lexicon, raw pairs, corpus digest) from file or generator."""
    if config.corpus_file is not None:
        raw_bytes = Path(config.corpus_file).read_bytes()
        pairs = load_corpus(config.corpus_file)
        lexicon = load_lexicon(config.lexicon_file)
        digest = hashlib.sha256(raw_bytes).hexdigest()
        return lexicon, pairs, digest
    spec = config.corpus_spec
    raw_n = required_raw_pairs(config)
    gen_spec = CorpusSpec(
        vocab_size=spec.vocab_size,
        features_per_referent=spec.features_per_referent,
        zipf_exponent=spec.zipf_exponent,
        utterance_length=spec.utterance_length,
        n_pairs=raw_n,
        seed=spec.seed,
        feature_pool=spec.feature_pool,
        length_weights=spec.length_weights,
    )
    lexicon = generate_lexicon(gen_spec)
    pairs = generate_corpus(lexicon, gen_spec)
    descriptor = json.dumps(config.to_dict()["corpus_spec"], sort_keys=True) + f"|raw={raw_n}"
    digest = hashlib.sha256(descriptor.encode()).hexdigest()
    return lexicon, pairs, digest


def condition_stream(
    raw_pairs: list[InputPair], condition: Condition, n_pairs: int
) -> list[InputPair]:
    """Apply the condition's length filter then uncertainty injection, and
    truncate to the training length; errors list what is available."""
    pairs = raw_pairs
    if condition.length != "full":
        pairs = filter_by_length(pairs, condition.length)
    if condition.uncertainty > 0:
        pairs = inject_referential_uncertainty(pairs, condition.uncertainty)
    if len(pairs) < n_pairs:
        raise ConfigError(
            f"corpus yields only {len(pairs)} pairs under condition "
            f"'{condition.label}'; {n_pairs} are required"
        )
    return pairs[:n_pairs]


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _train_one(
    mechanism: str,
    condition: Condition,
    stream: list[InputPair],
    lexicon: Lexicon,
    config: ExperimentConfig,
    universe_size: int,
) -> TrainingRunResult:
    learner_config = LearnerConfig(
        mechanism=Mechanism.from_tag(mechanism),
        universe_size=universe_size,
        smoothing=config.smoothing,
    )
    freqs = word_frequencies(stream)
    schedule = set(config.schedule())
    state = MeaningState()
    summaries: list[CheckpointSummary] = []
    final_report: AcqReport | None = None
    for pair in stream:
        process_pair(state, learner_config, pair)
        if state.t in schedule:
            report = evaluate(state, learner_config, lexicon, config.theta)
            bands = split_report(report, config.split, freqs)
            summaries.append(
                CheckpointSummary(
                    t=state.t,
                    mean_acq=report.mean_acq,
                    prop_learned=report.prop_learned,
                    n_words=report.n_words,
                    bands={
                        name: BandSummary(b.mean_acq, b.prop_learned, b.n_words)
                        for name, b in bands.items()
                    },
                )
            )
            final_report = report
    assert final_report is not None
    return TrainingRunResult(
        mechanism=mechanism,
        length=condition.length,
        uncertainty=condition.uncertainty,
        checkpoints=summaries,
        final_per_word=final_report.per_word,
        missing_words=final_report.missing_words,
    )


def run_experiment(config: ExperimentConfig) -> RunRecord:
    """Train every (mechanism x condition), evaluate at checkpoints, write outputs.

    All runs see streams derived from one shared corpus instance, so
    mechanism comparisons are paired.
    """
    started = time.perf_counter()
    lexicon, raw_pairs, corpus_digest = _materialize_corpus(config)
    universe_size = (
        config.universe_size
        if config.universe_size is not None
        else 10 * len(lexicon.feature_universe)
    )
    runs: list[TrainingRunResult] = []
    for condition in config.conditions:
        stream = condition_stream(raw_pairs, condition, config.n_pairs)
        for mechanism in config.mechanisms:
            log.info("training %s on %s (%d pairs)", mechanism, condition.label, len(stream))
            runs.append(
                _train_one(mechanism, condition, stream, lexicon, config, universe_size)
            )
    record = RunRecord(
        config=config,
        config_digest=config.digest(),
        corpus_digest=corpus_digest,
        runs=runs,
        wall_clock_s=time.perf_counter() - started,
    )
    record.emitted = [str(p) for p in write_outputs(record, Path(config.out_dir))]
    log.info("experiment finished in %.1fs", record.wall_clock_s)
    return record


def _report_rows(record: RunRecord) -> list[dict]:
    rows = []
    for run in record.runs:
        for cp in run.checkpoints:
            base = AcqReport(cp.t, record.config.theta, {}, cp.mean_acq, cp.prop_learned, cp.n_words, cp.n_words == 0)
            rows.append(report_row(cp.t, run.mechanism, run.condition_label, "all", base))
            for band in ("low", "high"):
                summary = cp.bands[band]
                as_report = AcqReport(
                    cp.t, record.config.theta, {}, summary.mean_acq, summary.prop_learned, summary.n_words, summary.n_words == 0
                )
                rows.append(report_row(cp.t, run.mechanism, run.condition_label, band, as_report))
    return rows


def record_to_dict(record: RunRecord) -> dict:
    return {
        "format": _RECORD_FORMAT,
        "config": record.config.to_dict(),
        "config_digest": record.config_digest,
        "corpus_digest": record.corpus_digest,
        "runs": [
            {
                "mechanism": run.mechanism,
                "length": run.length,
                "uncertainty": run.uncertainty,
                "checkpoints": [
                    {
                        "t": cp.t,
                        "mean_acq": cp.mean_acq,
                        "prop_learned": cp.prop_learned,
                        "n_words": cp.n_words,
                        "bands": {
                            name: {
                                "mean_acq": b.mean_acq,
                                "prop_learned": b.prop_learned,
                                "n_words": b.n_words,
                            }
                            for name, b in cp.bands.items()
                        },
                    }
                    for cp in run.checkpoints
                ],
                "final_per_word": run.final_per_word,
                "missing_words": list(run.missing_words),
            }
            for run in record.runs
        ],
    }


def record_from_dict(data: dict) -> RunRecord:
    if data.get("format") != _RECORD_FORMAT:
        raise ConfigError(f"not a {_RECORD_FORMAT} document")
    cfg = data["config"]
    spec = cfg["corpus_spec"]
    config = ExperimentConfig(
        mechanisms=tuple(cfg["mechanisms"]),
        conditions=tuple(Condition(c["length"], c["uncertainty"]) for c in cfg["conditions"]),
        corpus_file=cfg["corpus_file"],
        lexicon_file=cfg["lexicon_file"],
        corpus_spec=None
        if spec is None
        else CorpusSpec(
            vocab_size=spec["vocab_size"],
            features_per_referent=tuple(spec["features_per_referent"]),
            zipf_exponent=spec["zipf_exponent"],
            utterance_length=tuple(spec["utterance_length"]),
            n_pairs=spec["n_pairs"],
            seed=spec["seed"],
            feature_pool=spec["feature_pool"],
            length_weights=spec["length_weights"],
        ),
        n_pairs=cfg["n_pairs"],
        checkpoint_every=cfg["checkpoint_every"],
        checkpoints=None if cfg["checkpoints"] is None else tuple(cfg["checkpoints"]),
        theta=cfg["theta"],
        smoothing=cfg["smoothing"],
        universe_size=cfg["universe_size"],
        split=SplitSpec(
            kind=cfg["split"]["kind"],
            low_below=cfg["split"]["low_below"],
            high_above=cfg["split"]["high_above"],
        ),
        seed=cfg["seed"],
    )
    runs = [
        TrainingRunResult(
            mechanism=r["mechanism"],
            length=r["length"],
            uncertainty=r["uncertainty"],
            checkpoints=[
                CheckpointSummary(
                    t=cp["t"],
                    mean_acq=cp["mean_acq"],
                    prop_learned=cp["prop_learned"],
                    n_words=cp["n_words"],
                    bands={
                        name: BandSummary(b["mean_acq"], b["prop_learned"], b["n_words"])
                        for name, b in cp["bands"].items()
                    },
                )
                for cp in r["checkpoints"]
            ],
            final_per_word=r["final_per_word"],
            missing_words=tuple(r["missing_words"]),
        )
        for r in data["runs"]
    ]
    return RunRecord(
        config=config,
        config_digest=data["config_digest"],
        corpus_digest=data["corpus_digest"],
        runs=runs,
    )


def write_outputs(record: RunRecord, out_dir: Path) -> list[Path]:
    """Write trajectory report (CSV + JSON-lines) and the run record."""
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _report_rows(record)
    csv_path = out_dir / "trajectory.csv"
    jsonl_path = out_dir / "trajectory.jsonl"
    record_path = out_dir / "record.json"
    write_report_csv(rows, csv_path)
    write_report_jsonl(rows, jsonl_path)
    record_path.write_text(
        json.dumps(record_to_dict(record), sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )
    return [csv_path, jsonl_path, record_path]


def load_record(path: str | Path) -> RunRecord:
    return record_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


@dataclass
class ComparisonTable:
    condition: str
    rows: list[dict]
    deltas: dict[tuple[str, str], float]

    def render(self) -> str:
        header = f"{'mechanism':<12} {'mean_acq':>9} {'prop_learned':>13} {'low':>8} {'high':>8}"
        lines = [f"condition: {self.condition}", header, "-" * len(header)]
        for row in self.rows:
            lines.append(
                f"{row['mechanism']:<12} {row['mean_acq']:>9.4f} {row['prop_learned']:>13.4f} "
                f"{row['band_low_mean_acq']:>8.4f} {row['band_high_mean_acq']:>8.4f}"
            )
        lines.append("")
        lines.append("pairwise mean_acq deltas:")
        for (a, b), delta in self.deltas.items():
            lines.append(f"  {a} - {b}: {delta:+.4f}")
        return "\n".join(lines)


def compare_mechanisms(records: Sequence[RunRecord], condition: str | None = None) -> ComparisonTable:
    """Tabulate final scores per mechanism across records sharing corpus and condition."""
    if not records:
        raise ConfigError("no records to compare")
    digests = {r.corpus_digest for r in records}
    if len(digests) > 1:
        raise ConfigError("records were produced from different corpora")
    labels = {run.condition_label for r in records for run in r.runs}
    if condition is None:
        if len(labels) > 1:
            raise ConfigError(
                f"records span conditions {sorted(labels)}; pick one to compare"
            )
        condition = labels.pop()
    rows = []
    for record in records:
        for run in record.runs:
            if run.condition_label != condition:
                continue
            final = run.final
            rows.append(
                {
                    "mechanism": run.mechanism,
                    "mean_acq": final.mean_acq,
                    "prop_learned": final.prop_learned,
                    "band_low_mean_acq": final.bands["low"].mean_acq,
                    "band_high_mean_acq": final.bands["high"].mean_acq,
                }
            )
    if not rows:
        raise ConfigError(f"no runs found for condition {condition!r}")
    deltas = {}
    for i, a in enumerate(rows):
        for b in rows[i + 1 :]:
            deltas[(a["mechanism"], b["mechanism"])] = a["mean_acq"] - b["mean_acq"]
    return ComparisonTable(condition, rows, deltas)


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------


def _write_plot_csv(path: Path, comment: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {comment}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def emit_plot_data(record: RunRecord, out_dir: str | Path) -> list[Path]:
    """Emit one tidy CSV per figure analogue, straight from record fields."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    trajectory_rows = [
        [run.mechanism, run.length, run.uncertainty, cp.t, _fmt(cp.mean_acq), _fmt(cp.prop_learned)]
        for run in record.runs
        for cp in run.checkpoints
    ]
    path = out / "plot_trajectory.csv"
    _write_plot_csv(
        path,
        "developmental curves: one row per mechanism x condition x checkpoint",
        ["mechanism", "length_condition", "uncertainty", "t", "mean_acq", "prop_learned"],
        trajectory_rows,
    )
    paths.append(path)

    freq_rows = [
        [run.mechanism, run.length, run.uncertainty, band, _fmt(run.final.bands[band].mean_acq), run.final.bands[band].n_words]
        for run in record.runs
        for band in ("low", "high")
    ]
    path = out / "plot_frequency_split.csv"
    _write_plot_csv(
        path,
        "final scores split over word frequency bands",
        ["mechanism", "length_condition", "uncertainty", "band", "mean_acq", "n_words"],
        freq_rows,
    )
    paths.append(path)

    mlu_rows = [
        [run.mechanism, run.length, _fmt(run.final.mean_acq)]
        for run in record.runs
        if run.length in ("short", "long") and run.uncertainty == 0
    ]
    path = out / "plot_mlu_split.csv"
    _write_plot_csv(
        path,
        "final scores under short (length <= 3) vs long (length >= 5) training corpora",
        ["mechanism", "length_condition", "mean_acq"],
        mlu_rows,
    )
    paths.append(path)

    mlu_freq_rows = [
        [run.mechanism, run.length, band, _fmt(run.final.bands[band].mean_acq)]
        for run in record.runs
        if run.length in ("short", "long") and run.uncertainty == 0
        for band in ("low", "high")
    ]
    path = out / "plot_mlu_frequency_split.csv"
    _write_plot_csv(
        path,
        "final scores split jointly over corpus length condition and frequency band",
        ["mechanism", "length_condition", "band", "mean_acq"],
        mlu_freq_rows,
    )
    paths.append(path)

    unc_rows = [
        [run.mechanism, run.uncertainty, _fmt(run.final.mean_acq)]
        for run in record.runs
        if run.length == "full"
    ]
    path = out / "plot_uncertainty.csv"
    _write_plot_csv(
        path,
        "final scores per referential-uncertainty level on the full corpus",
        ["mechanism", "uncertainty", "mean_acq"],
        unc_rows,
    )
    paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value config; later CLI flags override these values."""
    values: dict[str, str] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_RUN_KEYS = {
    "corpus": str, "lexicon": str, "mechanism": str, "condition": str,
    "uncertainty": str, "pairs": int, "theta": float, "seed": int,
    "checkpoints": str, "out": str, "smoothing": float, "universe_size": int,
    "split_low": int, "split_high": int, "vocab": int, "zipf": float,
    "len_min": int, "len_max": int, "feats_min": int, "feats_max": int,
    "pool": int, "length_weights": str,
}


def _merged_option(args: argparse.Namespace, file_values: dict[str, str], key: str, default):
    cli = getattr(args, key)
    if cli is not None:
        return cli
    if key in file_values:
        caster = _RUN_KEYS[key]
        try:
            return caster(file_values[key])
        except ValueError:
            raise ConfigError(f"config file value for {key!r} is not a valid {caster.__name__}")
    return default


def _parse_schedule(text: str) -> tuple[int | None, tuple[int, ...] | None]:
    """Returns (checkpoint_every, explicit_schedule)."""
    if text.startswith("every:"):
        try:
            return int(text.split(":", 1)[1]), None
        except ValueError:
            raise ConfigError(f"bad checkpoint spec {text!r}; use every:N or a comma list")
    try:
        explicit = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad checkpoint spec {text!r}; use every:N or a comma list")
    return None, explicit


def _split_csv(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wordlearn",
        description="Cross-situational word-learning simulator and experiment runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-corpus", help="generate a synthetic corpus and gold lexicon")
    gen.add_argument("--vocab", type=int, required=True)
    gen.add_argument("--zipf", type=float, default=1.0)
    gen.add_argument("--len-min", type=int, default=1)
    gen.add_argument("--len-max", type=int, default=8)
    gen.add_argument("--feats-min", type=int, default=3)
    gen.add_argument("--feats-max", type=int, default=8)
    gen.add_argument("--pool", type=int, default=None, help="feature pool size (default: derived)")
    gen.add_argument("--length-weights", choices=["uniform", "inverse"], default="uniform")
    gen.add_argument("--pairs", type=int, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True, help="corpus file; lexicon goes to OUT.lexicon")
    gen.add_argument("--lexicon-out", default=None)

    run = sub.add_parser("run", help="train and evaluate mechanisms over conditions")
    run.add_argument("--config", default=None, help="key=value config file; flags override")
    run.add_argument("--corpus", default=None, help="corpus file (else a corpus is generated)")
    run.add_argument("--lexicon", default=None, help="gold lexicon file for --corpus")
    run.add_argument("--mechanism", default=None, help="comma list: fas,no-comp,ref-comp,word-comp")
    run.add_argument("--condition", default=None, help="comma list of full,short,long")
    run.add_argument("--uncertainty", default=None, help="comma list of 0,1,2")
    run.add_argument("--pairs", type=int, default=None)
    run.add_argument("--theta", type=float, default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--checkpoints", default=None, help="every:N or comma list")
    run.add_argument("--smoothing", type=float, default=None)
    run.add_argument("--universe-size", type=int, default=None)
    run.add_argument("--split-low", type=int, default=None)
    run.add_argument("--split-high", type=int, default=None)
    run.add_argument("--vocab", type=int, default=None)
    run.add_argument("--zipf", type=float, default=None)
    run.add_argument("--len-min", type=int, default=None)
    run.add_argument("--len-max", type=int, default=None)
    run.add_argument("--feats-min", type=int, default=None)
    run.add_argument("--feats-max", type=int, default=None)
    run.add_argument("--pool", type=int, default=None)
    run.add_argument("--length-weights", choices=["uniform", "inverse"], default=None)
    run.add_argument("--out", default=None, help="output directory")

    cmp_p = sub.add_parser("compare", help="tabulate final scores across run records")
    cmp_p.add_argument("records", nargs="+", help="record.json paths")
    cmp_p.add_argument("--condition", default=None)
    cmp_p.add_argument("--out", default=None, help="optional CSV destination")

    plots = sub.add_parser("emit-plots", help="emit tidy per-figure CSVs from a run record")
    plots.add_argument("--record", required=True)
    plots.add_argument("--out", required=True)
    return parser


def _cmd_gen_corpus(args: argparse.Namespace) -> int:
    spec = CorpusSpec(
        vocab_size=args.vocab,
        features_per_referent=(args.feats_min, args.feats_max),
        zipf_exponent=args.zipf,
        utterance_length=(args.len_min, args.len_max),
        n_pairs=args.pairs,
        seed=args.seed,
        feature_pool=args.pool,
        length_weights=args.length_weights,
    )
    lexicon = generate_lexicon(spec)
    pairs = generate_corpus(lexicon, spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(pairs, out)
    lex_out = Path(args.lexicon_out) if args.lexicon_out else out.with_suffix(out.suffix + ".lexicon")
    write_lexicon(lexicon, lex_out)
    print(f"wrote {len(pairs)} pairs to {out} and {len(lexicon)} lexicon entries to {lex_out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    file_values = _parse_config_file(args.config) if args.config else {}
    get = lambda key, default: _merged_option(args, file_values, key, default)

    n_pairs = get("pairs", 20000)
    checkpoint_text = get("checkpoints", "every:500")
    every, explicit = _parse_schedule(checkpoint_text)
    mechanisms = tuple(_split_csv(get("mechanism", ",".join(ALL_MECHANISMS))))
    lengths = _split_csv(get("condition", "full"))
    try:
        levels = [int(v) for v in _split_csv(str(get("uncertainty", "0")))]
    except ValueError:
        raise ConfigError("uncertainty levels must be integers")
    conditions = tuple(Condition(length, level) for length in lengths for level in levels)

    corpus_file = get("corpus", None)
    spec = None
    if corpus_file is None:
        spec = CorpusSpec(
            vocab_size=get("vocab", 1000),
            features_per_referent=(get("feats_min", 3), get("feats_max", 8)),
            zipf_exponent=get("zipf", 1.0),
            utterance_length=(get("len_min", 1), get("len_max", 8)),
            n_pairs=n_pairs,
            seed=get("seed", 1),
            feature_pool=get("pool", None),
            length_weights=get("length_weights", "uniform"),
        )
    config = ExperimentConfig(
        mechanisms=mechanisms,
        conditions=conditions,
        corpus_file=corpus_file,
        lexicon_file=get("lexicon", None),
        corpus_spec=spec,
        n_pairs=n_pairs,
        checkpoint_every=every if every is not None else 500,
        checkpoints=explicit,
        theta=get("theta", 0.7),
        smoothing=get("smoothing", 1e-5),
        universe_size=get("universe_size", None),
        split=SplitSpec(
            low_below=get("split_low", 5),
            high_above=get("split_high", 10),
        ),
        seed=get("seed", 1),
        out_dir=get("out", "runs"),
    )
    record = run_experiment(config)
    print(f"config digest {record.config_digest[:16]}")
    for path in record.emitted:
        print(f"wrote {path}")
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    records = [load_record(p) for p in args.records]
    table = compare_mechanisms(records, condition=args.condition)
    print(table.render())
    if args.out:
        header = ["mechanism", "mean_acq", "prop_learned", "band_low_mean_acq", "band_high_mean_acq"]
        rows = [[r["mechanism"], _fmt(r["mean_acq"]), _fmt(r["prop_learned"]),
                 _fmt(r["band_low_mean_acq"]), _fmt(r["band_high_mean_acq"])] for r in table.rows]
        _write_plot_csv(Path(args.out), f"mechanism comparison, condition {table.condition}", header, rows)
        print(f"wrote {args.out}")
    return 0


def _cmd_emit_plots(args: argparse.Namespace) -> int:
    record = load_record(args.record)
    for path in emit_plot_data(record, args.out):
        print(f"wrote {path}")
    return 0


_COMMANDS = {
    "gen-corpus": _cmd_gen_corpus,
    "run": _cmd_run,
    "compare": _cmd_compare,
    "emit-plots": _cmd_emit_plots,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2
    except (CorpusFormatError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
