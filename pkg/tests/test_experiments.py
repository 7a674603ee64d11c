"""Experiment harness: streams, determinism, comparison, plots, CLI."""

import csv
import json
from pathlib import Path

import pytest

from wordlearn import (
    ConfigError,
    Condition,
    CorpusSpec,
    ExperimentConfig,
    compare_mechanisms,
    emit_plot_data,
    run_experiment,
)
from wordlearn.corpus import generate_corpus, generate_lexicon, write_corpus, write_lexicon
from wordlearn.experiments import (
    condition_stream,
    load_record,
    main,
    required_raw_pairs,
)


def tiny_config(out_dir, mechanisms=("word-comp",), conditions=(Condition(),), **kw):
    spec = CorpusSpec(
        vocab_size=25,
        features_per_referent=(2, 4),
        utterance_length=(1, 6),
        n_pairs=kw.pop("n_pairs", 300),
        seed=kw.pop("seed", 5),
        feature_pool=60,
    )
    return ExperimentConfig(
        mechanisms=tuple(mechanisms),
        conditions=tuple(conditions),
        corpus_spec=spec,
        n_pairs=spec.n_pairs,
        checkpoint_every=kw.pop("checkpoint_every", 100),
        out_dir=str(out_dir),
        **kw,
    )


# -- configuration -----------------------------------------------------------------


def test_config_requires_exactly_one_corpus_source(tmp_path):
    with pytest.raises(ConfigError, match="corpus source"):
        ExperimentConfig(corpus_file=None, corpus_spec=None, out_dir=str(tmp_path))


def test_config_file_corpus_needs_lexicon(tmp_path):
    with pytest.raises(ConfigError, match="lexicon"):
        ExperimentConfig(corpus_file="x.txt", out_dir=str(tmp_path))


def test_config_digest_tracks_every_field(tmp_path):
    base = tiny_config(tmp_path)
    assert base.digest() == tiny_config(tmp_path).digest()
    changed = tiny_config(tmp_path, theta=0.8)
    assert base.digest() != changed.digest()
    changed = tiny_config(tmp_path, seed=6)
    assert base.digest() != changed.digest()


def test_schedule_from_every_and_explicit(tmp_path):
    config = tiny_config(tmp_path, n_pairs=300, checkpoint_every=100)
    assert config.schedule() == (100, 200, 300)
    config = tiny_config(tmp_path, checkpoints=(50, 120))
    assert config.schedule() == (50, 120, 300)
    with pytest.raises(ConfigError):
        tiny_config(tmp_path, checkpoints=(120, 50)).schedule()
    with pytest.raises(ConfigError):
        tiny_config(tmp_path, checkpoints=(50, 400)).schedule()


def test_condition_validation():
    with pytest.raises(ConfigError):
        Condition("medium", 0)
    with pytest.raises(ConfigError):
        Condition("full", 4)
    assert Condition("short", 2).label == "short:u2"


# -- streams ------------------------------------------------------------------------


def _raw(n=600, seed=5):
    spec = CorpusSpec(
        vocab_size=25,
        features_per_referent=(2, 4),
        utterance_length=(1, 6),
        n_pairs=n,
        seed=seed,
        feature_pool=60,
    )
    lex = generate_lexicon(spec)
    return lex, generate_corpus(lex, spec)


def test_condition_stream_long_filters_lengths():
    _, raw = _raw()
    stream = condition_stream(raw, Condition("long", 0), 50)
    assert len(stream) == 50
    assert all(p.length >= 5 for p in stream)


def test_condition_stream_short_filters_lengths():
    _, raw = _raw()
    stream = condition_stream(raw, Condition("short", 0), 50)
    assert all(p.length <= 3 for p in stream)


def test_condition_stream_uncertainty_merges_scenes():
    _, raw = _raw()
    stream = condition_stream(raw, Condition("full", 2), 100)
    assert len(stream) == 100
    for k, pair in enumerate(stream):
        window = raw[3 * k : 3 * k + 3]
        assert pair.utterance == window[0].utterance
        merged = {r for p in window for r in p.scene}
        assert set(pair.scene) == merged
        assert len(pair.scene) >= len(window[0].scene)


def test_condition_stream_insufficient_corpus_reports_counts():
    _, raw = _raw(n=100)
    with pytest.raises(ConfigError, match=r"33 pairs .* 50 are required"):
        condition_stream(raw, Condition("full", 2), 50)


def test_required_raw_pairs_covers_conditions(tmp_path):
    config = tiny_config(
        tmp_path,
        conditions=(Condition("short", 1), Condition("long", 0)),
        n_pairs=300,
    )
    raw_n = required_raw_pairs(config)
    assert raw_n >= 2 * 300 * 2  # short keeps half the mass at lengths 1..6, doubled for stride


# -- run_experiment -------------------------------------------------------------------


def test_run_experiment_outputs(tmp_path):
    config = tiny_config(
        tmp_path / "out",
        mechanisms=("word-comp", "no-comp"),
        conditions=(Condition("full", 0),),
    )
    record = run_experiment(config)
    assert len(record.runs) == 2
    schedule = config.schedule()
    for run in record.runs:
        assert [cp.t for cp in run.checkpoints] == list(schedule)
        assert run.final.n_words > 0
    trajectory_csv = Path(config.out_dir) / "trajectory.csv"
    with open(trajectory_csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    # one row per run x checkpoint x band (all, low, high)
    assert len(rows) == 2 * len(schedule) * 3
    assert {r["band"] for r in rows} == {"all", "low", "high"}
    record_path = Path(config.out_dir) / "record.json"
    loaded = load_record(record_path)
    assert loaded.config_digest == record.config_digest
    assert loaded.runs[0].final.mean_acq == record.runs[0].final.mean_acq


def test_run_experiment_rerun_byte_identical(tmp_path):
    config_a = tiny_config(tmp_path / "a")
    config_b = tiny_config(tmp_path / "b")
    run_experiment(config_a)
    run_experiment(config_b)
    for name in ("trajectory.csv", "trajectory.jsonl", "record.json"):
        a = (Path(config_a.out_dir) / name).read_bytes()
        b = (Path(config_b.out_dir) / name).read_bytes()
        assert a == b, name


def test_run_experiment_from_corpus_file(tmp_path):
    lex, raw = _raw(n=400)
    corpus_path = tmp_path / "corpus.txt"
    lexicon_path = tmp_path / "corpus.lexicon"
    write_corpus(raw, corpus_path)
    write_lexicon(lex, lexicon_path)
    config = ExperimentConfig(
        mechanisms=("ref-comp",),
        conditions=(Condition(),),
        corpus_file=str(corpus_path),
        lexicon_file=str(lexicon_path),
        n_pairs=200,
        checkpoint_every=100,
        out_dir=str(tmp_path / "out"),
    )
    record = run_experiment(config)
    assert record.runs[0].final.n_words > 0


def test_run_experiment_corpus_file_too_short(tmp_path):
    lex, raw = _raw(n=50)
    corpus_path = tmp_path / "corpus.txt"
    lexicon_path = tmp_path / "corpus.lexicon"
    write_corpus(raw, corpus_path)
    write_lexicon(lex, lexicon_path)
    config = ExperimentConfig(
        mechanisms=("fas",),
        corpus_file=str(corpus_path),
        lexicon_file=str(lexicon_path),
        n_pairs=100,
        out_dir=str(tmp_path / "out"),
    )
    with pytest.raises(ConfigError, match="50"):
        run_experiment(config)


# -- comparison -----------------------------------------------------------------------


def test_compare_identical_records_zero_deltas(tmp_path):
    config = tiny_config(tmp_path / "out", mechanisms=("word-comp",))
    record = run_experiment(config)
    table = compare_mechanisms([record, record])
    assert all(delta == 0.0 for delta in table.deltas.values())
    assert "word-comp" in table.render()


def test_compare_mechanism_rows(tmp_path):
    config = tiny_config(tmp_path / "out", mechanisms=("word-comp", "no-comp", "fas"))
    record = run_experiment(config)
    table = compare_mechanisms([record])
    assert [r["mechanism"] for r in table.rows] == ["word-comp", "no-comp", "fas"]
    assert ("word-comp", "no-comp") in table.deltas


def test_compare_rejects_mismatched_corpora(tmp_path):
    rec_a = run_experiment(tiny_config(tmp_path / "a", seed=5))
    rec_b = run_experiment(tiny_config(tmp_path / "b", seed=6))
    with pytest.raises(ConfigError, match="different corpora"):
        compare_mechanisms([rec_a, rec_b])


def test_compare_needs_single_condition(tmp_path):
    config = tiny_config(
        tmp_path / "out", conditions=(Condition("full", 0), Condition("full", 1))
    )
    record = run_experiment(config)
    with pytest.raises(ConfigError, match="pick one"):
        compare_mechanisms([record])
    table = compare_mechanisms([record], condition="full:u1")
    assert table.condition == "full:u1"


# -- plot emission ----------------------------------------------------------------------


def test_emit_plot_data_files(tmp_path):
    config = tiny_config(
        tmp_path / "out",
        mechanisms=("word-comp", "no-comp"),
        conditions=(
            Condition("full", 0),
            Condition("full", 1),
            Condition("short", 0),
            Condition("long", 0),
        ),
    )
    record = run_experiment(config)
    paths = emit_plot_data(record, tmp_path / "plots")
    names = {p.name for p in paths}
    assert names == {
        "plot_trajectory.csv",
        "plot_frequency_split.csv",
        "plot_mlu_split.csv",
        "plot_mlu_frequency_split.csv",
        "plot_uncertainty.csv",
    }
    for path in paths:
        lines = path.read_text().splitlines()
        assert lines[0].startswith("# ")

    traj = (tmp_path / "plots" / "plot_trajectory.csv").read_text().splitlines()
    n_rows = len(traj) - 2
    assert n_rows == len(record.runs) * len(config.schedule())

    freq = (tmp_path / "plots" / "plot_frequency_split.csv").read_text().splitlines()
    bands = {line.split(",")[3] for line in freq[2:]}
    assert bands == {"low", "high"}

    unc = (tmp_path / "plots" / "plot_uncertainty.csv").read_text().splitlines()
    levels = {line.split(",")[1] for line in unc[2:]}
    assert levels == {"0", "1"}

    mlu = (tmp_path / "plots" / "plot_mlu_split.csv").read_text().splitlines()
    assert {line.split(",")[1] for line in mlu[2:]} == {"short", "long"}


# -- CLI ---------------------------------------------------------------------------------


def test_cli_gen_corpus_and_run(tmp_path, capsys):
    corpus_path = tmp_path / "corpus.txt"
    code = main(
        [
            "gen-corpus",
            "--vocab", "20",
            "--pairs", "200",
            "--seed", "7",
            "--len-min", "1",
            "--len-max", "4",
            "--feats-min", "2",
            "--feats-max", "3",
            "--out", str(corpus_path),
        ]
    )
    assert code == 0
    assert corpus_path.exists()
    lexicon_path = corpus_path.with_suffix(".txt.lexicon")
    assert lexicon_path.exists()

    out_dir = tmp_path / "run"
    code = main(
        [
            "run",
            "--corpus", str(corpus_path),
            "--lexicon", str(lexicon_path),
            "--mechanism", "word-comp",
            "--pairs", "150",
            "--checkpoints", "every:50",
            "--out", str(out_dir),
        ]
    )
    assert code == 0
    assert (out_dir / "record.json").exists()

    code = main(["compare", str(out_dir / "record.json")])
    assert code == 0
    assert "word-comp" in capsys.readouterr().out

    plots_dir = tmp_path / "plots"
    code = main(["emit-plots", "--record", str(out_dir / "record.json"), "--out", str(plots_dir)])
    assert code == 0
    assert (plots_dir / "plot_trajectory.csv").exists()


def test_cli_generated_corpus_run(tmp_path):
    out_dir = tmp_path / "run"
    code = main(
        [
            "run",
            "--vocab", "20",
            "--len-min", "1",
            "--len-max", "4",
            "--feats-min", "2",
            "--feats-max", "3",
            "--pool", "50",
            "--mechanism", "word-comp,fas",
            "--pairs", "120",
            "--checkpoints", "every:60",
            "--seed", "3",
            "--out", str(out_dir),
        ]
    )
    assert code == 0
    record = load_record(out_dir / "record.json")
    assert [r.mechanism for r in record.runs] == ["word-comp", "fas"]


def test_cli_invalid_mechanism_is_config_error(tmp_path):
    code = main(
        [
            "run",
            "--vocab", "10",
            "--mechanism", "psychic",
            "--pairs", "50",
            "--out", str(tmp_path / "x"),
        ]
    )
    assert code == 2


def test_cli_corpus_too_short_is_config_error(tmp_path):
    lex, raw = _raw(n=30)
    corpus_path = tmp_path / "c.txt"
    lex_path = tmp_path / "c.lexicon"
    write_corpus(raw, corpus_path)
    write_lexicon(lex, lex_path)
    code = main(
        [
            "run",
            "--corpus", str(corpus_path),
            "--lexicon", str(lex_path),
            "--pairs", "100",
            "--out", str(tmp_path / "x"),
        ]
    )
    assert code == 2


def test_cli_malformed_corpus_is_runtime_error(tmp_path):
    corpus_path = tmp_path / "bad.txt"
    corpus_path.write_text("no tab line\n")
    lex_path = tmp_path / "bad.lexicon"
    lex_path.write_text("w\tF\n")
    code = main(
        [
            "run",
            "--corpus", str(corpus_path),
            "--lexicon", str(lex_path),
            "--pairs", "1",
            "--out", str(tmp_path / "x"),
        ]
    )
    assert code == 1


def test_cli_config_file_with_flag_override(tmp_path):
    config_file = tmp_path / "run.cfg"
    config_file.write_text(
        "# experiment settings\n"
        "vocab = 20\n"
        "len-min = 1\n"
        "len-max = 4\n"
        "feats-min = 2\n"
        "feats-max = 3\n"
        "pairs = 120\n"
        "mechanism = fas\n"
        "checkpoints = every:60\n"
        "seed = 9\n"
    )
    out_dir = tmp_path / "out"
    code = main(
        [
            "run",
            "--config", str(config_file),
            "--mechanism", "word-comp",  # overrides the file value
            "--out", str(out_dir),
        ]
    )
    assert code == 0
    record = load_record(out_dir / "record.json")
    assert [r.mechanism for r in record.runs] == ["word-comp"]
    assert record.config.seed == 9
