import csv
import io
import json

import pytest

from qpai.automata import Alphabet, dfa_from_dict, is_conforming, minimize
from qpai.cli import main
from qpai.harness import (CSV_HEADER, BenchConfig, BenchRow, ConfigError, aggregate, format_pct,
                          parse_target, run_bench, to_csv, to_markdown)
from qpai.learner import Hyperparams, accuracy
from qpai.samples import gen_random, read_sample, save_sample, tomita, write_sample


def row(acc, seed=0, target="tomita1", learner="rpni"):
    return BenchRow(target, learner, seed, acc, acc, 2, 0, 5, acc == 1.0)


def data_rows(text):
    return [r for r in csv.reader(io.StringIO(text))][1:]


# -- config --------------------------------------------------------------------

def test_parse_target():
    assert parse_target("tomita3") == 3
    for bad in ("tomita0", "tomita9", "tomitax", "t3"):
        with pytest.raises(ConfigError):
            parse_target(bad)


@pytest.mark.parametrize("change", [
    {"targets": []}, {"learners": ["lstar"]}, {"seeds": []}, {"kind": "mixed"},
    {"count": 0}, {"max_states": 0}, {"jobs": 0}, {"targets": ["nope.sample"]},
])
def test_config_validation(change):
    cfg = BenchConfig(targets=["tomita1"])
    for key, value in change.items():
        setattr(cfg, key, value)
    with pytest.raises(ConfigError):
        cfg.validate()


def test_config_from_dict():
    cfg = BenchConfig.from_dict({"targets": ["tomita2"], "seeds": [1, 2],
                                 "hyperparams": {"episodes": 5}})
    assert cfg.hyperparams == Hyperparams(episodes=5)
    with pytest.raises(ConfigError):
        BenchConfig.from_dict({"targets": ["tomita2"], "colour": "red"})
    with pytest.raises(ConfigError):
        BenchConfig.from_dict({"targets": ["tomita2"], "hyperparams": {"alpha": 7}})


# -- aggregation -----------------------------------------------------------------

def test_format_pct_examples():
    assert format_pct([1.0, 1.0, 1.0]) == "100.0 ± 0.00"
    assert format_pct([0.9, 1.0]) == "95.0 ± 7.07"
    assert format_pct([0.5]) == "50.0 ± 0.00"


def test_aggregate_counts_conforming():
    agg = aggregate([row(1.0, 0), row(0.9, 1)])
    assert agg == [["tomita1", "rpni", "all", "95.0 ± 7.07", "95.0 ± 7.07", "2.0", "0.0", "5", "1/2"]]


def test_csv_row_counts():
    text = to_csv([row(1.0, s) for s in range(3)])
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 3 + 1
    assert lines[-1].split(",")[2] == "all"


def test_markdown_has_one_line_per_group():
    md = to_markdown([row(1.0), row(1.0, learner="qpai")])
    assert len(md.strip().splitlines()) == 4


# -- bench runs ------------------------------------------------------------------

def small_cfg(tmp_path, **kw):
    base = dict(targets=["tomita1", "tomita4"], learners=["rpni", "qpai"], seeds=[0, 1],
                kind="random", count=25, max_len=6, test_count=40, test_max_len=8,
                max_states=3, hyperparams=Hyperparams(episodes=10), out=str(tmp_path))
    base.update(kw)
    return BenchConfig(**base)


def test_bench_artifacts_recompute_metrics(tmp_path):
    cfg = small_cfg(tmp_path)
    rows = run_bench(cfg)
    assert len(rows) == 2 * 2 * 2
    for r in rows:
        slug = f"{r.target}_{r.learner}_s{r.seed}"
        dfa = dfa_from_dict(json.loads((tmp_path / "dfa" / f"{slug}.json").read_text()))
        train = read_sample(tmp_path / "data" / f"{r.target}_s{r.seed}_train.sample")
        test = read_sample(tmp_path / "data" / f"{r.target}_s{r.seed}_test.sample")
        assert accuracy(dfa, train) == r.acc_train
        assert accuracy(dfa, test) == r.acc_test
        assert is_conforming(dfa, train) == r.conforming
        assert minimize(dfa).n_states == r.dfa_size
        assert not set(train.words) & set(test.words)


def test_bench_parallel_matches_sequential(tmp_path):
    seq = run_bench(small_cfg(tmp_path / "a", jobs=1))
    par = run_bench(small_cfg(tmp_path / "b", jobs=2))
    strip = lambda rs: sorted((r.target, r.learner, r.seed, r.acc_train, r.acc_test, r.dfa_size,
                               r.episodes, r.conforming) for r in rs)
    assert strip(seq) == strip(par)


def test_bench_sample_file_target(tmp_path):
    path = tmp_path / "t6.sample"
    write_sample(gen_random(tomita(6), 30, 6, seed=2), path)
    rows = run_bench(small_cfg(tmp_path / "o", targets=[str(path)], learners=["rpni"], seeds=[0]))
    assert rows[0].acc_train == 1.0 and rows[0].acc_test is None


# -- CLI ----------------------------------------------------------------------

def test_cli_learn_conforming(tmp_path, capsys):
    data = tmp_path / "t1.sample"
    write_sample(gen_random(tomita(1), 30, 6, seed=1), data)
    code = main(["learn", "--learner", "qpai", "--data", str(data), "--seed", "1",
                 "--out", str(tmp_path / "out")])
    assert code == 0
    assert (tmp_path / "out" / "t1.qpai.dot").read_text().startswith("digraph")
    metrics = json.loads((tmp_path / "out" / "t1.qpai.json").read_text())
    assert metrics["conforming"] is True and metrics["seed"] == 1
    assert json.loads(capsys.readouterr().out)["acc_train"] == 1.0


def test_cli_learn_nonconforming(tmp_path):
    data = tmp_path / "t5.sample"
    write_sample(gen_random(tomita(5), 40, 6, seed=0), data)
    code = main(["learn", "--data", str(data), "--max-states", "1", "--init-states", "1",
                 "--episodes", "2", "--out", str(tmp_path)])
    assert code == 3


def test_cli_learn_missing_file(tmp_path):
    assert main(["learn", "--data", str(tmp_path / "none.sample"), "--out", str(tmp_path)]) == 1


def test_cli_learn_malformed_file(tmp_path):
    bad = tmp_path / "bad.sample"
    bad.write_text("3 2\n1 1 0\n")
    assert main(["learn", "--data", str(bad), "--out", str(tmp_path)]) == 1


def test_cli_unknown_learner(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["learn", "--learner", "lstar", "--target", "tomita1"])
    assert exc.value.code == 2


def test_cli_bad_hyperparameter(tmp_path):
    code = main(["learn", "--target", "tomita1", "--alpha", "3", "--out", str(tmp_path)])
    assert code == 2


def test_cli_seed_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("QPAI_SEED", "4")
    assert main(["learn", "--learner", "rpni", "--target", "tomita2", "--out", str(tmp_path)]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 4


def test_cli_gen_characteristic(tmp_path):
    out = tmp_path / "t3.sample"
    assert main(["gen", "--target", "tomita3", "--kind", "characteristic", "--out", str(out)]) == 0
    assert is_conforming(tomita(3), read_sample(out))


def test_cli_gen_random_deterministic(tmp_path, capsys):
    args = ["gen", "--target", "tomita1", "--kind", "random", "--count", "100",
            "--max-len", "12", "--seed", "5"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    sample = gen_random(tomita(1), 100, 12, 5, Alphabet.binary())
    assert first == save_sample(sample)


def test_cli_gen_bad_target():
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--target", "tomita9"])
    assert exc.value.code == 2


def test_cli_bench_rows(tmp_path, capsys):
    code = main(["bench", "--target", "tomita2", "--learner", "rpni", "--seed", "0", "--seed", "1",
                 "--seed", "2", "--format", "csv", "--out", str(tmp_path)])
    assert code == 0
    rows = data_rows(capsys.readouterr().out)
    assert len(rows) == 3 + 1
    assert (tmp_path / "metrics.csv").exists() and (tmp_path / "summary.md").exists()


def test_cli_bench_config_file(tmp_path, capsys):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"targets": ["tomita6"], "learners": ["rpni"], "seeds": [3],
                               "out": str(tmp_path / "o")}))
    assert main(["bench", "--config", str(cfg), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)[0]["target"] == "tomita6"


def test_cli_bench_bad_config(tmp_path):
    cfg = tmp_path / "bench.json"
    cfg.write_text(json.dumps({"targets": ["tomita6"], "learners": ["lstar"]}))
    assert main(["bench", "--config", str(cfg)]) == 2
