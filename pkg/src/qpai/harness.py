"""Benchmark driver: datasets, learner runs over a seed grid, and reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .automata import Alphabet, Dfa, dfa_to_dict, is_conforming, minimize, to_dot
from .learner import Hyperparams, accuracy, infer
from .rpni import rpni
from .samples import Sample, gen_characteristic, gen_random, read_sample, tomita, write_sample

log = logging.getLogger(__name__)

LEARNERS = ("qpai", "rpni")
KINDS = ("characteristic", "random")
CSV_HEADER = ["target", "learner", "seed", "acc_train", "acc_test", "dfa_size",
              "episodes", "wall_ms", "conforming"]
TEST_SEED_OFFSET = 1_000_000


class ConfigError(ValueError):
    pass


def parse_target(name: str) -> int:
    """``"tomita3"`` -> 3."""
    if name.startswith("tomita"):
        try:
            k = int(name[len("tomita"):])
        except ValueError:
            k = 0
        if 1 <= k <= 7:
            return k
    raise ConfigError(f"unknown target {name!r}; expected tomita1..tomita7")


@dataclass
class BenchConfig:
    targets: list[str]
    learners: list[str] = field(default_factory=lambda: ["qpai", "rpni"])
    seeds: list[int] = field(default_factory=lambda: [0])
    kind: str = "characteristic"
    count: int = 200
    max_len: int = 12
    test_count: int = 500
    test_max_len: int = 15
    max_states: int = 10
    init_states: Optional[int] = None
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    out: Optional[str] = None
    jobs: int = 1

    def validate(self) -> None:
        if not self.targets:
            raise ConfigError("no targets given")
        if not self.learners:
            raise ConfigError("no learners given")
        if not self.seeds:
            raise ConfigError("no seeds given")
        for t in self.targets:
            if not t.startswith("tomita") and not Path(t).is_file():
                raise ConfigError(f"target {t!r} is neither tomita1..7 nor a sample file")
            if t.startswith("tomita"):
                parse_target(t)
        for name in self.learners:
            if name not in LEARNERS:
                raise ConfigError(f"unknown learner {name!r}")
        if self.kind not in KINDS:
            raise ConfigError(f"unknown dataset kind {self.kind!r}")
        if self.count < 1 or self.max_len < 0 or self.test_count < 0 or self.test_max_len < 0:
            raise ConfigError("sample sizes must be non-negative (count positive)")
        if self.max_states < 1 or (self.init_states is not None and self.init_states < 1):
            raise ConfigError("state bounds must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")

    @classmethod
    def from_dict(cls, data: dict) -> "BenchConfig":
        data = dict(data)
        hp = data.pop("hyperparams", {}) or {}
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            cfg = cls(hyperparams=Hyperparams(**hp), **data)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "BenchConfig":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


@dataclass
class BenchRow:
    target: str
    learner: str
    seed: int
    acc_train: float
    acc_test: Optional[float]
    dfa_size: int
    episodes: int
    wall_ms: int
    conforming: bool

    def csv_fields(self) -> list[str]:
        return [self.target, self.learner, str(self.seed), f"{self.acc_train:.6f}",
                "" if self.acc_test is None else f"{self.acc_test:.6f}",
                str(self.dfa_size), str(self.episodes), str(self.wall_ms),
                str(self.conforming).lower()]


def datasets(cfg: BenchConfig, target: str, seed: int) -> tuple[Sample, Optional[Sample], Optional[Dfa]]:
    """Training sample, disjoint labeled test sample, and target DFA (if known)."""
    if not target.startswith("tomita"):
        return read_sample(target), None, None
    dfa = tomita(parse_target(target))
    alphabet = Alphabet.binary()
    if cfg.kind == "characteristic":
        train = gen_characteristic(dfa, alphabet)
    else:
        train = gen_random(dfa, cfg.count, cfg.max_len, seed, alphabet)
    test = None
    if cfg.test_count:
        test = gen_random(dfa, cfg.test_count, cfg.test_max_len, seed + TEST_SEED_OFFSET,
                          alphabet, exclude=train.words)
    return train, test, dfa


def learn(learner: str, sample: Sample, h: Hyperparams, max_states: int,
          init_states: Optional[int] = None) -> tuple[Dfa, int, int]:
    """Run one learner; returns (dfa, episodes used, wall milliseconds)."""
    start = time.perf_counter()
    if learner == "qpai":
        if init_states is not None:
            max_states = max(max_states, init_states)
        else:
            max_states = max(max_states, sample.min_length(), 1)
        dfa, m = infer(sample.alphabet, sample, h, max_states=max_states, init_states=init_states)
        episodes = m.episodes
    elif learner == "rpni":
        dfa = rpni(sample)
        episodes = 0
    else:
        raise ConfigError(f"unknown learner {learner!r}")
    return dfa, episodes, int((time.perf_counter() - start) * 1000)


def _slug(target: str) -> str:
    return target if target.startswith("tomita") else Path(target).stem


def run_one(cfg: BenchConfig, target: str, learner: str, seed: int) -> BenchRow:
    train, test, _ = datasets(cfg, target, seed)
    h = replace(cfg.hyperparams, seed=seed)
    dfa, episodes, wall_ms = learn(learner, train, h, cfg.max_states, cfg.init_states)
    row = BenchRow(
        target=target,
        learner=learner,
        seed=seed,
        acc_train=accuracy(dfa, train),
        acc_test=accuracy(dfa, test) if test is not None and len(test) else None,
        dfa_size=minimize(dfa).n_states,
        episodes=episodes,
        wall_ms=wall_ms,
        conforming=is_conforming(dfa, train),
    )
    if cfg.out:
        out = Path(cfg.out)
        stem = f"{_slug(target)}_{learner}_s{seed}"
        (out / "dfa").mkdir(parents=True, exist_ok=True)
        (out / "data").mkdir(parents=True, exist_ok=True)
        (out / "dfa" / f"{stem}.dot").write_text(to_dot(dfa, train.alphabet), encoding="utf-8")
        (out / "dfa" / f"{stem}.json").write_text(json.dumps(dfa_to_dict(dfa)), encoding="utf-8")
        write_sample(train, out / "data" / f"{_slug(target)}_s{seed}_train.sample")
        if test is not None:
            write_sample(test, out / "data" / f"{_slug(target)}_s{seed}_test.sample")
    log.info("%s %s seed=%d acc_train=%.3f conforming=%s", target, learner, seed,
             row.acc_train, row.conforming)
    return row


def _run_task(args) -> BenchRow:
    return run_one(*args)


def run_bench(cfg: BenchConfig) -> list[BenchRow]:
    """Evaluate every (target, learner, seed) cell; rows come back in grid order."""
    cfg.validate()
    tasks = [(cfg, t, lr, s) for t in cfg.targets for lr in cfg.learners for s in cfg.seeds]
    if cfg.jobs == 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(_run_task, tasks))


def mean_sd(values: list[float]) -> tuple[float, float]:
    """Mean and sample (n-1) standard deviation; sd is 0 for a single value."""
    mean = statistics.fmean(values)
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, sd


def format_pct(values: list[float]) -> str:
    mean, sd = mean_sd([100 * v for v in values])
    return f"{mean:.1f} ± {sd:.2f}"


def aggregate(rows: list[BenchRow]) -> list[list[str]]:
    """One summary row per (target, learner), in first-seen order."""
    groups: dict[tuple[str, str], list[BenchRow]] = {}
    for r in rows:
        groups.setdefault((r.target, r.learner), []).append(r)
    out = []
    for (target, learner), rs in groups.items():
        tests = [r.acc_test for r in rs if r.acc_test is not None]
        out.append([
            target, learner, "all",
            format_pct([r.acc_train for r in rs]),
            format_pct(tests) if tests else "",
            f"{statistics.fmean(r.dfa_size for r in rs):.1f}",
            f"{statistics.fmean(r.episodes for r in rs):.1f}",
            str(round(statistics.fmean(r.wall_ms for r in rs))),
            f"{sum(r.conforming for r in rs)}/{len(rs)}",
        ])
    return out


def to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    for agg in aggregate(rows):
        w.writerow(agg)
    return buf.getvalue()


def to_markdown(rows: list[BenchRow]) -> str:
    head = ["target", "learner", "train acc (%)", "test acc (%)", "DFA size",
            "episodes", "time (ms)", "conforming"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for agg in aggregate(rows):
        target, learner, _, acc_train, acc_test, size, eps, ms, conf = agg
        lines.append(f"| {target} | {learner} | {acc_train} | {acc_test or 'n/a'} | {size} "
                     f"| {eps} | {ms} | {conf} |")
    return "\n".join(lines) + "\n"


def to_json(rows: list[BenchRow]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


def write_reports(cfg: BenchConfig, rows: list[BenchRow]) -> None:
    if not cfg.out:
        return
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.csv").write_text(to_csv(rows), encoding="utf-8")
    (out / "summary.md").write_text(to_markdown(rows), encoding="utf-8")
    (out / "metrics.json").write_text(to_json(rows), encoding="utf-8")
