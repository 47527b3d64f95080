"""Command line entry point: ``qpai learn | gen | bench``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from .automata import Alphabet, dfa_to_dict, is_conforming, minimize, to_dot
from .harness import (KINDS, LEARNERS, BenchConfig, ConfigError, learn, parse_target,
                      run_bench, to_csv, to_json, to_markdown, write_reports)
from .learner import Hyperparams, accuracy
from .samples import SampleError, gen_characteristic, gen_random, read_sample, save_sample, tomita

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_NONCONFORMING = 0, 1, 2, 3


def _target(value: str) -> str:
    try:
        parse_target(value)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return value


def _default_seed() -> int:
    env = os.environ.get("QPAI_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise SystemExit(f"QPAI_SEED must be an integer, got {env!r}") from None


def _add_learner_flags(p: argparse.ArgumentParser) -> None:
    d = Hyperparams()
    p.add_argument("--episodes", type=int, default=d.episodes)
    p.add_argument("--alpha", type=float, default=d.alpha)
    p.add_argument("--gamma", type=float, default=d.gamma)
    p.add_argument("--eps-min", type=float, default=d.eps_min)
    p.add_argument("--reward", type=float, default=d.reward)
    p.add_argument("--reprocess-bound", type=int, default=d.reprocess_bound)
    p.add_argument("--bootstrap", choices=("row", "successor"), default=d.bootstrap)
    p.add_argument("--max-states", type=int, default=10)
    p.add_argument("--init-states", type=int, default=None,
                   help="initial state budget (default: length of the shortest word)")


def _hyperparams(args, seed: int) -> Hyperparams:
    return Hyperparams(alpha=args.alpha, gamma=args.gamma, eps_min=args.eps_min,
                       reward=args.reward, episodes=args.episodes,
                       reprocess_bound=args.reprocess_bound, seed=seed,
                       bootstrap=args.bootstrap)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpai", description="Passive DFA inference with Q-learning")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("learn", help="learn a DFA from a sample file")
    p.add_argument("--learner", choices=LEARNERS, default="qpai")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", type=Path, help="sample file")
    src.add_argument("--target", type=_target, help="learn from the characteristic set of tomitaK")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=Path("qpai-out"))
    p.add_argument("--format", choices=("csv", "md", "json"), default="json")
    _add_learner_flags(p)

    p = sub.add_parser("gen", help="generate a labeled sample for a Tomita target")
    p.add_argument("--target", type=_target, required=True)
    p.add_argument("--kind", choices=KINDS, default="characteristic")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")

    p = sub.add_parser("bench", help="run learners over targets and seeds")
    p.add_argument("--config", type=Path, help="JSON BenchConfig; flags below are ignored")
    p.add_argument("--target", type=_target, action="append", dest="targets")
    p.add_argument("--data", type=Path, action="append", default=[],
                   help="sample file used as an extra target")
    p.add_argument("--learner", choices=LEARNERS, action="append", dest="learners")
    p.add_argument("--seed", type=int, action="append", dest="seeds")
    p.add_argument("--kind", choices=KINDS, default="characteristic")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--test-count", type=int, default=500)
    p.add_argument("--test-max-len", type=int, default=15)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path, default=Path("qpai-bench"))
    p.add_argument("--format", choices=("csv", "md", "json"), default="md")
    _add_learner_flags(p)
    return parser


def cmd_learn(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    if args.data is not None:
        sample = read_sample(args.data)
        stem = args.data.stem
    else:
        sample = gen_characteristic(tomita(parse_target(args.target)), Alphabet.binary())
        stem = args.target
    if len(sample) == 0:
        raise SampleError("sample is empty")
    h = _hyperparams(args, seed)
    dfa, episodes, wall_ms = learn(args.learner, sample, h, args.max_states, args.init_states)
    conforming = is_conforming(dfa, sample)
    metrics = {
        "data": str(args.data or args.target),
        "learner": args.learner,
        "seed": seed,
        "acc_train": accuracy(dfa, sample),
        "dfa_size": minimize(dfa).n_states,
        "episodes": episodes,
        "wall_ms": wall_ms,
        "conforming": conforming,
        "hyperparams": asdict(h),
        "dfa": dfa_to_dict(dfa),
    }
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / f"{stem}.{args.learner}.dot").write_text(to_dot(dfa, sample.alphabet), encoding="utf-8")
    (args.out / f"{stem}.{args.learner}.json").write_text(json.dumps(metrics, indent=2) + "\n",
                                                          encoding="utf-8")
    if args.format == "json":
        print(json.dumps({k: v for k, v in metrics.items() if k != "dfa"}))
    else:
        cols = ["data", "learner", "seed", "acc_train", "dfa_size", "episodes", "wall_ms", "conforming"]
        if args.format == "csv":
            print(",".join(cols))
            print(",".join(str(metrics[c]) for c in cols))
        else:
            print("| " + " | ".join(cols) + " |")
            print("|" + "---|" * len(cols))
            print("| " + " | ".join(str(metrics[c]) for c in cols) + " |")
    return EXIT_OK if conforming else EXIT_NONCONFORMING


def cmd_gen(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    dfa = tomita(parse_target(args.target))
    if args.kind == "characteristic":
        sample = gen_characteristic(dfa, Alphabet.binary())
    else:
        sample = gen_random(dfa, args.count, args.max_len, seed, Alphabet.binary())
    text = save_sample(sample)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.config is not None:
        cfg = BenchConfig.load(args.config)
    else:
        targets = list(args.targets or []) + [str(p) for p in args.data]
        seeds = args.seeds if args.seeds else [_default_seed()]
        cfg = BenchConfig(
            targets=targets,
            learners=args.learners or list(LEARNERS),
            seeds=seeds,
            kind=args.kind,
            count=args.count,
            max_len=args.max_len,
            test_count=args.test_count,
            test_max_len=args.test_max_len,
            max_states=args.max_states,
            init_states=args.init_states,
            hyperparams=_hyperparams(args, 0),
            out=str(args.out),
            jobs=args.jobs,
        )
    rows = run_bench(cfg)
    write_reports(cfg, rows)
    render = {"csv": to_csv, "md": to_markdown, "json": to_json}[args.format]
    sys.stdout.write(render(rows))
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"learn": cmd_learn, "gen": cmd_gen, "bench": cmd_bench}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"qpai: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SampleError as exc:
        print(f"qpai: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # invalid hyperparameters or state bounds
        print(f"qpai: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qpai: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
