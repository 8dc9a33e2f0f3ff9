"""Command-line entry point: ``rbmle-bandits <command> ...``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..bounds import BoundParams, g1_clamped, glm_regret_bound, linear_regret_bound, g0, g1, g2, t0
from ..config import ConfigError, load_config
from ..environment import build_dataset, save_dataset
from ..links import LinkFunction
from ..policies.glm import SolverError
from .bench import bench_scalability, parse_grid, timing_lines
from .presets import PRESET_NAMES, TABLE3_GRID, TABLE3_T, TABLE3_TRIALS, preset_config
from .runner import write_text_atomic, read_rounds, run_experiment
from .stats import check_bound, summarize


EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4


def _cmd_gen(args) -> int:
    config = load_config(args.config).validate()
    ds = build_dataset(config)
    save_dataset(ds, args.out)
    print(f"wrote {len(ds.trials)} trials to {args.out} (digest {ds.digest()})")
    return EXIT_OK


def _print_summary(result) -> None:
    for s in result.summaries:
        print(f"{s.policy:>10s}  mean={s.mean:10.3f}  std={s.std:10.3f}  "
              f"median={s.quantiles[0.5]:10.3f}  decision={s.mean_decision_time_ns / 1e3:9.1f}us")


def _cmd_run(args) -> int:
    config = load_config(args.config)
    result = run_experiment(config, args.out, data_dir=args.data, workers=args.workers)
    _print_summary(result)
    print(f"results in {result.out_dir}")
    return EXIT_OK


def _parse_levels(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError("quantiles", str(exc)) from exc


def _cmd_stats(args) -> int:
    in_dir = Path(args.input)
    rounds = read_rounds(in_dir / "rounds.csv")
    levels = _parse_levels(args.quantiles)
    policies = list(dict.fromkeys(p for _, p in rounds))
    print(",".join(["policy", "mean", "std", *[f"q{q:g}" for q in levels], "mean_decision_time_ns"]))
    for name in policies:
        keys = sorted(k for k in rounds if k[1] == name)
        finals = [rounds[k]["regret_cum"][-1] for k in keys]
        ns = np.concatenate([rounds[k]["decision_time_ns"] for k in keys])
        s = summarize(finals, name, levels, float(ns.mean()))
        print(",".join([name, repr(s.mean), repr(s.std), *[repr(s.quantiles[q]) for q in levels],
                        repr(s.mean_decision_time_ns)]))
    if args.check_bound is not None:
        manifest = json.loads((in_dir / "manifest.json").read_text())
        cfg = manifest["config"]
        link = LinkFunction(cfg["link"], cfg["clamp_radius"])
        params = BoundParams(d=cfg["d"], delta=args.check_bound, kappa_mu=link.kappa_mu, L_mu=link.L_mu)
        for name, kind in (("lin-rbmle", "linear"), ("glm-rbmle", "glm")):
            keys = sorted(k for k in rounds if k[1] == name)
            if not keys:
                continue
            # rounds.csv may be strided: compare at the recorded rounds only
            T = max(int(rounds[k]["t"][-1]) for k in keys)
            full = check_bound([np.zeros(T)], params, kind).bound
            dominated = [bool(np.all(rounds[k]["regret_cum"] <= full[rounds[k]["t"] - 1])) for k in keys]
            print(f"# bound coverage {name}: {sum(dominated) / len(dominated):.4f} "
                  f"({sum(dominated)}/{len(dominated)} trials, delta={args.check_bound})")
    return EXIT_OK


def _cmd_bench(args) -> int:
    grid = parse_grid(args.grid)
    rows = bench_scalability(grid, T=args.t, trials=args.trials, seed=args.seed)
    lines = timing_lines(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_text_atomic(out / "timing.csv", lines)
    print("\n".join(lines))
    return EXIT_OK


def _cmd_bound(args) -> int:
    link_default = LinkFunction("logistic") if args.policy == "glm-rbmle" else LinkFunction("identity")
    kappa = args.kappa if args.kappa is not None else link_default.kappa_mu
    lmu = args.lmu if args.lmu is not None else link_default.L_mu
    try:
        p = BoundParams(d=args.d, lam=args.lam, sigma=args.sigma, delta=args.delta, kappa_mu=kappa, L_mu=lmu)
    except ValueError as exc:
        raise ConfigError("bound", str(exc)) from exc
    if args.policy == "lin-rbmle":
        value = linear_regret_bound(args.t, p)
        parts = {"G0": g0(args.t, p), "G1": g1(args.t, p)}
    else:
        value = glm_regret_bound(args.t, p)
        parts = {"G1": g1(args.t, p), "G2": g2(args.t, p), "T0": t0(p)}
    print(f"bound={value!r}")
    for k, v in parts.items():
        print(f"{k}={v!r}")
    if g1_clamped(args.t, p):
        print("note=G1 log argument below 1, clamped to 0")
    return EXIT_OK


def _cmd_preset(args) -> int:
    if args.name == "table3":
        trials = args.trials or TABLE3_TRIALS
        rows = bench_scalability(parse_grid(TABLE3_GRID), T=args.horizon or TABLE3_T, trials=trials)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        lines = timing_lines(rows)
        write_text_atomic(out / "timing.csv", lines)
        print("\n".join(lines))
        return EXIT_OK
    config = preset_config(args.name, trials=args.trials, T=args.horizon)
    if args.write_config:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        path = Path(args.out) / f"{args.name}.json"
        path.write_text(json.dumps(config.to_dict(), indent=2) + "\n")
        print(f"wrote {path}")
        return EXIT_OK
    result = run_experiment(config, args.out, workers=args.workers)
    _print_summary(result)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rbmle-bandits", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="build and save a dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("run", help="run an experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--data", default=None, help="dataset directory (generated there if absent)")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("stats", help="summarize a results directory")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--quantiles", default="0.10,0.25,0.50,0.75,0.90,0.95")
    p.add_argument("--check-bound", type=float, default=None, metavar="DELTA",
                   help="also report regret-bound coverage at confidence DELTA")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("bench", help="per-decision timing grid")
    p.add_argument("--grid", default=TABLE3_GRID)
    p.add_argument("--t", type=int, default=TABLE3_T)
    p.add_argument("--trials", type=int, default=TABLE3_TRIALS)
    p.add_argument("--seed", type=int, default=46)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("bound", help="evaluate a regret bound")
    p.add_argument("--policy", choices=("lin-rbmle", "glm-rbmle"), required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--lmu", type=float, default=None)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("preset", help="run a named experiment preset")
    p.add_argument("--name", choices=PRESET_NAMES, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=None, help="override the number of trials")
    p.add_argument("--horizon", type=int, default=None, help="override T")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--write-config", action="store_true", help="only write the preset config as JSON")
    p.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"error: solver: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc, OSError) else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
