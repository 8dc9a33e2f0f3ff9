"""Replay datasets through policies and persist per-round and summary results."""

from __future__ import annotations

import json
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import rng
from ..config import ConfigError, ExperimentConfig
from ..environment import (
    TrialData,
    check_matches,
    combine_digests,
    generate_trial,
    load_trial,
    read_manifest,
    save_dataset,
    build_dataset,
)
from ..links import LinkFunction
from ..policies import REGISTRY, PolicyContext, make_policy
from ..schedules import BiasSchedule, EtaSchedule
from .stats import DEFAULT_QUANTILES, RegretSummary, summarize

RESULTS_VERSION = "rbmle-results/1"
ROUNDS_HEADER = "trial,t,policy,arm,regret_inst,regret_cum,decision_time_ns"
SUMMARY_HEADER = "policy,mean,std,q10,q25,q50,q75,q90,q95,mean_decision_time_ns"
GPUCB_BETA_FORM = "standard: 2*log(K*t^2*pi^2/(6*delta)); tuned: c*max(log t, 0)"


@dataclass
class TrialResult:
    trial: int
    policy: str
    arms: np.ndarray
    regret_inst: np.ndarray
    regret_cum: np.ndarray
    decision_ns: np.ndarray = field(repr=False)

    @property
    def final_regret(self) -> float:
        return float(self.regret_cum[-1]) if len(self.regret_cum) else 0.0


def run_trial(trial: TrialData, policy, T: int, theta_star, link: LinkFunction,
              name: str = "", record_timing: bool = True) -> TrialResult:
    """Play ``T`` rounds of ``trial`` with ``policy``.

    Only the ``select`` call is timed; reward lookup, the policy update and
    regret bookkeeping happen outside the timed region.
    """
    theta_star = np.asarray(theta_star, dtype=np.float64)
    if trial.T < T:
        raise ConfigError("T", f"dataset covers {trial.T} rounds, {T} requested")
    if trial.d != theta_star.shape[0]:
        raise ConfigError("d", f"dataset has d={trial.d}, theta_star has {theta_star.shape[0]}")
    arms = np.empty(T, dtype=np.int64)
    times = np.zeros(T, dtype=np.int64)
    rewards = trial.rewards
    clock = time.perf_counter_ns
    select, update = policy.select, policy.update
    if trial.static:
        ctx = trial.contexts
        for t in range(1, T + 1):
            t0 = clock()
            a = select(ctx, t)
            t1 = clock()
            arms[t - 1] = a
            times[t - 1] = t1 - t0
            update(ctx[a], rewards[t - 1, a])
    else:
        contexts = trial.contexts
        for t in range(1, T + 1):
            ctx = contexts[t - 1]
            t0 = clock()
            a = select(ctx, t)
            t1 = clock()
            arms[t - 1] = a
            times[t - 1] = t1 - t0
            update(ctx[a], rewards[t - 1, a])
    if not record_timing:
        times[:] = 0
    means = trial.mean_rewards(theta_star, link)[:T]
    inst = means.max(axis=1) - means[np.arange(T), arms]
    inst = np.maximum(inst, 0.0)
    return TrialResult(trial.index, name, arms, inst, np.cumsum(inst), times)


def policy_stream(seed: int, trial: int, name: str) -> rng.Stream:
    return rng.Stream(rng.stream_seed(rng.stream_seed(seed, trial), rng.name_tag(name)))


def build_policies(config: ExperimentConfig, trial: int) -> list[tuple[str, object]]:
    link = LinkFunction(config.link, config.clamp_radius)
    alpha = BiasSchedule.from_dict(config.alpha)
    eta = EtaSchedule.from_dict(config.eta)
    out = []
    for entry in config.policies:
        ctx = PolicyContext(config.d, config.K, config.T, link, alpha, eta,
                            policy_stream(config.seed, trial, entry.name),
                            np.asarray(config.theta_star, dtype=np.float64))
        out.append((entry.name, make_policy(entry.name, entry.params, ctx)))
    return out


def _run_one_trial(config_dict: dict, trial_index: int, data_dir: str | None):
    config = ExperimentConfig.from_dict(config_dict)
    if data_dir is None:
        trial = generate_trial(config.data_fields(), trial_index)
    else:
        trial = load_trial(data_dir, read_manifest(data_dir), trial_index)
    link = LinkFunction(config.link, config.clamp_radius)
    results = [
        run_trial(trial, policy, config.T, config.theta_star, link, name, config.record_timing)
        for name, policy in build_policies(config, trial_index)
    ]
    return trial.digest(), results


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[list[TrialResult]]  # [trial][policy]
    dataset_digest: str
    summaries: list[RegretSummary]
    out_dir: Path | None = None

    def by_policy(self, name: str) -> list[TrialResult]:
        return [r for per_trial in self.trials for r in per_trial if r.policy == name]

    def final_regrets(self, name: str) -> np.ndarray:
        return np.array([r.final_regret for r in self.by_policy(name)])


def _fmt(x: float) -> str:
    return repr(float(x))


def summary_rows(summaries: list[RegretSummary]) -> list[str]:
    rows = [SUMMARY_HEADER]
    for s in summaries:
        qs = [s.quantiles[q] for q in DEFAULT_QUANTILES]
        rows.append(",".join([s.policy, _fmt(s.mean), _fmt(s.std), *map(_fmt, qs), _fmt(s.mean_decision_time_ns)]))
    return rows


def round_lines(res: TrialResult, stride: int) -> list[str]:
    T = len(res.arms)
    ts = np.arange(stride, T + 1, stride)
    if len(ts) == 0 or ts[-1] != T:
        ts = np.append(ts, T)
    inst, cum, arms, ns = res.regret_inst.tolist(), res.regret_cum.tolist(), res.arms.tolist(), res.decision_ns.tolist()
    prefix = f"{res.trial},"
    name = res.policy
    return [f"{prefix}{t},{name},{arms[t - 1]},{inst[t - 1]!r},{cum[t - 1]!r},{ns[t - 1]}" for t in ts.tolist()]


def write_text_atomic(path: Path, lines) -> None:
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            for line in lines:
                fh.write(line)
                fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def summarize_experiment(config: ExperimentConfig, trials: list[list[TrialResult]]) -> list[RegretSummary]:
    out = []
    for j, entry in enumerate(config.policies):
        per = [trials[i][j] for i in range(len(trials))]
        mean_ns = float(np.mean(np.concatenate([r.decision_ns for r in per])))
        out.append(summarize([r.final_regret for r in per], entry.name, mean_decision_time_ns=mean_ns))
    return out


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None,
                   data_dir: str | Path | None = None, workers: int = 1) -> ExperimentResult:
    """Run every configured policy over every trial on identical sample paths.

    With ``data_dir`` the dataset is loaded from there, or generated and
    saved there first if the directory does not exist.  Without it each
    trial is generated in memory.  ``workers > 1`` runs trials in separate
    processes; results are folded in trial order, so files are identical
    to a serial run.
    """
    config.validate(REGISTRY)
    names = [p.name for p in config.policies]
    if not names:
        raise ConfigError("policies", "at least one policy is required")
    if len(set(names)) != len(names):
        raise ConfigError("policies", "policy names must be unique")
    if data_dir is not None:
        data_dir = Path(data_dir)
        if (data_dir / "manifest.json").exists():
            manifest = read_manifest(data_dir)
            check_matches(manifest, config)
        else:
            save_dataset(build_dataset(config), data_dir)
    cfg_dict = config.to_dict()
    data_arg = None if data_dir is None else str(data_dir)
    indices = range(config.trials)
    if workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_one_trial, [cfg_dict] * config.trials, indices,
                                    [data_arg] * config.trials))
    else:
        outputs = [_run_one_trial(cfg_dict, i, data_arg) for i in indices]
    digests = [o[0] for o in outputs]
    trials = [o[1] for o in outputs]
    result = ExperimentResult(config, trials, combine_digests(digests), summarize_experiment(config, trials))
    if out_dir is not None:
        result.out_dir = write_results(result, out_dir)
    return result


def write_results(result: ExperimentResult, out_dir: str | Path) -> Path:
    """Write rounds.csv, summary.csv and manifest.json; each file lands atomically."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = result.config

    def rounds():
        yield ROUNDS_HEADER
        for per_trial in result.trials:
            for res in per_trial:
                yield from round_lines(res, config.round_stride)

    write_text_atomic(out_dir / "rounds.csv", rounds())
    write_text_atomic(out_dir / "summary.csv", summary_rows(result.summaries))
    manifest = {
        "format_version": RESULTS_VERSION,
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "dataset_digest": result.dataset_digest,
        "metadata": {
            "gpucb_beta": GPUCB_BETA_FORM,
            "quantile_method": "linear interpolation between order statistics (type 7)",
            "std": "population (ddof=0)",
            "timing": "monotonic ns around select() only" if config.record_timing else "disabled (zeros)",
        },
        "files": ["rounds.csv", "summary.csv"],
    }
    write_text_atomic(out_dir / "manifest.json", [json.dumps(manifest, indent=2, sort_keys=True)])
    return out_dir


def read_rounds(path: str | Path) -> dict[tuple[int, str], dict[str, np.ndarray]]:
    """Parse rounds.csv into {(trial, policy): column arrays}."""
    import csv

    out: dict[tuple[int, str], dict[str, list]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or ",".join(reader.fieldnames) != ROUNDS_HEADER:
            raise ValueError(f"{path}: unexpected header")
        for row in reader:
            key = (int(row["trial"]), row["policy"])
            cols = out.setdefault(key, {"t": [], "regret_cum": [], "decision_time_ns": []})
            cols["t"].append(int(row["t"]))
            cols["regret_cum"].append(float(row["regret_cum"]))
            cols["decision_time_ns"].append(int(row["decision_time_ns"]))
    return {k: {c: np.asarray(v) for c, v in cols.items()} for k, cols in out.items()}
