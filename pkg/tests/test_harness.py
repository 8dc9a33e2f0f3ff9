import json
import math

import numpy as np
import pytest

from rbmle_bandits.bounds import BoundParams
from rbmle_bandits.config import ConfigError, ExperimentConfig, PolicySpec
from rbmle_bandits.environment import build_dataset, generate_trial
from rbmle_bandits.harness import cli
from rbmle_bandits.harness.bench import BENCH_POLICIES, bench_scalability, parse_grid
from rbmle_bandits.harness.presets import PRESET_NAMES, preset_config
from rbmle_bandits.harness.runner import build_policies, read_rounds, run_experiment, run_trial
from rbmle_bandits.harness.stats import check_bound, summarize
from rbmle_bandits.links import IDENTITY
from rbmle_bandits.policies.glm import SolverError


def config(**kw) -> ExperimentConfig:
    base = dict(K=5, d=3, T=200, trials=3, theta_star=[-0.3, 0.5, 0.8], seed=46,
                policies=[PolicySpec("lin-rbmle"), PolicySpec("lin-ucb"), PolicySpec("lin-ts")],
                record_timing=False)
    base.update(kw)
    return ExperimentConfig(**base).validate()


class Recorder:
    """Wraps a policy and logs every reward it is shown."""

    def __init__(self, inner, trial):
        self.inner, self.trial, self.seen, self.t = inner, trial, {}, 0

    def select(self, contexts, t):
        self.t = t
        self.arm = self.inner.select(contexts, t)
        return self.arm

    def update(self, x, r):
        self.seen[(self.t, self.arm)] = r
        self.inner.update(x, r)


# -- replay ------------------------------------------------------------------

@pytest.mark.parametrize("mode", ["static", "time-varying"])
def test_oracle_has_zero_regret(mode):
    cfg = config(context_mode=mode, policies=[PolicySpec("oracle")])
    res = run_experiment(cfg)
    assert all(r.final_regret == 0.0 for r in res.by_policy("oracle"))


def test_uniform_regret_matches_expectation():
    cfg = config(K=6, T=10_000, trials=1, context_mode="time-varying", policies=[PolicySpec("uniform")])
    trial = generate_trial(cfg.data_fields(), 0)
    means = trial.mean_rewards(np.asarray(cfg.theta_star), IDENTITY)
    gaps = means.max(axis=1, keepdims=True) - means
    expected = gaps.mean(axis=1).sum()
    sigma = math.sqrt(gaps.var(axis=1).sum())
    got = run_experiment(cfg).final_regrets("uniform")[0]
    assert abs(got - expected) < 3 * sigma


def test_same_policy_same_arms():
    cfg = config()
    trial = generate_trial(cfg.data_fields(), 1)
    runs = [run_trial(trial, dict(build_policies(cfg, 1))["lin-ts"], cfg.T, cfg.theta_star, IDENTITY)
            for _ in range(2)]
    np.testing.assert_array_equal(runs[0].arms, runs[1].arms)


def test_policies_share_sample_path():
    cfg = config(policies=[PolicySpec("lin-ucb"), PolicySpec("uniform"), PolicySpec("lin-ts")])
    trial = generate_trial(cfg.data_fields(), 0)
    recorders = [Recorder(p, trial) for _, p in build_policies(cfg, 0)]
    for rec in recorders:
        run_trial(trial, rec, cfg.T, cfg.theta_star, IDENTITY)
    shared = 0
    for (t, a), r in recorders[0].seen.items():
        for other in recorders[1:]:
            if (t, a) in other.seen:
                assert other.seen[(t, a)] == r
                shared += 1
        assert r == trial.reward(t, a)
    assert shared > 0


def test_minimal_run(tmp_path):
    cfg = config(T=1, trials=1)
    res = run_experiment(cfg, tmp_path)
    rows = (tmp_path / "rounds.csv").read_text().splitlines()
    assert len(rows) == 1 + len(cfg.policies)
    assert all(len(per) == 3 for per in res.trials)


def test_rerun_is_byte_identical(tmp_path):
    cfg = config(round_stride=7)
    run_experiment(cfg, tmp_path / "a")
    run_experiment(cfg, tmp_path / "b")
    for name in ("rounds.csv", "summary.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_parallel_matches_serial(tmp_path):
    cfg = config(trials=4, context_mode="time-varying")
    run_experiment(cfg, tmp_path / "serial")
    run_experiment(cfg, tmp_path / "parallel", workers=2)
    for name in ("rounds.csv", "summary.csv", "manifest.json"):
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()


def test_saved_dataset_gives_same_results(tmp_path):
    cfg = config()
    mem = run_experiment(cfg, tmp_path / "mem")
    disk = run_experiment(cfg, tmp_path / "disk", data_dir=tmp_path / "data")
    again = run_experiment(cfg, tmp_path / "again", data_dir=tmp_path / "data")
    assert mem.dataset_digest == disk.dataset_digest == build_dataset(cfg).digest()
    assert (tmp_path / "mem" / "summary.csv").read_bytes() == (tmp_path / "again" / "summary.csv").read_bytes()


def test_dataset_mismatch_is_config_error(tmp_path):
    run_experiment(config(), data_dir=tmp_path / "data")
    with pytest.raises(ConfigError):
        run_experiment(config(T=150), data_dir=tmp_path / "data")


def test_dimension_mismatch_is_config_error():
    trial = generate_trial(config().data_fields(), 0)
    pol = dict(build_policies(config(), 0))["lin-ucb"]
    with pytest.raises(ConfigError):
        run_trial(trial, pol, 50, [0.1, 0.2], IDENTITY)
    with pytest.raises(ConfigError):
        run_trial(trial, pol, 500, [0.1, 0.2, 0.3], IDENTITY)


def test_duplicate_or_unknown_policy_is_rejected():
    with pytest.raises(ConfigError):
        run_experiment(config(policies=[PolicySpec("lin-ucb"), PolicySpec("lin-ucb")]))
    with pytest.raises(ConfigError):
        run_experiment(config(policies=[PolicySpec("bucb")]))


def test_rounds_file_layout(tmp_path):
    cfg = config(T=25, round_stride=10)
    res = run_experiment(cfg, tmp_path)
    rounds = read_rounds(tmp_path / "rounds.csv")
    assert set(rounds) == {(i, p.name) for i in range(3) for p in cfg.policies}
    for (i, name), cols in rounds.items():
        assert cols["t"].tolist() == [10, 20, 25]
        assert cols["regret_cum"][-1] == res.trials[i][[p.name for p in cfg.policies].index(name)].final_regret
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["format_version"] == "rbmle-results/1"
    assert manifest["dataset_digest"] == res.dataset_digest


def test_timing_recorded_only_when_enabled():
    cfg = config(trials=1, record_timing=True)
    res = run_experiment(cfg)
    assert all(np.all(r.decision_ns > 0) for r in res.trials[0])
    res = run_experiment(config(trials=1))
    assert all(np.all(r.decision_ns == 0) for r in res.trials[0])


def test_glm_policies_run():
    cfg = config(d=3, T=60, trials=2, link="logistic", policies=[PolicySpec("glm-rbmle"), PolicySpec("ucb-glm")])
    res = run_experiment(cfg)
    for name in ("glm-rbmle", "ucb-glm"):
        assert np.all(np.isfinite(res.final_regrets(name)))


# -- statistics ----------------------------------------------------------------

def test_summary_examples():
    s = summarize([1, 2, 3, 4], quantiles=(0.5,))
    assert s.quantiles[0.5] == 2.5
    assert s.mean == 2.5 and s.std == pytest.approx(math.sqrt(1.25))
    s = summarize([5.0] * 50)
    assert s.std == 0.0 and set(s.quantiles.values()) == {5.0}
    with pytest.raises(ValueError):
        summarize([])


def test_summary_quantiles_of_uniform_sample():
    draws = np.random.default_rng(4).uniform(size=50)
    s = summarize(draws)
    for q, v in s.quantiles.items():
        assert abs(v - q) < 0.15


def test_summary_matches_type7_definition():
    x = np.random.default_rng(1).normal(size=17)
    s = summarize(x, quantiles=(0.1, 0.33, 0.9))
    xs = np.sort(x)
    for q, v in s.quantiles.items():
        h = (len(x) - 1) * q
        lo = int(math.floor(h))
        assert v == pytest.approx(xs[lo] + (h - lo) * (xs[min(lo + 1, len(x) - 1)] - xs[lo]), rel=1e-13)


def test_check_bound_zero_regret_is_covered():
    rep = check_bound([np.zeros(100)] * 5, BoundParams(d=3, delta=0.1))
    assert rep.coverage == 1.0 and rep.first_violation == [None] * 5


def test_check_bound_reports_violation():
    path = np.zeros(50)
    path[20:] = 1e6
    rep = check_bound([path, np.zeros(50)], BoundParams(d=3, delta=0.1), "glm")
    assert rep.coverage == 0.5 and rep.first_violation == [21, None]


# -- timing bench --------------------------------------------------------------

def test_bench_rows_and_positive_times():
    grid = parse_grid("d=4,8;k=3")
    assert grid == [(3, 4), (3, 8)]
    rows = bench_scalability(grid, T=15, trials=2)
    assert len(rows) == len(grid) * len(BENCH_POLICIES)
    assert all(r.mean_ns > 0 for r in rows)


@pytest.mark.parametrize("text", ["d=1,2", "x=3;k=2", "d=;k=2"])
def test_bad_grid(text):
    with pytest.raises(ValueError):
        parse_grid(text)


def test_presets_validate():
    for name in PRESET_NAMES:
        if name != "table3":
            preset_config(name)
    assert preset_config("fig2a").T == 30_000
    assert preset_config("fig4a", trials=2).trials == 2


# -- command line --------------------------------------------------------------

def write_config(path, **kw):
    path.write_text(json.dumps(config(**kw).to_dict()))
    return str(path)


def test_cli_gen_run_stats(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", T=40)
    assert cli.main(["gen", "--config", cfg, "--out", str(tmp_path / "data")]) == 0
    assert cli.main(["run", "--config", cfg, "--data", str(tmp_path / "data"), "--out", str(tmp_path / "res")]) == 0
    capsys.readouterr()
    assert cli.main(["stats", "--in", str(tmp_path / "res"), "--quantiles", "0.5", "--check-bound", "0.1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "policy,mean,std,q0.5,mean_decision_time_ns"
    assert len(out) == 1 + 3 + 1 and out[-1].startswith("# bound coverage lin-rbmle")


def test_cli_bound(capsys):
    assert cli.main(["bound", "--policy", "lin-rbmle", "--t", "1", "--delta", "0.1"]) == 0
    out = capsys.readouterr().out
    assert "G1=0.0" in out and "clamped" in out
    assert cli.main(["bound", "--policy", "glm-rbmle", "--t", "99", "--delta", "0.1"]) == 0
    assert "T0=1" in capsys.readouterr().out


def test_cli_bench_writes_table(tmp_path):
    assert cli.main(["bench", "--grid", "d=3;k=2", "--t", "5", "--trials", "1", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "timing.csv").read_text().splitlines()
    assert len(lines) == 1 + len(BENCH_POLICIES)


def test_cli_preset_write_config(tmp_path):
    assert cli.main(["preset", "--name", "fig4b", "--out", str(tmp_path), "--write-config"]) == 0
    assert json.loads((tmp_path / "fig4b.json").read_text())["link"] == "logistic"


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == cli.EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"K": 1, "d": 1, "T": 1, "trials": 1, "theta_star": [0.5]}))
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert cli.main(["bound", "--policy", "lin-rbmle", "--t", "5", "--delta", "2"]) == cli.EXIT_CONFIG
    assert cli.main(["stats", "--in", str(tmp_path / "nowhere")]) == cli.EXIT_IO

    def fail(*a, **k):
        raise SolverError("Newton iteration did not converge", 1.0)

    monkeypatch.setattr(cli, "run_experiment", fail)
    assert cli.main(["run", "--config", write_config(tmp_path / "c.json"), "--out", str(tmp_path)]) == cli.EXIT_SOLVER
    assert "error" in capsys.readouterr().err
