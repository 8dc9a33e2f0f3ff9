import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbmle_bandits.config import ConfigError, ExperimentConfig, PolicySpec, load_config
from rbmle_bandits.environment import (
    DatasetFormatError,
    build_dataset,
    check_matches,
    load_dataset,
    optimal_arm,
    pseudo_regret_step,
    read_manifest,
    save_dataset,
)
from rbmle_bandits.links import IDENTITY, LOGISTIC, LinkFunction


def small_config(**kw) -> ExperimentConfig:
    base = dict(K=4, d=3, T=50, trials=3, theta_star=[-0.3, 0.5, 0.8], seed=46)
    base.update(kw)
    return ExperimentConfig(**base).validate()


# -- links -----------------------------------------------------------------

def test_link_examples():
    assert LOGISTIC.mean(0.0) == 0.5
    assert LOGISTIC.mean(2.0) == pytest.approx(0.731059 + 0.196612, abs=1e-6)
    assert IDENTITY.mean(-0.3) == -0.3


def test_link_constants():
    sig1 = 1.0 / (1.0 + math.exp(-1.0))
    assert LOGISTIC.kappa_mu == pytest.approx(sig1 * (1 - sig1), rel=1e-14)
    assert LOGISTIC.L_mu == 0.25
    assert IDENTITY.kappa_mu == IDENTITY.L_mu == 1.0


def test_logistic_inside_clamp_is_sigmoid():
    z = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(LOGISTIC.mean(z), 1 / (1 + np.exp(-z)), rtol=1e-14)
    np.testing.assert_allclose(LOGISTIC.antideriv(z), np.log1p(np.exp(z)), rtol=1e-14)


@settings(max_examples=200, deadline=None)
@given(z=st.floats(-8, 8), radius=st.floats(0.2, 3.0))
def test_antiderivative_derivative_is_mean(z, radius):
    link = LinkFunction("logistic", radius)
    h = 1e-5
    fd = (link.antideriv(z + h) - link.antideriv(z - h)) / (2 * h)
    assert fd == pytest.approx(link.mean(z), abs=1e-7)
    fd2 = (link.mean(z + h) - link.mean(z - h)) / (2 * h)
    assert fd2 == pytest.approx(link.deriv(z), abs=1e-6)
    assert link.kappa_mu - 1e-15 <= link.deriv(z) <= link.L_mu + 1e-15


def test_link_rejects_unknown_kind():
    with pytest.raises(ValueError):
        LinkFunction("probit")


# -- dataset generation ------------------------------------------------------

@pytest.mark.parametrize("mode", ["static", "time-varying"])
def test_contexts_have_unit_norm(mode):
    ds = build_dataset(small_config(context_mode=mode))
    for trial in ds.trials:
        norms = np.linalg.norm(trial.contexts, axis=-1)
        assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_regeneration_is_byte_identical():
    a = build_dataset(small_config(context_mode="time-varying"))
    b = build_dataset(small_config(context_mode="time-varying"))
    assert a.digest() == b.digest()
    for ta, tb in zip(a.trials, b.trials):
        assert ta.table().tobytes() == tb.table().tobytes()


def test_seed_changes_dataset():
    cfg = small_config()
    assert build_dataset(cfg).digest() != build_dataset(cfg, seed=47).digest()


def test_static_contexts_do_not_change():
    trial = build_dataset(small_config()).trials[0]
    np.testing.assert_array_equal(trial.contexts_at(1), trial.contexts_at(trial.T))


def test_time_varying_contexts_change():
    trial = build_dataset(small_config(context_mode="time-varying")).trials[0]
    assert not np.array_equal(trial.contexts_at(1), trial.contexts_at(2))


def test_trials_differ():
    ds = build_dataset(small_config())
    assert not np.array_equal(ds.trials[0].contexts, ds.trials[1].contexts)


@pytest.mark.parametrize("link", ["identity", "logistic"])
def test_empirical_reward_mean(link):
    cfg = small_config(K=2, T=100_000, trials=1, link=link)
    trial = build_dataset(cfg).trials[0]
    mu = LinkFunction(link).mean(trial.contexts @ np.asarray(cfg.theta_star))
    assert np.max(np.abs(trial.rewards.mean(axis=0) - mu)) < 0.02
    assert np.max(np.abs(trial.rewards.std(axis=0) - 1.0)) < 0.02


# -- regret helpers ----------------------------------------------------------

def test_optimal_arm_examples():
    theta = np.array([1.0, 0.0])
    assert optimal_arm(theta, np.array([[1.0, 0.0], [0.0, 1.0]])) == 0
    assert optimal_arm(theta, np.array([[0.0, 1.0], [0.0, -1.0]])) == 0


def test_optimal_arm_matches_scan(rng):
    for _ in range(100):
        theta = rng.normal(size=3)
        ctx = rng.normal(size=(8, 3))
        best, best_v = 0, -np.inf
        for a in range(8):
            v = float(ctx[a] @ theta)
            if v > best_v:
                best, best_v = a, v
        assert optimal_arm(theta, ctx) == best


def test_pseudo_regret_examples(rng):
    theta = np.array([1.0, 0.0])
    ctx = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert pseudo_regret_step(theta, IDENTITY, ctx, 0) == 0.0
    assert pseudo_regret_step(theta, IDENTITY, ctx, 1) == 1.0
    for _ in range(100):
        theta, ctx = rng.normal(size=3), rng.normal(size=(5, 3))
        for link in (IDENTITY, LOGISTIC):
            assert pseudo_regret_step(theta, link, ctx, int(rng.integers(5))) >= 0.0
            assert pseudo_regret_step(theta, link, ctx, optimal_arm(theta, ctx)) == 0.0


# -- persistence and config --------------------------------------------------

@pytest.mark.parametrize("mode", ["static", "time-varying"])
def test_save_load_roundtrip(tmp_path, mode):
    ds = build_dataset(small_config(context_mode=mode))
    save_dataset(ds, tmp_path / "data")
    back = load_dataset(tmp_path / "data")
    assert back.digest() == ds.digest()
    for ta, tb in zip(ds.trials, back.trials):
        np.testing.assert_array_equal(ta.contexts, tb.contexts)
        np.testing.assert_array_equal(ta.rewards, tb.rewards)
    assert read_manifest(tmp_path / "data")["digest"] == ds.digest()


def test_unknown_format_version_is_rejected(tmp_path):
    save_dataset(build_dataset(small_config()), tmp_path / "data")
    path = tmp_path / "data" / "manifest.json"
    manifest = json.loads(path.read_text())
    manifest["format_version"] = "rbmle-dataset/99"
    path.write_text(json.dumps(manifest))
    with pytest.raises(DatasetFormatError):
        load_dataset(tmp_path / "data")


def test_corrupt_trial_fails_digest(tmp_path):
    save_dataset(build_dataset(small_config()), tmp_path / "data")
    f = tmp_path / "data" / "trial_00001.npy"
    table = np.load(f)
    table[0, -1] += 1.0
    np.save(f, table)
    with pytest.raises(DatasetFormatError):
        load_dataset(tmp_path / "data")


def test_mismatched_config_is_rejected(tmp_path):
    save_dataset(build_dataset(small_config()), tmp_path / "data")
    with pytest.raises(ConfigError) as err:
        check_matches(read_manifest(tmp_path / "data"), small_config(T=60))
    assert err.value.field == "T"


@pytest.mark.parametrize("field,value", [
    ("K", 1), ("d", 0), ("T", -5), ("trials", 1.5), ("theta_star", [1.0, 1.0, 1.0]),
    ("context_mode", "dynamic"), ("link", "probit"), ("seed", -1), ("clamp_radius", 0.0),
])
def test_invalid_config_names_field(field, value):
    base = dict(K=4, d=3, T=50, trials=3, theta_star=[-0.3, 0.5, 0.8])
    base[field] = value
    with pytest.raises(ConfigError) as err:
        ExperimentConfig(**base).validate()
    assert err.value.field == field


def test_config_json_roundtrip(tmp_path):
    cfg = small_config(policies=[PolicySpec("lin-ucb", {"gamma": 2.0})])
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    back = load_config(path)
    assert back == cfg and back.digest() == cfg.digest()


def test_config_rejects_unknown_field():
    with pytest.raises(ConfigError) as err:
        ExperimentConfig.from_dict({"K": 2, "d": 1, "T": 1, "trials": 1, "theta_star": [0.1], "colour": 1})
    assert err.value.field == "colour"
