"""Named experiment presets mirroring the published experiments."""

from __future__ import annotations

from ..config import ExperimentConfig, PolicySpec

LINEAR_POLICIES = ("lin-rbmle", "lin-ucb", "gpucb", "gpucbt", "lin-ts")
GLM_POLICIES = ("glm-rbmle", "ucb-glm")
SEED = 46

_LINEAR = {
    "fig2a": ("static", [-0.3, 0.5, 0.8]),
    "fig2b": ("static", [-0.7, -0.6, 0.1]),
    "fig2c": ("time-varying", [-0.3, 0.5, 0.8]),
    "fig2d": ("time-varying", [-0.7, -0.6, 0.1]),
}
_GLM = {
    "fig4a": ("static", [0.3, -0.5, 0.2, -0.7, -0.1]),
    "fig4b": ("static", [0.2, -0.8, -0.5, 0.1, 0.1]),
}

TABLE3_GRID = "d=100,200,300;k=100,200"
TABLE3_T = 100
TABLE3_TRIALS = 50

PRESET_NAMES = tuple(_LINEAR) + tuple(_GLM) + ("table3",)


def preset_config(name: str, trials: int | None = None, T: int | None = None) -> ExperimentConfig:
    """Experiment config for a figure preset (``table3`` is a bench, not a config)."""
    if name in _LINEAR:
        mode, theta = _LINEAR[name]
        cfg = ExperimentConfig(K=10, d=3, T=30_000, trials=50, theta_star=theta, context_mode=mode,
                               link="identity", seed=SEED,
                               policies=[PolicySpec(p) for p in LINEAR_POLICIES], round_stride=10)
    elif name in _GLM:
        mode, theta = _GLM[name]
        cfg = ExperimentConfig(K=10, d=5, T=1_000, trials=50, theta_star=theta, context_mode=mode,
                               link="logistic", seed=SEED,
                               policies=[PolicySpec(p) for p in GLM_POLICIES])
    else:
        raise KeyError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")
    if trials is not None:
        cfg.trials = trials
    if T is not None:
        cfg.T = T
    return cfg.validate()
