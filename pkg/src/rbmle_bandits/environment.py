"""Synthetic contexts and rewards with sample-path coupling.

Every reward for every arm at every round is drawn up front, so policies
replaying the same :class:`TrialData` see identical values whenever they
pull the same arm at the same round.

Per trial ``i`` the stream ``rng.Stream(rng.stream_seed(seed, i))`` is
consumed in this order:

1. contexts: ``K*d`` normals (static) or ``T*K*d`` normals (time-varying),
   in C order of shape ``(K, d)`` / ``(T, K, d)``, scaled by ``sqrt(10)`` and
   normalized row-wise to unit l2 norm;
2. reward noise: ``T*K`` normals in C order of shape ``(T, K)``;
   ``reward[t, a] = mu(theta*^T x[t, a]) + noise[t, a]``.

On disk a dataset is a directory holding ``manifest.json`` and one
``trial_NNNNN.npy`` per trial: a little-endian float64 table with one row
per (t, arm) in that order and columns ``t, arm, x_1..x_d, reward``.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .config import ConfigError, ExperimentConfig, canonical_json
from .links import LinkFunction

FORMAT_VERSION = "rbmle-dataset/1"
CONTEXT_VARIANCE = 10.0


class DatasetFormatError(OSError):
    """A dataset directory is missing, corrupt, or has an unknown version."""


@dataclass
class TrialData:
    index: int
    contexts: np.ndarray  # (K, d) static or (T, K, d) time-varying
    rewards: np.ndarray  # (T, K)

    @property
    def T(self) -> int:
        return self.rewards.shape[0]

    @property
    def K(self) -> int:
        return self.rewards.shape[1]

    @property
    def d(self) -> int:
        return self.contexts.shape[-1]

    @property
    def static(self) -> bool:
        return self.contexts.ndim == 2

    def contexts_at(self, t: int) -> np.ndarray:
        """Context block revealed at 1-based round ``t``."""
        return self.contexts if self.static else self.contexts[t - 1]

    def reward(self, t: int, arm: int) -> float:
        return float(self.rewards[t - 1, arm])

    def all_contexts(self) -> np.ndarray:
        if self.static:
            return np.broadcast_to(self.contexts, (self.T,) + self.contexts.shape)
        return self.contexts

    def mean_rewards(self, theta_star: np.ndarray, link: LinkFunction) -> np.ndarray:
        """(T, K) matrix of mu(theta*^T x_{t,a})."""
        z = self.contexts @ theta_star
        means = np.asarray(link.mean(z), dtype=np.float64)
        if self.static:
            means = np.broadcast_to(means, (self.T, self.K))
        return means

    def table(self) -> np.ndarray:
        """Row-per-(t, arm) little-endian float64 table used on disk."""
        T, K, d = self.T, self.K, self.d
        out = np.empty((T, K, d + 3), dtype="<f8")
        out[:, :, 0] = np.arange(1, T + 1)[:, None]
        out[:, :, 1] = np.arange(K)[None, :]
        out[:, :, 2 : 2 + d] = self.all_contexts()
        out[:, :, 2 + d] = self.rewards
        return out.reshape(T * K, d + 3)

    def digest(self) -> str:
        return hashlib.sha256(self.table().tobytes()).hexdigest()


def combine_digests(trial_digests) -> str:
    """Dataset digest: sha256 over the concatenated per-trial hex digests."""
    return hashlib.sha256("".join(trial_digests).encode("ascii")).hexdigest()


@dataclass
class Dataset:
    data: dict  # generating fields, see ExperimentConfig.data_fields
    trials: list[TrialData] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def theta_star(self) -> np.ndarray:
        return np.asarray(self.data["theta_star"], dtype=np.float64)

    @property
    def context_mode(self) -> str:
        return self.data["context_mode"]

    @property
    def link(self) -> LinkFunction:
        return LinkFunction(self.data["link"], self.data["clamp_radius"])

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(canonical_json(self.data).encode()).hexdigest()

    def digest(self) -> str:
        return combine_digests(trial.digest() for trial in self.trials)


def normalize_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def generate_trial(data: dict, trial: int) -> TrialData:
    """Materialize one trial; a pure function of the generating fields."""
    K, d, T = data["K"], data["d"], data["T"]
    theta = np.asarray(data["theta_star"], dtype=np.float64)
    link = LinkFunction(data["link"], data["clamp_radius"])
    stream = rng.Stream(rng.stream_seed(data["seed"], trial))
    shape = (K, d) if data["context_mode"] == "static" else (T, K, d)
    raw = stream.normal(math.prod(shape)).reshape(shape) * math.sqrt(CONTEXT_VARIANCE)
    contexts = normalize_rows(raw)
    noise = stream.normal(T * K).reshape(T, K)
    means = np.asarray(link.mean(contexts @ theta), dtype=np.float64)
    rewards = means + noise  # broadcasts (K,) over T in static mode
    return TrialData(trial, contexts, rewards)


def build_dataset(config: ExperimentConfig, seed: int | None = None) -> Dataset:
    """Generate every trial of ``config`` (``seed`` overrides ``config.seed``)."""
    if seed is not None:
        config = ExperimentConfig.from_dict({**config.to_dict(), "seed": seed})
    config.validate()
    data = config.data_fields()
    return Dataset(data, [generate_trial(data, i) for i in range(config.trials)])


def optimal_arm(theta_star: np.ndarray, contexts: np.ndarray) -> int:
    """Lowest index maximizing theta*^T x."""
    return int(np.argmax(contexts @ theta_star))


def pseudo_regret_step(theta_star, link: LinkFunction, contexts: np.ndarray, chosen: int) -> float:
    z = contexts @ theta_star
    best = link.mean(float(np.max(z)))
    return max(0.0, best - link.mean(float(z[chosen])))


# -- persistence -----------------------------------------------------------

def _trial_name(i: int) -> str:
    return f"trial_{i:05d}.npy"


def save_dataset(dataset: Dataset, out_dir: str | Path) -> Path:
    """Write ``dataset`` to ``out_dir`` atomically (temp dir, then rename)."""
    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=".tmp-", dir=out_dir.parent))
    try:
        digests = []
        for trial in dataset.trials:
            table = trial.table()
            digests.append(hashlib.sha256(table.tobytes()).hexdigest())
            np.save(tmp / _trial_name(trial.index), table, allow_pickle=False)
        manifest = {
            "format_version": FORMAT_VERSION,
            "config": dataset.data,
            "seed": dataset.seed,
            "config_hash": dataset.config_hash,
            "digest": combine_digests(digests),
            "trial_digests": digests,
            "trials": len(dataset.trials),
        }
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        if out_dir.exists():
            shutil.rmtree(out_dir)
        os.replace(tmp, out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out_dir


def read_manifest(path: str | Path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads((path / "manifest.json").read_text())
    except FileNotFoundError as exc:
        raise DatasetFormatError(f"{path}: no manifest.json") from exc
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: manifest is not valid JSON") from exc
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise DatasetFormatError(f"{path}: unsupported dataset format version {version!r}")
    return manifest


def load_trial(path: str | Path, manifest: dict, trial: int) -> TrialData:
    data = manifest["config"]
    K, d, T = data["K"], data["d"], data["T"]
    try:
        table = np.load(Path(path) / _trial_name(trial), allow_pickle=False)
    except FileNotFoundError as exc:
        raise DatasetFormatError(f"{path}: missing {_trial_name(trial)}") from exc
    if table.dtype != np.dtype("<f8") or table.shape != (T * K, d + 3):
        raise DatasetFormatError(f"{path}: {_trial_name(trial)} has unexpected layout")
    block = table.reshape(T, K, d + 3)
    contexts = np.ascontiguousarray(block[:, :, 2 : 2 + d])
    if data["context_mode"] == "static":
        contexts = np.ascontiguousarray(contexts[0])
    rewards = np.ascontiguousarray(block[:, :, 2 + d])
    return TrialData(trial, contexts, rewards)


def load_dataset(path: str | Path, verify: bool = True) -> Dataset:
    manifest = read_manifest(path)
    ds = Dataset(manifest["config"])
    ds.trials = [load_trial(path, manifest, i) for i in range(manifest["trials"])]
    if verify and ds.digest() != manifest["digest"]:
        raise DatasetFormatError(f"{path}: digest mismatch")
    return ds


def check_matches(manifest: dict, config: ExperimentConfig) -> None:
    """Raise ConfigError if a stored dataset was generated from other settings."""
    stored = manifest["config"]
    for key, value in config.data_fields().items():
        if stored.get(key) != value:
            raise ConfigError(key, f"dataset has {stored.get(key)!r}, config has {value!r}")
