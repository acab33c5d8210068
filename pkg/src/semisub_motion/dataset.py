"""Windowed input-output pair construction with regularization and noise.

Each sample anchored at index p pairs an input block X of n past motion
samples (and, when waves are used, n wave samples shifted forward by the
wave lag w) with a target Y of the next m motion samples:

    motion rows:  t_{p-n} .. t_{p-1}
    wave rows:    t_{p+w-n} .. t_{p+w-1}
    target:       t_p .. t_{p+m-1}

Channels are standardized by campaign-wide constants A (mean of per-run
means) and B (mean of per-run standard deviations).  Noise-extended
datasets add seeded Gaussian noise with standard deviation I * sigma of
the clean series to the inputs only; targets always stay clean.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError, DegenerateDataError, DomainError
from .timeseries import TimeSeries
from .vessel import CampaignRun

CHANNELS = ("wave", "heave", "surge")

# Reference standardization constants from the original basin campaign
# (units: cm).  Kept as a fixture for comparison; the synthetic campaign
# computes its own constants with the same procedure.
REFERENCE_NORM_CM = {
    "heave": (-0.86, 2.264),
    "surge": (-100.341, 7.876),
    "wave": (0.422, 6.766),
}


@dataclass(frozen=True)
class NormalizationConstants:
    """Per-channel affine standardization constants, campaign-wide."""

    A: dict[str, float]
    B: dict[str, float]

    def __post_init__(self):
        for ch, b in self.B.items():
            if not b > 0:
                raise DegenerateDataError(f"channel {ch!r} has non-positive scale {b}")

    def to_dict(self) -> dict:
        return {"A": dict(self.A), "B": dict(self.B)}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationConstants":
        return cls(A=dict(d["A"]), B=dict(d["B"]))


def compute_norm_constants(campaign: list[CampaignRun]) -> NormalizationConstants:
    """A = mean of per-run means, B = mean of per-run (population) stds."""
    if not campaign:
        raise DomainError("empty campaign")
    A, B = {}, {}
    for ch in CHANNELS:
        means = [run.channel(ch).values.mean() for run in campaign]
        stds = [run.channel(ch).values.std() for run in campaign]
        A[ch] = float(np.mean(means))
        B[ch] = float(np.mean(stds))
        if not B[ch] > 0:
            raise DegenerateDataError(f"channel {ch!r} is constant across the campaign")
    return NormalizationConstants(A=A, B=B)


def regularize(series: TimeSeries, A: float, B: float) -> TimeSeries:
    """Standardize: (x - A) / B."""
    if not B > 0:
        raise DomainError(f"scale B must be positive, got {B}")
    return series.with_values((series.values - A) / B)


def deregularize(series: TimeSeries, A: float, B: float) -> TimeSeries:
    """Exact inverse of regularize: x * B + A."""
    if not B > 0:
        raise DomainError(f"scale B must be positive, got {B}")
    return series.with_values(series.values * B + A)


def noise_seed(run_id: str, channel: str, level: float, base_seed: int = 0) -> int:
    """Stable seed derived from (run id, channel, noise level)."""
    key = f"{base_seed}:{run_id}:{channel}:{level!r}"
    return zlib.crc32(key.encode())


def add_noise(series: TimeSeries, level: float, seed: int) -> TimeSeries:
    """Add zero-mean Gaussian noise with std = level * std(series)."""
    if level < 0:
        raise DomainError(f"noise level must be >= 0, got {level}")
    if level == 0:
        return series.with_values(series.values.copy())
    sigma = series.values.std()
    rng = np.random.default_rng(seed)
    return series.with_values(series.values + rng.normal(0.0, level * sigma,
                                                         series.values.size))


@dataclass
class WindowedDataset:
    """Stacked window samples: X is (N, n, r), Y is (N, m).

    Feature column 0 is the motion channel; column 1 (when r = 2) is the
    wave channel.  ``anchors`` records the anchor index p of each sample
    within its source run; ``run_ids`` the source run of each sample.
    """

    X: np.ndarray
    Y: np.ndarray
    anchors: np.ndarray
    run_ids: list[str]
    n: int
    m: int
    w: int
    channel: str
    norm: NormalizationConstants
    role: str = "training"
    noise_level: float = 0.0
    dt: float = 1.0

    @property
    def r(self) -> int:
        return self.X.shape[2]

    def __len__(self) -> int:
        return self.X.shape[0]

    def sample(self, i: int) -> tuple[np.ndarray, np.ndarray, int]:
        """(X_i, Y_i, anchor p) for one window."""
        return self.X[i], self.Y[i], int(self.anchors[i])


def pair_count(L: int, n: int, m: int, w: int) -> int:
    """Number of valid anchors for a series of length L."""
    return max(0, L - n - max(m, w) + 1)


def build_pairs(motion: TimeSeries, wave: TimeSeries | None, n: int, m: int,
                w: int, norm: NormalizationConstants | None = None,
                channel: str = "heave", run_id: str = "run",
                role: str = "training", noise_level: float = 0.0,
                stride: int = 1) -> WindowedDataset:
    """Window one (already regularized) run into input-output pairs.

    ``stride`` subsamples the anchors for desk-scale training; stride 1
    keeps every valid window.
    """
    if n < 1 or m < 1 or w < 0:
        raise DomainError(f"need n, m >= 1 and w >= 0, got n={n} m={m} w={w}")
    if stride < 1:
        raise DomainError("stride must be >= 1")
    L = len(motion)
    if wave is not None and len(wave) != L:
        raise DomainError("motion and wave must have equal length")
    count = pair_count(L, n, m, w)
    if count <= 0:
        raise DomainError(
            f"series of length {L} too short for n={n}, m={m}, w={w}")
    anchors = np.arange(n, L - max(m, w) + 1, stride)

    motion_windows = sliding_window_view(motion.values, n)  # row p0 covers p0..p0+n-1
    target_windows = sliding_window_view(motion.values, m)
    blocks = [motion_windows[anchors - n]]
    if wave is not None:
        wave_windows = sliding_window_view(wave.values, n)
        blocks.append(wave_windows[anchors - n + w])
    X = np.stack(blocks, axis=2)
    Y = target_windows[anchors].copy()
    norm = norm or NormalizationConstants(A={channel: 0.0, "wave": 0.0},
                                          B={channel: 1.0, "wave": 1.0})
    return WindowedDataset(X=X.copy(), Y=Y, anchors=anchors,
                           run_ids=[run_id] * len(anchors), n=n, m=m, w=w,
                           channel=channel, norm=norm, role=role,
                           noise_level=noise_level, dt=motion.dt)


def concat_datasets(parts: list[WindowedDataset]) -> WindowedDataset:
    """Merge per-run datasets sharing (n, m, w, r); order is preserved."""
    if not parts:
        raise DomainError("nothing to concatenate")
    first = parts[0]
    for p in parts[1:]:
        if (p.n, p.m, p.w, p.r) != (first.n, first.m, first.w, first.r):
            raise ConfigurationError("datasets have mismatched (n, m, w, r)")
    return WindowedDataset(
        X=np.concatenate([p.X for p in parts]),
        Y=np.concatenate([p.Y for p in parts]),
        anchors=np.concatenate([p.anchors for p in parts]),
        run_ids=[rid for p in parts for rid in p.run_ids],
        n=first.n, m=first.m, w=first.w, channel=first.channel,
        norm=first.norm, role=first.role, noise_level=first.noise_level,
        dt=first.dt)


def _windowed_run(run: CampaignRun, channel: str, use_wave: bool, n: int,
                  m: int, w: int, norm: NormalizationConstants,
                  noise_level: float, noise_base_seed: int, role: str,
                  stride: int) -> WindowedDataset:
    motion_clean = run.channel(channel)
    motion_in = add_noise(motion_clean, noise_level,
                          noise_seed(run.condition.id, channel, noise_level,
                                     noise_base_seed))
    motion_in = regularize(motion_in, norm.A[channel], norm.B[channel])
    wave_in = None
    if use_wave:
        wave_in = add_noise(run.wave, noise_level,
                            noise_seed(run.condition.id, "wave", noise_level,
                                       noise_base_seed))
        wave_in = regularize(wave_in, norm.A["wave"], norm.B["wave"])
    ds = build_pairs(motion_in, wave_in, n, m, w, norm=norm, channel=channel,
                     run_id=run.condition.id, role=role,
                     noise_level=noise_level, stride=stride)
    # targets come from the clean series: re-window the clean motion
    clean_reg = regularize(motion_clean, norm.A[channel], norm.B[channel])
    ds.Y = sliding_window_view(clean_reg.values, m)[ds.anchors].copy()
    return ds


def split_campaign(campaign: list[CampaignRun], channel: str, n: int, m: int,
                   w: int, noise_levels: list[float] | None = None,
                   use_wave: bool = True,
                   norm: NormalizationConstants | None = None,
                   noise_base_seed: int = 0, stride: int = 1,
                   test_noise_level: float = 0.0,
                   ) -> tuple[WindowedDataset, WindowedDataset]:
    """Pool training-role runs (crossed with noise levels) and the test run.

    Training inputs are noisy at each requested level; targets are always
    the clean series.  The test set comes from the test-role run(s) at
    ``test_noise_level``.
    """
    if channel not in ("heave", "surge"):
        raise DomainError(f"channel must be heave or surge, got {channel!r}")
    noise_levels = [0.0] if noise_levels is None else list(noise_levels)
    if not noise_levels:
        raise ConfigurationError("noise_levels must be non-empty")
    training_runs = [r for r in campaign if r.condition.dataset_role == "training"]
    test_runs = [r for r in campaign if r.condition.dataset_role == "test"]
    if not test_runs:
        raise ConfigurationError("campaign has no test-role run")
    if not training_runs:
        raise ConfigurationError("campaign has no training-role runs")
    norm = norm or compute_norm_constants(campaign)

    ordered = sorted(training_runs, key=lambda r: r.condition.id)
    train_parts = [
        _windowed_run(run, channel, use_wave, n, m, w, norm, level,
                      noise_base_seed, "training", stride)
        for run in ordered for level in noise_levels
    ]
    training = concat_datasets(train_parts)
    training.noise_level = max(noise_levels)

    test_parts = [
        _windowed_run(run, channel, use_wave, n, m, w, norm, test_noise_level,
                      noise_base_seed, "test", stride)
        for run in sorted(test_runs, key=lambda r: r.condition.id)
    ]
    test = concat_datasets(test_parts)
    test.role = "test"
    test.noise_level = test_noise_level
    return training, test


def save_dataset(ds: WindowedDataset, path) -> None:
    """CSV export: one sample per row, `p, X row-major (n x r), Y (m)`.

    A sibling ``<path>.manifest.json`` records (n, m, w, r), the
    normalization constants, and the noise level.
    """
    path = Path(path)
    with path.open("w") as f:
        x_cols = [f"x_{t}_{c}" for t in range(ds.n) for c in range(ds.r)]
        y_cols = [f"y_{t}" for t in range(ds.m)]
        f.write(",".join(["p"] + x_cols + y_cols) + "\n")
        for i in range(len(ds)):
            row = [str(int(ds.anchors[i]))]
            row += [repr(float(v)) for v in ds.X[i].reshape(-1)]
            row += [repr(float(v)) for v in ds.Y[i]]
            f.write(",".join(row) + "\n")
    manifest = {
        "format_version": 1, "n": ds.n, "m": ds.m, "w": ds.w, "r": ds.r,
        "channel": ds.channel, "role": ds.role, "noise_level": ds.noise_level,
        "dt": ds.dt, "norm": ds.norm.to_dict(), "samples": len(ds),
        "run_ids": ds.run_ids,
    }
    path.with_suffix(path.suffix + ".manifest.json").write_text(
        json.dumps(manifest, indent=2))


def load_dataset(path) -> WindowedDataset:
    path = Path(path)
    manifest = json.loads(
        path.with_suffix(path.suffix + ".manifest.json").read_text())
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=np.float64, ndmin=2)
    n, m, r = manifest["n"], manifest["m"], manifest["r"]
    if data.shape[1] != 1 + n * r + m:
        raise DomainError(f"{path}: column count does not match manifest")
    anchors = data[:, 0].astype(int)
    X = data[:, 1:1 + n * r].reshape(-1, n, r)
    Y = data[:, 1 + n * r:]
    return WindowedDataset(
        X=X, Y=Y, anchors=anchors, run_ids=list(manifest["run_ids"]),
        n=n, m=m, w=manifest["w"], channel=manifest["channel"],
        norm=NormalizationConstants.from_dict(manifest["norm"]),
        role=manifest["role"], noise_level=manifest["noise_level"],
        dt=manifest["dt"])
