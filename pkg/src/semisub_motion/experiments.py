"""Configuration-driven experiment harness: campaign, training, sweeps.

Three experiment families are supported:

  1. wave-assisted prediction with sweeps over time window n, wave lag w,
     and prediction length m;
  2. noise robustness: training on a noise-extended dataset (clean targets)
     and evaluation across test noise levels;
  3. motion-only prediction with sweeps over the LSTM/FC architecture.

Every run is reproducible from the config: the campaign seed, network
initialization seed, shuffle seed, and noise seed are independent fields.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .dataset import (NormalizationConstants, WindowedDataset,
                      compute_norm_constants, split_campaign)
from .errors import ConfigurationError
from .metrics import (SUMMARY_HEADER, EvaluationReport, evaluate,
                      summary_row)
from .network import Network, forward, init_network, save_checkpoint
from .training import EpochRecord, TrainingConfig, train
from .vessel import (DEFAULT_CONDITIONS, FULL_SCALE_DT, FULL_SCALE_DURATION,
                     CampaignRun, ResponseParams, generate_campaign,
                     load_campaign)

EXAMPLE2_TRAINING_IDS = ("WC1", "WC3", "WC4")
EXAMPLE2_TRAIN_NOISE = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
EXAMPLE2_TEST_NOISE = (0.0, 0.2, 0.4, 0.6, 0.8)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment run."""

    example_id: int = 1
    channel: str = "heave"           # heave | surge
    n: int = 60
    m: int = 20
    w: int = 20
    noise_levels: list[float] = field(default_factory=lambda: list(EXAMPLE2_TRAIN_NOISE))
    test_noise_levels: list[float] = field(default_factory=lambda: list(EXAMPLE2_TEST_NOISE))
    lstm_hidden: list[int] = field(default_factory=lambda: [50])
    fc_count: int = 3
    fc_width: int = 50
    # sweep grids (used by the sweep runners)
    n_sweep: list[int] = field(default_factory=lambda: list(range(10, 121, 10)))
    w_sweep: list[int] = field(default_factory=lambda: list(range(0, 61, 10)))
    m_sweep: list[int] = field(default_factory=lambda: [20, 40, 60])
    hidden_sweep: list[int] = field(default_factory=lambda: [10, 20, 30, 40, 50, 60, 80])
    lstm_layer_sweep: list[int] = field(default_factory=lambda: [1, 2])
    fc_count_sweep: list[int] = field(default_factory=lambda: [1, 2, 3, 4])
    fc_width_sweep: list[int] = field(default_factory=lambda: [10, 30, 50])
    # training protocol
    initial_lr: float = 0.01
    warm_epochs: int = 20
    decay_factor: float = 0.1
    decay_every: int = 100
    batch_size: int = 512
    max_epochs: int = 150
    # seeds, isolated per variance source
    campaign_seed: int = 0
    init_seed: int = 0
    shuffle_seed: int = 0
    noise_seed: int = 0
    # desk-scale knobs
    duration: float = FULL_SCALE_DURATION
    dt: float = FULL_SCALE_DT
    anchor_stride: int = 5
    training_condition_ids: list[str] | None = None
    output_dir: str = "runs"

    def __post_init__(self):
        if self.example_id not in (1, 2, 3):
            raise ConfigurationError(f"example_id must be 1, 2 or 3, got {self.example_id}")
        if self.channel not in ("heave", "surge"):
            raise ConfigurationError(f"channel must be heave or surge, got {self.channel!r}")
        if self.example_id == 2 and not self.noise_levels:
            raise ConfigurationError("example 2 requires non-empty noise_levels")

    def training_config(self) -> TrainingConfig:
        return TrainingConfig(
            initial_lr=self.initial_lr, warm_epochs=self.warm_epochs,
            decay_factor=self.decay_factor, decay_every=self.decay_every,
            batch_size=self.batch_size, max_epochs=self.max_epochs,
            seed=self.shuffle_seed)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ConfigurationError(f"cannot load config {path}: {exc}") from exc


def get_campaign(config: ExperimentConfig, directory=None) -> list[CampaignRun]:
    """Load a saved campaign if present, otherwise simulate one."""
    if directory is not None and (Path(directory) / "manifest.json").exists():
        return load_campaign(directory)
    return generate_campaign(DEFAULT_CONDITIONS, base_seed=config.campaign_seed,
                             params=ResponseParams(), duration=config.duration,
                             dt=config.dt)


def select_runs(campaign: list[CampaignRun],
                training_ids=None) -> list[CampaignRun]:
    """Restrict training runs to ``training_ids``, keeping test runs."""
    if training_ids is None:
        return campaign
    wanted = set(training_ids)
    return [r for r in campaign
            if r.condition.dataset_role == "test" or r.condition.id in wanted]


@dataclass
class CellResult:
    """One trained configuration with its evaluation on train and test sets."""

    net: Network
    history: list[EpochRecord]
    train_report: EvaluationReport
    test_report: EvaluationReport

    @property
    def overfit_gap(self) -> float:
        return (self.train_report.accuracy.summary.mean
                - self.test_report.accuracy.summary.mean)


def train_cell(campaign: list[CampaignRun], config: ExperimentConfig,
               n: int, m: int, w: int, use_wave: bool = True,
               noise_levels=None, test_noise_level: float = 0.0,
               lstm_hidden=None, fc_count=None, fc_width=None,
               norm: NormalizationConstants | None = None) -> CellResult:
    """Build datasets, train one network, evaluate on train and test sets."""
    runs = select_runs(campaign, config.training_condition_ids)
    norm = norm or compute_norm_constants(runs)
    training, test = split_campaign(
        runs, config.channel, n, m, w, noise_levels=noise_levels,
        use_wave=use_wave, norm=norm, noise_base_seed=config.noise_seed,
        stride=config.anchor_stride, test_noise_level=test_noise_level)
    r = 2 if use_wave else 1
    net = init_network(r, list(lstm_hidden or config.lstm_hidden),
                       fc_count if fc_count is not None else config.fc_count,
                       fc_width if fc_width is not None else config.fc_width,
                       m, seed=config.init_seed)
    net.meta = {"channel": config.channel, "n": n, "m": m, "w": w, "r": r,
                "dt": config.dt, "norm": norm.to_dict(),
                "seeds": {"campaign": config.campaign_seed,
                          "init": config.init_seed,
                          "shuffle": config.shuffle_seed,
                          "noise": config.noise_seed}}
    net, history = train(net, training, test, config.training_config())
    return CellResult(net=net, history=history,
                      train_report=evaluate(net, training),
                      test_report=evaluate(net, test))


def save_history(history: list[EpochRecord], path) -> None:
    with Path(path).open("w") as f:
        f.write("epoch,lr,train_loss,test_loss\n")
        for rec in history:
            f.write(f"{rec.epoch},{rec.lr!r},{rec.train_loss!r},{rec.test_loss!r}\n")


def save_traces(net: Network, ds: WindowedDataset, path, count: int = 5) -> None:
    """Prediction-vs-truth traces for evenly spaced sample windows."""
    idx = np.linspace(0, len(ds) - 1, count).astype(int)
    A, B = ds.norm.A[ds.channel], ds.norm.B[ds.channel]
    with Path(path).open("w") as f:
        f.write("window_p,step,time_s,truth,prediction\n")
        for i in idx:
            pred = forward(net, ds.X[i]) * B + A
            truth = ds.Y[i] * B + A
            p = int(ds.anchors[i])
            for k in range(ds.m):
                f.write(f"{p},{k},{float((p + k) * ds.dt)!r},{float(truth[k])!r},{float(pred[k])!r}\n")


def _write_summaries(rows: list[str], path) -> None:
    Path(path).write_text(SUMMARY_HEADER + "\n" + "".join(r + "\n" for r in rows))


def run_example1(config: ExperimentConfig, out: Path,
                 campaign: list[CampaignRun] | None = None) -> dict:
    """Wave-assisted prediction: sweeps over n, w, and m."""
    out.mkdir(parents=True, exist_ok=True)
    campaign = campaign or get_campaign(config)
    norm = compute_norm_constants(select_runs(campaign, config.training_condition_ids))
    results = {}

    def run_cells(cells, tag):
        rows = []
        for (n, m, w) in cells:
            cell = train_cell(campaign, config, n, m, w, use_wave=True, norm=norm)
            name = f"{tag}_n{n}_m{m}_w{w}"
            rows.append(summary_row(cell.test_report, name))
            save_history(cell.history, out / f"{name}_history.csv")
            save_checkpoint(cell.net, out / f"{name}_checkpoint.json")
            results[name] = cell
        _write_summaries(rows, out / f"{tag}_{config.channel}_summary.csv")

    run_cells([(n, config.m, config.w) for n in config.n_sweep], "time_window")
    run_cells([(config.n, config.m, w) for w in config.w_sweep], "wave_lag")
    run_cells([(3 * m, m, m) for m in config.m_sweep], "prediction_length")

    # trace CSVs for the headline cell, when it is part of the sweeps
    headline = f"time_window_n{config.n}_m{config.m}_w{config.w}"
    if headline in results:
        cell = results[headline]
        test = split_campaign(select_runs(campaign, config.training_condition_ids),
                              config.channel, config.n, config.m, config.w,
                              norm=norm, noise_base_seed=config.noise_seed,
                              stride=config.anchor_stride)[1]
        save_traces(cell.net, test, out / f"{headline}_traces.csv")
    return results


def run_example2(config: ExperimentConfig, out: Path,
                 campaign: list[CampaignRun] | None = None) -> dict:
    """Noise robustness: one model trained on the noise-extended dataset."""
    out.mkdir(parents=True, exist_ok=True)
    campaign = campaign or get_campaign(config)
    config = replace(config,
                     training_condition_ids=list(config.training_condition_ids
                                                 or EXAMPLE2_TRAINING_IDS))
    runs = select_runs(campaign, config.training_condition_ids)
    norm = compute_norm_constants(runs)
    n, m, w = config.n, config.m, config.w
    cell = train_cell(campaign, config, n, m, w, use_wave=True,
                      noise_levels=config.noise_levels, norm=norm)
    save_history(cell.history, out / "history.csv")
    save_checkpoint(cell.net, out / "checkpoint.json")

    rows = []
    results = {"model": cell}
    for level in config.test_noise_levels:
        _, test = split_campaign(runs, config.channel, n, m, w,
                                 noise_levels=config.noise_levels,
                                 norm=norm, noise_base_seed=config.noise_seed,
                                 stride=config.anchor_stride,
                                 test_noise_level=level)
        report = evaluate(cell.net, test)
        name = f"test_noise_{level}"
        rows.append(summary_row(report, name))
        save_traces(cell.net, test, out / f"{name}_traces.csv")
        results[name] = report
    _write_summaries(rows, out / f"noise_{config.channel}_summary.csv")
    return results


def run_example3(config: ExperimentConfig, out: Path,
                 campaign: list[CampaignRun] | None = None) -> dict:
    """Motion-only prediction: LSTM and FC architecture sweeps."""
    out.mkdir(parents=True, exist_ok=True)
    campaign = campaign or get_campaign(config)
    norm = compute_norm_constants(select_runs(campaign, config.training_condition_ids))
    n, m = config.n, config.m
    results = {}

    lstm_rows = []
    for depth in config.lstm_layer_sweep:
        for hidden in config.hidden_sweep:
            cell = train_cell(campaign, config, n, m, 0, use_wave=False,
                              lstm_hidden=[hidden] * depth,
                              fc_count=3, fc_width=30, norm=norm)
            name = f"lstm_layers{depth}_hidden{hidden}"
            lstm_rows.append(summary_row(cell.test_report, name + "_test"))
            lstm_rows.append(summary_row(cell.train_report, name + "_train"))
            results[name] = cell
    _write_summaries(lstm_rows, out / f"lstm_sweep_{config.channel}_summary.csv")

    fc_rows = []
    for fc_count in config.fc_count_sweep:
        for fc_width in config.fc_width_sweep:
            cell = train_cell(campaign, config, n, m, 0, use_wave=False,
                              lstm_hidden=[30], fc_count=fc_count,
                              fc_width=fc_width, norm=norm)
            name = f"fc_layers{fc_count}_width{fc_width}"
            fc_rows.append(summary_row(cell.test_report, name + "_test"))
            fc_rows.append(summary_row(cell.train_report, name + "_train"))
            results[name] = cell
    _write_summaries(fc_rows, out / f"fc_sweep_{config.channel}_summary.csv")
    return results


def run_experiment(config: ExperimentConfig,
                   campaign: list[CampaignRun] | None = None) -> dict:
    """Dispatch on example_id; writes everything under the output directory."""
    out = Path(config.output_dir) / f"example{config.example_id}_{config.channel}"
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(config.to_json())
    started = time.time()
    runner = {1: run_example1, 2: run_example2, 3: run_example3}[config.example_id]
    results = runner(config, out, campaign)
    (out / "run.log").write_text(
        f"example {config.example_id} channel {config.channel}\n"
        f"elapsed_s {time.time() - started:.1f}\n"
        f"config:\n{config.to_json()}\n")
    return results


def aggregate_reports(output_dir) -> Path:
    """Collect every *_summary.csv under a run tree into one report CSV."""
    output_dir = Path(output_dir)
    rows = []
    for path in sorted(output_dir.rglob("*_summary.csv")):
        lines = path.read_text().strip().splitlines()
        rel = path.relative_to(output_dir)
        for line in lines[1:]:
            rows.append(f"{rel},{line}")
    report = output_dir / "report.csv"
    report.write_text("source," + SUMMARY_HEADER + "\n"
                      + "".join(r + "\n" for r in rows))
    return report
