import json

import numpy as np
import pytest

from semisub_motion.cli import main
from semisub_motion.dataset import load_dataset
from semisub_motion.network import load_checkpoint
from semisub_motion.timeseries import TimeSeries
from semisub_motion.vessel import load_campaign

TINY = dict(
    example_id=1, channel="heave", n=12, m=6, w=6,
    noise_levels=[0.0, 0.3], test_noise_levels=[0.0, 0.3],
    lstm_hidden=[8], fc_count=1, fc_width=8,
    n_sweep=[10], w_sweep=[0, 6], m_sweep=[6],
    hidden_sweep=[8], lstm_layer_sweep=[1],
    fc_count_sweep=[1], fc_width_sweep=[8],
    batch_size=128, max_epochs=2,
    duration=700.0, dt=0.775, anchor_stride=7)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Shared pipeline artifacts: config, campaign, datasets, checkpoint."""
    root = tmp_path_factory.mktemp("cli")
    config = root / "config.json"
    config.write_text(json.dumps({**TINY, "output_dir": str(root / "runs")}))

    assert main(["simulate", "--config", str(config),
                 "--output", str(root / "sim")]) == 0
    assert main(["build-dataset", "--config", str(config),
                 "--campaign", str(root / "sim" / "campaign"),
                 "--output", str(root / "data")]) == 0
    assert main(["train", "--config", str(config),
                 "--campaign", str(root / "sim" / "campaign"),
                 "--output", str(root / "model")]) == 0
    return root, config


class TestPipeline:
    def test_simulate_writes_campaign(self, workspace):
        root, _ = workspace
        campaign = load_campaign(root / "sim" / "campaign")
        assert len(campaign) == 8
        assert len(campaign[0].wave) == int(round(700.0 / 0.775))

    def test_build_dataset_outputs(self, workspace):
        root, _ = workspace
        training = load_dataset(root / "data" / "training.csv")
        test = load_dataset(root / "data" / "test.csv")
        assert (training.n, training.m, training.w) == (12, 6, 6)
        assert training.role == "training" and test.role == "test"
        assert set(test.run_ids) == {"WC2"}

    def test_train_outputs(self, workspace):
        root, _ = workspace
        net = load_checkpoint(root / "model" / "checkpoint.json")
        assert net.meta["n"] == 12 and net.meta["m"] == 6
        history = (root / "model" / "history.csv").read_text().strip().splitlines()
        assert len(history) == 1 + TINY["max_epochs"]
        summary = (root / "model" / "summary.csv").read_text()
        assert "training" in summary and "test" in summary

    def test_predict(self, workspace, tmp_path):
        root, _ = workspace
        run_dir = root / "sim" / "campaign"
        out = tmp_path / "forecast.csv"
        assert main(["predict",
                     "--checkpoint", str(root / "model" / "checkpoint.json"),
                     "--motion", str(run_dir / "WC2_heave.csv"),
                     "--wave", str(run_dir / "WC2_wave.csv"),
                     "--anchor", "200",
                     "--output", str(out)]) == 0
        forecast = TimeSeries.load_csv(out)
        assert len(forecast) == TINY["m"]
        assert np.all(np.isfinite(forecast.values))
        # forecast times start at the anchor
        assert forecast.start_time == pytest.approx(200 * 0.775)

    def test_predict_requires_wave_channel(self, workspace, tmp_path):
        root, _ = workspace
        run_dir = root / "sim" / "campaign"
        code = main(["predict",
                     "--checkpoint", str(root / "model" / "checkpoint.json"),
                     "--motion", str(run_dir / "WC2_heave.csv"),
                     "--output", str(tmp_path / "forecast.csv")])
        assert code == 1

    def test_evaluate(self, workspace, tmp_path, capsys):
        root, _ = workspace
        out = tmp_path / "eval"
        assert main(["evaluate",
                     "--checkpoint", str(root / "model" / "checkpoint.json"),
                     "--dataset", str(root / "data" / "test.csv"),
                     "--output", str(out)]) == 0
        assert (out / "summary.csv").exists()
        per_window = np.loadtxt(out / "window_accuracy.csv", delimiter=",",
                                skiprows=1)
        assert per_window.ndim == 2 and per_window.shape[1] == 2
        assert "median" in capsys.readouterr().out

    def test_sweep_and_report(self, workspace):
        root, config = workspace
        assert main(["sweep", "--config", str(config),
                     "--set", "example_id=2",
                     "--set", 'test_noise_levels=[0.0]',
                     "--set", "max_epochs=1"]) == 0
        assert main(["report", "--output-dir", str(root / "runs")]) == 0
        report = (root / "runs" / "report.csv").read_text().strip().splitlines()
        assert len(report) >= 2


class TestErrors:
    def test_bad_override_shape(self, capsys):
        assert main(["simulate", "--set", "nonsense"]) == 1
        assert "key=value" in capsys.readouterr().err

    def test_unknown_config_field(self, capsys, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"no_such_field": 1}))
        assert main(["simulate", "--config", str(config)]) == 1

    def test_missing_checkpoint(self, capsys, tmp_path):
        code = main(["evaluate", "--checkpoint", str(tmp_path / "none.json"),
                     "--dataset", str(tmp_path / "none.csv"),
                     "--output", str(tmp_path)])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_output_root_env(self, monkeypatch, tmp_path):
        monkeypatch.setenv("SEMISUB_OUTPUT_ROOT", str(tmp_path))
        config = tmp_path / "config.json"
        config.write_text(json.dumps({**TINY, "duration": 400.0,
                                      "output_dir": "runs"}))
        assert main(["simulate", "--config", str(config)]) == 0
        assert (tmp_path / "runs" / "campaign" / "manifest.json").exists()
