"""Command line behaviour: artifacts, overrides, and exit codes."""
import csv
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from thermoda.checkpoint import load_checkpoint, save_checkpoint
from thermoda.cli import main
from thermoda.model import ModelShape, init_params

CONFIG = {
    "experiment": {"input_steps": 8, "hidden_units": 6, "horizons": [1, 2],
                   "stride": 2, "seeds": [0]},
    "pretrain": {"epochs": 2, "seed": 100},
    "finetune": {"epochs": 2},
    "scratch": {"epochs": 2},
    "source": {"synth": {"rows": 400, "seed": 5}},
    "target": {"synth": {"rows": 250, "seed": 9, "outdoor_mean": 9.0}},
}


@pytest.fixture(scope="module")
def cfg_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "experiment.json"
    path.write_text(json.dumps(CONFIG))
    return str(path)


@pytest.fixture(scope="module")
def pretrained(cfg_path, tmp_path_factory):
    """One pretraining pass shared by the adapt and evaluate tests."""
    out = str(tmp_path_factory.mktemp("pre"))
    assert main(["pretrain", "--config", cfg_path, "--out", out]) == 0
    return out


def _read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# --------------------------------------------------------------------------
# synth
# --------------------------------------------------------------------------

def test_synth_writes_both_domains(cfg_path, tmp_path):
    out = tmp_path / "data"
    assert main(["synth", "--config", cfg_path, "--out", str(out)]) == 0
    src = _read_rows(out / "source.csv")
    tgt = _read_rows(out / "target.csv")
    assert len(src) == 1 + 400
    assert len(tgt) == 1 + 250
    assert src[0][0] == "timestamp"


def test_synth_rerun_is_byte_identical(cfg_path, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["synth", "--config", cfg_path, "--out", str(a)])
    main(["synth", "--config", cfg_path, "--out", str(b)])
    assert (a / "source.csv").read_bytes() == (b / "source.csv").read_bytes()
    assert (a / "target.csv").read_bytes() == (b / "target.csv").read_bytes()


def test_synth_domain_restriction(cfg_path, tmp_path):
    out = tmp_path / "only"
    assert main(["synth", "--config", cfg_path, "--domain", "target",
                 "--out", str(out)]) == 0
    assert (out / "target.csv").exists()
    assert not (out / "source.csv").exists()


def test_synth_invalid_generator_exits_2(tmp_path, capsys):
    bad = dict(CONFIG)
    bad["source"] = {"synth": {"rows": 100, "seed": 1, "retain": 1.5}}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    rc = main(["synth", "--config", str(path), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


# --------------------------------------------------------------------------
# pretrain
# --------------------------------------------------------------------------

def test_pretrain_artifacts(pretrained):
    names = sorted(os.listdir(os.path.join(pretrained, "checkpoints")))
    assert names == ["pretrained-h01.ckpt", "pretrained-h02.ckpt"]
    loss = _read_rows(os.path.join(pretrained, "pretrain_loss.csv"))
    assert loss[0] == ["horizon", "epoch", "loss"]
    assert len(loss) == 1 + 2 * 2                     # 2 horizons x 2 epochs
    resolved = json.loads(
        open(os.path.join(pretrained, "resolved_config.json")).read())
    assert resolved["input_steps"] == 8
    assert resolved["pretrain"]["epochs"] == 2
    fig = os.path.join(pretrained, "figures", "pretrain_loss.png")
    assert os.path.getsize(fig) > 0


def test_pretrain_checkpoint_meta(pretrained):
    ck = load_checkpoint(
        os.path.join(pretrained, "checkpoints", "pretrained-h01.ckpt"))
    assert ck.meta["role"] == "pretrained"
    assert ck.meta["domain"] == "source"
    assert ck.meta["horizon"] == 1
    assert ck.meta["epochs"] == 2
    assert ck.params.shape.input_steps == 8


# --------------------------------------------------------------------------
# adapt and scratch
# --------------------------------------------------------------------------

def test_adapt_from_checkpoint_directory(cfg_path, pretrained, tmp_path):
    out = tmp_path / "adapt"
    rc = main(["adapt", "--config", cfg_path,
               "--checkpoint", os.path.join(pretrained, "checkpoints"),
               "--out", str(out)])
    assert rc == 0

    metrics = _read_rows(out / "adapt_metrics.csv")
    assert metrics[0][:4] == ["horizon", "seed", "method", "dataset"]
    assert len(metrics) == 1 + 2                      # one target per horizon
    assert metrics[1][2] == "adapt"
    assert metrics[1][3] == "source->target"

    loss = _read_rows(out / "adapt_loss.csv")
    assert len(loss) == 1 + 2 * 2
    preds = _read_rows(out / "adapt_predictions.csv")
    assert preds[0] == ["horizon", "step", "truth", "prediction"]
    assert len(preds) > 10

    ck = load_checkpoint(out / "checkpoints" / "adapt-h01-s0.ckpt")
    assert ck.meta["role"] == "adapted"
    assert ck.meta["parent_domain"] == "source"
    assert (out / "resolved_config.json").exists()
    assert (out / "figures" / "adapt_loss.png").stat().st_size > 0
    assert (out / "figures" / "adapt_overlay_h01.png").stat().st_size > 0


def test_adapt_zero_epochs_copies_parameters(cfg_path, pretrained, tmp_path):
    out = tmp_path / "adapt0"
    rc = main(["adapt", "--config", cfg_path,
               "--checkpoint", os.path.join(pretrained, "checkpoints"),
               "--epochs", "0", "--out", str(out)])
    assert rc == 0
    before = load_checkpoint(
        os.path.join(pretrained, "checkpoints", "pretrained-h02.ckpt"))
    after = load_checkpoint(out / "checkpoints" / "adapt-h02-s0.ckpt")
    assert np.array_equal(before.params.view().flatten(),
                          after.params.view().flatten())


def test_adapt_requires_checkpoint_flag(cfg_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["adapt", "--config", cfg_path])
    assert exc.value.code == 2
    assert "--checkpoint" in capsys.readouterr().err


def test_scratch_artifacts_and_overrides(cfg_path, tmp_path):
    out = tmp_path / "scratch"
    rc = main(["scratch", "--config", cfg_path, "--horizon", "2",
               "--seed", "3", "--epochs", "1", "--out", str(out)])
    assert rc == 0
    metrics = _read_rows(out / "scratch_metrics.csv")
    assert len(metrics) == 2                          # header + one horizon
    assert metrics[1][0] == "2"
    assert metrics[1][1] == "3"
    assert metrics[1][2] == "scratch"
    assert metrics[1][3] == "target"
    loss = _read_rows(out / "scratch_loss.csv")
    assert len(loss) == 1 + 1
    assert (out / "checkpoints" / "scratch-h02-s3.ckpt").exists()


def test_horizon_outside_config_exits_2(cfg_path, tmp_path, capsys):
    rc = main(["scratch", "--config", cfg_path, "--horizon", "5",
               "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "horizon 5" in capsys.readouterr().err


# --------------------------------------------------------------------------
# evaluate
# --------------------------------------------------------------------------

def test_evaluate_writes_exactly_one_file(cfg_path, pretrained, tmp_path):
    out = tmp_path / "eval"
    rc = main(["evaluate", "--config", cfg_path,
               "--checkpoint",
               os.path.join(pretrained, "checkpoints", "pretrained-h01.ckpt"),
               "--out", str(out)])
    assert rc == 0
    assert os.listdir(out) == ["evaluate_target_test.csv"]
    rows = _read_rows(out / "evaluate_target_test.csv")
    assert rows[0] == ["dataset", "split", "target", "num_points", "cvrmse",
                       "nmbe", "mape", "mape_excluded", "rmse"]
    assert rows[1][0] == "target"
    assert rows[1][1] == "test"
    assert float(rows[1][8]) > 0


def test_evaluate_matches_run_metrics(cfg_path, pretrained, tmp_path):
    """Scoring a run's saved checkpoint reproduces the run's own metrics."""
    run_out = tmp_path / "run"
    main(["scratch", "--config", cfg_path, "--horizon", "1",
          "--out", str(run_out)])
    run_rmse = float(_read_rows(run_out / "scratch_metrics.csv")[1][10])

    eval_out = tmp_path / "eval"
    main(["evaluate", "--config", cfg_path,
          "--checkpoint", str(run_out / "checkpoints" / "scratch-h01-s0.ckpt"),
          "--out", str(eval_out)])
    eval_rmse = float(_read_rows(eval_out / "evaluate_target_test.csv")[1][8])
    assert eval_rmse == run_rmse


def test_evaluate_shape_mismatch_exits_1(cfg_path, tmp_path, capsys):
    ck = tmp_path / "wide.ckpt"
    save_checkpoint(str(ck), init_params(ModelShape(5, 1, 4, 8, 1), 0),
                    {"role": "pretrained"})
    rc = main(["evaluate", "--config", cfg_path, "--checkpoint", str(ck),
               "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_evaluate_corrupt_checkpoint_exits_2(cfg_path, pretrained, tmp_path,
                                             capsys):
    src = os.path.join(pretrained, "checkpoints", "pretrained-h01.ckpt")
    blob = bytearray(open(src, "rb").read())
    blob[-5] ^= 0x01
    broken = tmp_path / "broken.ckpt"
    broken.write_bytes(bytes(blob))
    rc = main(["evaluate", "--config", cfg_path, "--checkpoint", str(broken),
               "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "checksum" in capsys.readouterr().err


# --------------------------------------------------------------------------
# compare
# --------------------------------------------------------------------------

def test_compare_end_to_end_and_reproducible(cfg_path, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compare", "--config", cfg_path, "--no-figures",
                 "--out", str(a)]) == 0
    table = capsys.readouterr().out
    assert "CVRMSE%" in table and "NMBE%" in table
    assert "MAPE%" in table and "RMSE" in table
    assert "verdict:" in table

    assert main(["compare", "--config", cfg_path, "--no-figures",
                 "--out", str(b)]) == 0
    for name in ("comparison.csv", "comparison.json", "runs.csv",
                 "runs_loss.csv", "pretrain_loss.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert (a / "checkpoints" / "pretrained-h01.ckpt").read_bytes() == \
        (b / "checkpoints" / "pretrained-h01.ckpt").read_bytes()
    assert not (a / "figures").exists()

    rows = _read_rows(a / "comparison.csv")
    assert len(rows) == 1 + 4
    assert [r[1] for r in rows[1:]] == ["scratch", "adapt", "scratch", "adapt"]


def test_compare_seed_and_epochs_overrides(cfg_path, tmp_path):
    out = tmp_path / "fast"
    rc = main(["compare", "--config", cfg_path, "--seed", "1",
               "--epochs", "1", "--no-figures", "--out", str(out)])
    assert rc == 0
    runs = _read_rows(out / "runs.csv")
    seeds = {r[1] for r in runs[1:]}
    assert seeds == {"1"}
    resolved = json.loads((out / "resolved_config.json").read_text())
    assert resolved["seeds"] == [1]
    assert resolved["finetune"]["epochs"] == 1
    assert resolved["scratch"]["epochs"] == 1


# --------------------------------------------------------------------------
# plumbing
# --------------------------------------------------------------------------

def test_out_env_var_honored(cfg_path, tmp_path, monkeypatch):
    land = tmp_path / "landing"
    monkeypatch.setenv("THERMODA_OUT", str(land))
    assert main(["synth", "--config", cfg_path, "--domain", "target"]) == 0
    assert (land / "target.csv").exists()


def test_unknown_flag_is_rejected(cfg_path):
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--config", cfg_path, "--frobnicate"])
    assert exc.value.code == 2


def test_help_lists_subcommands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in ("synth", "pretrain", "adapt", "scratch", "evaluate",
                 "compare"):
        assert name in out


@pytest.mark.parametrize("command,flags", [
    ("synth", ["--config", "--domain", "--out"]),
    ("pretrain", ["--config", "--out", "--horizon", "--epochs"]),
    ("adapt", ["--config", "--checkpoint", "--horizon", "--seed",
               "--epochs", "--out"]),
    ("scratch", ["--config", "--horizon", "--seed", "--epochs", "--out"]),
    ("evaluate", ["--config", "--checkpoint", "--domain", "--split",
                  "--out"]),
    ("compare", ["--config", "--workers", "--no-figures", "--seed",
                 "--epochs", "--out"]),
])
def test_subcommand_help_documents_flags(command, flags, capsys):
    with pytest.raises(SystemExit) as exc:
        main([command, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in flags:
        assert flag in text, f"{command} help misses {flag}"


def test_process_level_exit_code(tmp_path):
    """The module entry point surfaces the same codes as main()."""
    proc = subprocess.run(
        [sys.executable, "-m", "thermoda", "evaluate",
         "--config", str(tmp_path / "missing.json"),
         "--checkpoint", str(tmp_path / "missing.ckpt")],
        capture_output=True, text=True)
    assert proc.returncode == 2
    assert "error:" in proc.stderr
