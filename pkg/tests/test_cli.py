"""CLI surfaces: every command end-to-end in temp directories."""

import json

import pytest

from telekin.cli import main
from telekin.config import EngineConfig
from telekin.operator import synthesize_idle
from telekin.trace import save_trace


@pytest.fixture
def idle_trace(tmp_path):
    path = tmp_path / "idle.jsonl"
    save_trace(synthesize_idle(EngineConfig(), seed=9, duration=90.0), path)
    return path


def test_calibrate_writes_file(idle_trace, tmp_path, capsys):
    out = tmp_path / "calib.json"
    assert main(["calibrate", "--trace", str(idle_trace), "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"version", "mean_interval", "c_th", "f_min", "f_max"}
    assert payload["c_th"] == pytest.approx(1.67 * payload["mean_interval"])


def test_calibrate_rerun_identical_bytes(idle_trace, tmp_path):
    out1 = tmp_path / "c1.json"
    out2 = tmp_path / "c2.json"
    assert main(["calibrate", "--trace", str(idle_trace), "--out", str(out1)]) == 0
    assert main(["calibrate", "--trace", str(idle_trace), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_calibrate_short_trace_is_validation_error(tmp_path, capsys):
    path = tmp_path / "short.jsonl"
    save_trace(synthesize_idle(EngineConfig(), seed=9, duration=30.0), path)
    rc = main(["calibrate", "--trace", str(path), "--out", str(tmp_path / "c.json")])
    assert rc == 3
    assert "60" in capsys.readouterr().err


def test_run_synthesized_all_no(tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["run", "--condition", "c=no,s=no,e=no", "--seed", "5", "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["complete"] is True
    assert (out / "snapshots.jsonl").exists()
    assert (out / "trace.jsonl").exists()
    assert (out / "calibration.json").exists()


def test_run_same_seed_identical_outputs(tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    for out in (out1, out2):
        assert main(["run", "--condition", "c=no,s=yes,e=no", "--seed", "7",
                     "--out", str(out)]) == 0
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()
    assert (out1 / "snapshots.jsonl").read_bytes() == (out2 / "snapshots.jsonl").read_bytes()
    assert (out1 / "trace.jsonl").read_bytes() == (out2 / "trace.jsonl").read_bytes()


def test_run_trace_replay_matches_synth_run(tmp_path):
    synth_out = tmp_path / "synth"
    assert main(["run", "--condition", "c=no,s=yes,e=yes", "--seed", "3",
                 "--out", str(synth_out)]) == 0
    replay_out = tmp_path / "replay"
    rc = main([
        "run", "--condition", "c=no,s=yes,e=yes",
        "--trace", str(synth_out / "trace.jsonl"),
        "--calibration", str(synth_out / "calibration.json"),
        "--out", str(replay_out),
    ])
    assert rc == 0
    assert (synth_out / "snapshots.jsonl").read_bytes() == \
        (replay_out / "snapshots.jsonl").read_bytes()


def test_run_detector_condition_without_calibration_fails(tmp_path, idle_trace, capsys):
    rc = main(["run", "--condition", "s=yes", "--trace", str(idle_trace),
               "--out", str(tmp_path / "x")])
    assert rc == 3
    assert "calibration" in capsys.readouterr().err.lower()


def test_run_requires_exactly_one_source(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--condition", "c=no", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_run_bad_condition_string(tmp_path, capsys):
    rc = main(["run", "--condition", "q=yes", "--seed", "1", "--out", str(tmp_path / "x")])
    assert rc == 3


@pytest.fixture
def fast_cfg(tmp_path):
    """Lower tick rate keeps batch runs quick; spirit of the runs unchanged."""
    from telekin.config import save_config

    path = tmp_path / "fast.json"
    save_config(EngineConfig(tick_rate=30, emg_rate=600), path)
    return path


def test_batch_eight_reports_and_fixed_permutation(tmp_path, fast_cfg):
    out = tmp_path / "batch"
    assert main(["batch", "--seed", "99", "--out", str(out), "--config", str(fast_cfg)]) == 0
    manifest = json.loads((out / "batch.json").read_text())
    assert len(manifest["runs"]) == 8
    run_dirs = [r["dir"] for r in manifest["runs"]]
    assert len(set(run_dirs)) == 8
    for r in manifest["runs"]:
        assert (out / r["dir"] / "report.json").exists()
        assert r["complete"] is True
    # same master seed reproduces the same order
    out2 = tmp_path / "batch2"
    assert main(["batch", "--seed", "99", "--out", str(out2), "--config", str(fast_cfg)]) == 0
    manifest2 = json.loads((out2 / "batch.json").read_text())
    assert [r["condition"] for r in manifest2["runs"]] == \
        [r["condition"] for r in manifest["runs"]]


def test_batch_order_varies_with_seed():
    # permutation derivation, checked without paying for full runs
    from telekin.rng import SplitMix64, derive

    orders = []
    for seed in (1, 2, 3, 4):
        order = list(range(8))
        SplitMix64(derive(seed, "batch-order")).shuffle(order)
        orders.append(tuple(order))
    assert len(set(orders)) > 1


def _write_csv(path, rows):
    header = "participant,concentration,strain,energy,response"
    path.write_text("\n".join([header] + rows) + "\n", encoding="utf-8")


def test_analyze_planted_effect(tmp_path, capsys):
    rows = []
    for i in range(6):
        for a in (0, 1):
            for b in (0, 1):
                for c in (0, 1):
                    level = ["no", "yes"]
                    value = 10.0 + 5.0 * a + 0.13 * ((i * 7 + a + 2 * b + 3 * c) % 5)
                    rows.append(f"p{i},{level[a]},{level[b]},{level[c]},{value}")
    csv_path = tmp_path / "obs.csv"
    _write_csv(csv_path, rows)
    out = tmp_path / "anova.json"
    assert main(["analyze", "--csv", str(csv_path), "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    effects = payload["effects"]
    best = max(effects, key=lambda name: effects[name]["F"])
    assert best == "concentration"
    assert effects["concentration"]["df1"] == 1
    assert effects["concentration"]["df2"] == len(rows) - 8


def test_analyze_constant_responses_surfaces_undefined_f(tmp_path, capsys):
    rows = []
    for i in range(2):
        for a in ("yes", "no"):
            for b in ("yes", "no"):
                for c in ("yes", "no"):
                    rows.append(f"p{i},{a},{b},{c},7.0")
    csv_path = tmp_path / "obs.csv"
    _write_csv(csv_path, rows)
    rc = main(["analyze", "--csv", str(csv_path), "--out", str(tmp_path / "a.json")])
    assert rc == 3
    assert "undefined" in capsys.readouterr().err.lower()


def test_analyze_malformed_csv_names_line(tmp_path, capsys):
    csv_path = tmp_path / "obs.csv"
    _write_csv(csv_path, ["p0,yes,no", "p0,yes,no,yes,1.0"])
    rc = main(["analyze", "--csv", str(csv_path), "--out", str(tmp_path / "a.json")])
    assert rc == 3
    assert "line 2" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["run"])  # missing required flags
    assert exc.value.code == 2
