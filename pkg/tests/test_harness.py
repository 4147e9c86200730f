import csv
import hashlib

import pytest

from wifirl import harness
from wifirl.agents import load_qtable
from wifirl.config import ExperimentConfig
from wifirl.harness import HarnessError, emit_plotdata


def small(mode, **extra):
    raw = {"mode": mode, "scale": "desk", "sim_time_s": 0.05, "episodes": 3, "seed": 2,
           "test": {"episodes": 2}}
    raw.update(extra)
    return ExperimentConfig.from_dict(raw)


def rows_of(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_train_outputs_and_determinism(tmp_path):
    cfg = small("train", distance=[5.0, 20.0])
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    harness.train(cfg, out_qtable=a / "q.bin", out_csv=a / "t.csv")
    harness.train(cfg, out_qtable=b / "q.bin", out_csv=b / "t.csv")
    assert (a / "t.csv").read_bytes() == (b / "t.csv").read_bytes()
    assert (a / "q.bin").read_bytes() == (b / "q.bin").read_bytes()
    rows = rows_of(a / "t.csv")
    assert tuple(rows[0]) == harness.TRAIN_COLUMNS and len(rows) == 4
    assert {r[-1] for r in rows[1:]} <= {"5", "20"}
    other = tmp_path / "c.csv"
    harness.train(cfg, seed=3, out_qtable=tmp_path / "c.bin", out_csv=other)
    assert other.read_bytes() != (a / "t.csv").read_bytes()


def test_train_zero_episodes(tmp_path):
    cfg = small("train", episodes=0)
    harness.train(cfg, out_qtable=tmp_path / "q.bin", out_csv=tmp_path / "t.csv")
    assert rows_of(tmp_path / "t.csv") == [list(harness.TRAIN_COLUMNS)]
    assert len(load_qtable(tmp_path / "q.bin")) == 0


def test_train_rejects_wrong_mode_and_bad_paths(tmp_path):
    with pytest.raises(HarnessError, match="mode"):
        harness.train(small("test"), out_qtable=tmp_path / "q", out_csv=tmp_path / "t")
    with pytest.raises(HarnessError):
        harness.train(small("train"), out_qtable=tmp_path / "nodir" / "q.bin", out_csv=tmp_path / "t.csv")


def test_test_sweep_rows_and_qtable_untouched(tmp_path):
    harness.train(small("train"), out_qtable=tmp_path / "q.bin", out_csv=tmp_path / "t.csv")
    digest = hashlib.sha256((tmp_path / "q.bin").read_bytes()).hexdigest()
    cfg = small("test", test={"episodes": 1, "controllers": ["qtable", "minstrel"]})
    out = tmp_path / "r.csv"
    rows = harness.test(cfg, [tmp_path / "q.bin"], out)
    assert len(rows) == 2 * 12
    assert hashlib.sha256((tmp_path / "q.bin").read_bytes()).hexdigest() == digest
    header = rows_of(out)[0]
    assert tuple(header) == harness.TEST_COLUMNS
    again = tmp_path / "r2.csv"
    harness.test(cfg, [tmp_path / "q.bin"], again)
    assert again.read_bytes() == out.read_bytes()


def test_missing_qtable(tmp_path):
    cfg = small("test", test={"controllers": ["qtable"]})
    with pytest.raises(HarnessError, match="missing Q-table"):
        harness.test(cfg, [tmp_path / "nope.bin"], tmp_path / "r.csv")
    with pytest.raises(HarnessError, match="no Q-table"):
        harness.test(cfg, [], tmp_path / "r.csv")


def test_fixed_mcs0_respects_rate_bound():
    cfg = ExperimentConfig.from_dict({"mode": "test", "scale": "desk", "sim_time_s": 0.2,
                                      "test": {"controllers": ["fixed:10:0"]}})
    name, ctrl = harness.build_controllers(cfg)[0]
    res = harness.evaluate(cfg, ctrl, 60_000, 1.0, 0, seed=0, episodes=2)
    assert 0 < res["throughput_mbps"] <= 58.5


def test_csv_number_format():
    assert harness.fmt(1 / 3) == "0.333333"
    assert harness.fmt(123456789.0) == "1.23457e+08"
    assert harness.fmt(7) == "7"


def test_plotdata(tmp_path):
    src = tmp_path / "r.csv"
    cols = harness.TEST_COLUMNS
    rows = [dict(controller=c, arrival_rate=r, distance=10.0, jammers=1, episodes=30,
                 throughput_mbps=r / 100, energy_j=0.5, loss_pct=0.0)
            for c in ("a", "b", "c", "d") for r in (1000.0, 2000.0)]
    harness.write_csv(src, cols, rows)
    data = emit_plotdata(src, "throughput-vs-rate", tmp_path / "p.json")
    assert len(data["series"]) == 4 and data["series"][0]["x"] == [1000.0, 2000.0]
    assert (tmp_path / "p.json").exists()
    train = tmp_path / "t.csv"
    harness.write_csv(train, harness.TRAIN_COLUMNS,
                      [dict(episode=i, total_reward=i, throughput_mbps=1.0, energy_j=0.1, loss_pct=0.0,
                            epsilon=1.0, terminal="none", steps=5, distance=10.0) for i in range(7)])
    assert len(emit_plotdata(train, "reward-vs-episode")["series"][0]["y"]) == 7
    empty = tmp_path / "e.csv"
    harness.write_csv(empty, cols, [])
    with pytest.raises(HarnessError, match="no data"):
        emit_plotdata(empty, "throughput-vs-rate")
    with pytest.raises(HarnessError, match="unknown figure"):
        emit_plotdata(src, "fig99")
