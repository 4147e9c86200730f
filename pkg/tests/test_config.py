import pytest

from wifirl.config import PAPER_RATE_GRID, ConfigError, ExperimentConfig


def test_full_profile_defaults():
    c = ExperimentConfig.from_dict({"scale": "full"})
    link = c.link()
    assert link.sim_time_us == 10_000_000
    assert link.queue_capacity == 5000 and link.payload == 1472
    assert link.battery_j == 5.0
    assert c["arrival_rate"] == [60_000.0]
    assert ExperimentConfig.from_dict({"scale": "full", "mode": "test"})["arrival_rate"] == list(PAPER_RATE_GRID)


def test_desk_profile_scales_rates():
    c = ExperimentConfig.from_dict({"scale": "desk", "mode": "test"})
    assert len(c["arrival_rate"]) == 12
    assert c["arrival_rate"][-1] == pytest.approx(10_000)
    assert c.link().sim_time_us == 1_000_000 and c.link().battery_j == 0.5


def test_nested_tables_and_dotted_keys_agree(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('mode = "train"\nagent.lambda = 0.5\n[channel]\nfading = false\n')
    c = ExperimentConfig.load(p)
    assert c["agent.lambda"] == 0.5 and c["channel.fading"] is False
    assert c.link().channel.fading is False


@pytest.mark.parametrize("raw, msg", [
    ({"agent": {"lamda": 0.5}}, "unknown config key"),
    ({"mode": "tune"}, "mode"),
    ({"scale": "huge"}, "scale"),
    ({"distance": []}, "non-empty"),
    ({"jammers": 3}, "jammers"),
    ({"channel": {"fading": "yes"}}, "true/false"),
    ({"sim_time_s": 0.0021}, "multiple of 5 ms"),
    ({"energy": {"sleep_a": 0.5}}, "sleep"),
    ({"test": {"controllers": ["oracle"]}}, "unknown controller"),
    ({"seed": 1.5}, "integer"),
])
def test_invalid_configs(raw, msg):
    with pytest.raises(ConfigError, match=msg):
        ExperimentConfig.from_dict(raw)


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.load(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("mode = \n")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_link_overrides_and_mobility():
    c = ExperimentConfig.from_dict({"distance": [5, 20], "jammers": [0, 2], "mobility": {"rx": "random-walk"}})
    link = c.link(arrival_rate=123, distance=20, jammers=2)
    assert (link.arrival_rate, link.distance, link.n_jammers) == (123, 20, 2)
    assert link.rx_mobility is not None and link.rx_mobility.interval_us == 500_000
    assert c.with_overrides(agent__lambda=0.2)["agent.lambda"] == 0.2
    with pytest.raises(ConfigError):
        c.with_overrides(nope=1)
