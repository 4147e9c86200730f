"""Experiment configuration: flat dotted keys in a TOML file, layered over a scale profile.

Example::

    mode = "train"
    scale = "desk"
    seed = 7
    agent.kind = "sarsa"
    agent.lambda = 0.8
    channel.fading = true
"""
from __future__ import annotations

from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .energy import RadioEnergyParams
from .engine import RandomWalk
from .jammer import JammerConfig
from .phy import DEFAULT_MIN_SINR_DB, ChannelParams
from .simulation import LinkConfig


class ConfigError(ValueError):
    pass


PAPER_RATE_GRID = tuple(range(5000, 60001, 5000))
PAPER_TRAIN_RATE = 60000.0

PROFILES = {
    "full": {
        "sim_time_s": 10.0,
        "energy.battery_j": 5.0,
        "queue.capacity": 5000,
        "episodes": 500,
        "rate_scale": 1.0,
    },
    "desk": {
        "sim_time_s": 1.0,
        "energy.battery_j": 0.5,
        "queue.capacity": 500,
        "episodes": 4500,
        "rate_scale": 1.0 / 6.0,
    },
}

# key -> (default, type). Lists are allowed where the type is "list".
SCHEMA = {
    "mode": ("train", str),
    "scale": ("desk", str),
    "seed": (0, int),
    "episodes": (None, int),
    "test.episodes": (30, int),
    "sim_time_s": (None, float),
    "rate_scale": (None, float),
    "arrival_rate": (None, "list"),
    "distance": (10.0, "list"),
    "jammers": (1, "list"),
    "agent.kind": ("sarsa", str),
    "agent.lambda": (0.8, float),
    "agent.gamma": (0.9, float),
    "agent.alpha": (0.2, float),
    "agent.epsilon": (1.0, float),
    "agent.epsilon_decay": (0.99998, float),
    "agent.epsilon_floor": (0.01, float),
    "agent.literal_update": (False, bool),
    "agent.energy_reference": ("capacity", str),
    "agent.power": (10, int),
    "agent.mcs": (0, int),
    "test.controllers": (["qtable", "minstrel"], "list"),
    "minstrel.lookaround": (0.1, float),
    "minstrel.update_interval_s": (0.1, float),
    "minstrel.ewma_weight": (0.25, float),
    "minstrel.tx_power_dbm": (10, int),
    "queue.capacity": (None, int),
    "queue.max_delay_s": (1.0, float),
    "traffic.payload_bytes": (1472, int),
    "channel.frequency_hz": (5.2e9, float),
    "channel.bandwidth_hz": (160e6, float),
    "channel.nakagami_m": (1.5, float),
    "channel.noise_figure_db": (7.0, float),
    "channel.cca_threshold_dbm": (-82.0, float),
    "channel.fading": (True, bool),
    "channel.per_width_db": (1.5, float),
    "channel.min_sinr_db": (list(DEFAULT_MIN_SINR_DB), "list"),
    "energy.voltage": (3.0, float),
    "energy.idle_a": (0.273, float),
    "energy.busy_a": (0.273, float),
    "energy.rx_a": (0.313, float),
    "energy.sleep_a": (0.033, float),
    "energy.tx_eta": (0.1, float),
    "energy.tx_base_a": (0.273, float),
    "energy.battery_j": (None, float),
    "energy.battery_initial_fraction": (1.0, float),
    "jammer.tx_power_dbm": (10.0, float),
    "jammer.duty_cycle": (0.2, float),
    "jammer.burst_us": (500, int),
    "mac.max_ampdu": (64, int),
    "mac.retry_limit": (7, int),
    "mobility.rx": ("constant", str),
    "mobility.step_m": (1.0, float),
    "mobility.interval_s": (0.5, float),
    "output.qtable": ("qtable.bin", str),
    "output.csv": ("results.csv", str),
}


def flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(key, value, kind):
    if kind == "list":
        return list(value) if isinstance(value, (list, tuple)) else [value]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if kind is int and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot read {value!r} as {kind.__name__}") from None


@dataclass
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        flat = flatten(raw)
        unknown = sorted(set(flat) - set(SCHEMA))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        scale = flat.get("scale", SCHEMA["scale"][0])
        if scale not in PROFILES:
            raise ConfigError(f"scale must be one of {sorted(PROFILES)}, got {scale!r}")
        vals = {k: d for k, (d, _) in SCHEMA.items()}
        vals.update(PROFILES[scale])
        for k, v in flat.items():
            vals[k] = _coerce(k, v, SCHEMA[k][1])
        for k, (_, kind) in SCHEMA.items():
            if kind == "list" and vals[k] is not None and not isinstance(vals[k], list):
                vals[k] = [vals[k]]
        if vals["arrival_rate"] is None:
            base = [PAPER_TRAIN_RATE] if vals["mode"] == "train" else list(PAPER_RATE_GRID)
            vals["arrival_rate"] = [r * vals["rate_scale"] for r in base]
        cfg = cls(vals)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return cls.from_dict(raw)

    def validate(self) -> None:
        v = self.values
        if v["mode"] not in ("train", "test"):
            raise ConfigError(f"mode must be train or test, got {v['mode']!r}")
        if v["agent.kind"] not in ("sarsa", "minstrel", "fixed"):
            raise ConfigError(f"agent.kind must be sarsa, minstrel or fixed, got {v['agent.kind']!r}")
        for key in ("arrival_rate", "distance", "jammers", "test.controllers"):
            if not v[key]:
                raise ConfigError(f"{key}: sweep list must be non-empty")
        if any(r < 0 for r in v["arrival_rate"]):
            raise ConfigError("arrival_rate must be >= 0")
        if any(j not in (0, 1, 2) for j in v["jammers"]):
            raise ConfigError("jammers must be 0, 1 or 2")
        if v["episodes"] < 0 or v["test.episodes"] < 1:
            raise ConfigError("episode counts must be positive")
        if v["sim_time_s"] <= 0 or v["sim_time_s"] * 1e6 % 5000:
            raise ConfigError("sim_time_s must be a positive multiple of 5 ms")
        if v["mobility.rx"] not in ("constant", "random-walk"):
            raise ConfigError("mobility.rx must be constant or random-walk")
        if v["agent.energy_reference"] not in ("capacity", "episode_start"):
            raise ConfigError("agent.energy_reference must be capacity or episode_start")
        for c in v["test.controllers"]:
            kind = str(c).split(":")[0]
            if kind not in ("qtable", "minstrel", "fixed"):
                raise ConfigError(f"test.controllers: unknown controller {c!r}")
        try:
            self.link()
            RadioEnergyParams(**self._energy_kwargs())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def _energy_kwargs(self):
        v = self.values
        return dict(voltage=v["energy.voltage"], idle_a=v["energy.idle_a"], busy_a=v["energy.busy_a"],
                    rx_a=v["energy.rx_a"], sleep_a=v["energy.sleep_a"], tx_eta=v["energy.tx_eta"],
                    tx_base_a=v["energy.tx_base_a"])

    def link(self, arrival_rate=None, distance=None, jammers=None) -> LinkConfig:
        """The simulator configuration for one sweep point (first list entries by default)."""
        v = self.values
        channel = ChannelParams(
            frequency=v["channel.frequency_hz"], bandwidth=v["channel.bandwidth_hz"],
            nakagami_m=v["channel.nakagami_m"], noise_figure=v["channel.noise_figure_db"],
            cca_threshold=v["channel.cca_threshold_dbm"], fading=v["channel.fading"],
            per_width_db=v["channel.per_width_db"], min_sinr=tuple(float(x) for x in v["channel.min_sinr_db"]),
        )
        walk = None
        if v["mobility.rx"] == "random-walk":
            walk = RandomWalk(step=v["mobility.step_m"], interval_us=round(v["mobility.interval_s"] * 1e6))
        return LinkConfig(
            distance=float(v["distance"][0] if distance is None else distance),
            n_jammers=int(v["jammers"][0] if jammers is None else jammers),
            jammer=JammerConfig(tx_power=v["jammer.tx_power_dbm"], duty_cycle=v["jammer.duty_cycle"],
                                burst_us=v["jammer.burst_us"]),
            arrival_rate=float(v["arrival_rate"][0] if arrival_rate is None else arrival_rate),
            sim_time_us=round(v["sim_time_s"] * 1e6),
            queue_capacity=v["queue.capacity"],
            max_delay_us=round(v["queue.max_delay_s"] * 1e6),
            payload=v["traffic.payload_bytes"],
            channel=channel,
            energy=RadioEnergyParams(**self._energy_kwargs()),
            battery_j=v["energy.battery_j"],
            battery_initial_fraction=v["energy.battery_initial_fraction"],
            max_ampdu=v["mac.max_ampdu"],
            retry_limit=v["mac.retry_limit"],
            rx_mobility=walk,
        )

    def with_overrides(self, **flat) -> "ExperimentConfig":
        vals = dict(self.values)
        for k, val in flat.items():
            key = k.replace("__", ".")
            if key not in SCHEMA and key not in PROFILES["full"]:
                raise ConfigError(f"unknown config key: {key}")
            vals[key] = val
        cfg = ExperimentConfig(vals)
        cfg.validate()
        return cfg
