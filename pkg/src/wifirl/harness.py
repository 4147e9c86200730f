"""Training and test-sweep drivers, CSV output and plot-ready reshaping."""
from __future__ import annotations

import csv
import json
import logging
import os
from dataclasses import replace
from pathlib import Path

import numpy as np

from .agents import FixedPolicy, MinstrelPolicy, QTable, SarsaAgent, load_qtable, save_qtable
from .agents.sarsa import START_ACTION, episode_summary, policy_action
from .config import ExperimentConfig
from .engine import derive_seed, rng_stream
from .env import ControlAction, LinkEnv, state_index

log = logging.getLogger(__name__)

TRAIN_COLUMNS = ("episode", "total_reward", "throughput_mbps", "energy_j", "loss_pct",
                 "epsilon", "terminal", "steps", "distance")
TEST_COLUMNS = ("controller", "arrival_rate", "distance", "jammers", "episodes",
                "throughput_mbps", "energy_j", "loss_pct")

FIGURES = {
    "reward-vs-episode": ("episode", "total_reward"),
    "throughput-vs-episode": ("episode", "throughput_mbps"),
    "loss-vs-episode": ("episode", "loss_pct"),
    "energy-vs-episode": ("episode", "energy_j"),
    "throughput-vs-rate": ("arrival_rate", "throughput_mbps"),
    "energy-vs-rate": ("arrival_rate", "energy_j"),
}


class HarnessError(RuntimeError):
    pass


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def write_csv(path, columns, rows) -> None:
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for row in rows:
                w.writerow([fmt(row[c]) for c in columns])
    except OSError as exc:
        raise HarnessError(f"cannot write {path}: {exc.strerror}") from None


def make_agent(cfg: ExperimentConfig, seed: int) -> SarsaAgent:
    return SarsaAgent(
        reward_weight=cfg["agent.lambda"], gamma=cfg["agent.gamma"], alpha=cfg["agent.alpha"],
        epsilon=cfg["agent.epsilon"], epsilon_decay=cfg["agent.epsilon_decay"],
        epsilon_floor=cfg["agent.epsilon_floor"], literal_update=cfg["agent.literal_update"],
        random_state=seed,
    )


def train(cfg: ExperimentConfig, seed: int | None = None, out_qtable=None, out_csv=None):
    """Run the SARSA training loop and write the Q-table and per-episode CSV.

    With several distances configured, each episode draws its receiver
    distance uniformly from the list.
    """
    if cfg["mode"] != "train":
        raise HarnessError("config mode is not 'train'")
    if cfg["agent.kind"] != "sarsa":
        raise HarnessError("training requires agent.kind = 'sarsa'")
    seed = cfg["seed"] if seed is None else seed
    out_qtable = out_qtable or cfg["output.qtable"]
    out_csv = out_csv or cfg["output.csv"]
    for p in (out_qtable, out_csv):
        parent = Path(p).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise HarnessError(f"output directory not writable: {parent}")

    base = cfg.link()
    distances = [float(d) for d in cfg["distance"]]
    env = LinkEnv(base, cfg["agent.lambda"], energy_reference=cfg["agent.energy_reference"])
    picker = rng_stream(seed, "mobility")
    n = cfg["episodes"]
    chosen = []

    def before(ep, env):
        d = distances[0] if len(distances) == 1 else distances[int(picker.integers(len(distances)))]
        chosen.append(d)
        env.config = replace(base, distance=d)

    def progress(ep, summary):
        if ep % 50 == 0 or ep == n - 1:
            log.info("episode %d reward %.3f throughput %.1f Mbps eps %.3f end=%s", ep,
                     summary["total_reward"], summary["throughput_mbps"], summary["epsilon"],
                     summary["terminal"])

    agent = make_agent(cfg, seed)
    agent.fit(env, n, episode_seeds=[derive_seed(seed, ep) for ep in range(n)],
              before_episode=before, callback=progress)
    rows = [dict(h, distance=chosen[i]) for i, h in enumerate(agent.history_)]
    save_qtable(agent.q_table_, out_qtable)
    write_csv(out_csv, TRAIN_COLUMNS, rows)
    return agent, rows


def run_test_episode(env: LinkEnv, controller, seed: int) -> dict:
    """One test episode: no learning, no terminal states."""
    obs = env.reset(seed)
    last = None
    total = 0.0
    prev = START_ACTION
    while not env.done:
        if isinstance(controller, SarsaAgent):
            prev = policy_action(controller.q_table_, state_index(obs), prev)
            action = ControlAction.from_index(prev)
        elif isinstance(controller, FixedPolicy):
            action = ControlAction(controller.power, controller.mcs)
        else:  # per-frame rate control inside the simulator
            action = None
        last = env.step(action)
        total += last.reward
        obs = last.next_state
    return episode_summary(env, total, last, 0.0)


def build_controllers(cfg: ExperimentConfig, qtables=()) -> list[tuple[str, object]]:
    out = []
    qtables = list(qtables)
    for spec in cfg["test.controllers"]:
        kind, *args = str(spec).split(":")
        if kind == "qtable":
            if not qtables:
                raise HarnessError("test.controllers lists 'qtable' but no Q-table was given")
            for path in qtables:
                if not Path(path).is_file():
                    raise HarnessError(f"missing Q-table: {path}")
                out.append((f"sarsa:{Path(path).stem}", SarsaAgent.from_qtable(load_qtable(path))))
        elif kind == "minstrel":
            out.append(("minstrel", MinstrelPolicy(
                lookaround=cfg["minstrel.lookaround"],
                update_interval_us=round(cfg["minstrel.update_interval_s"] * 1e6),
                ewma_weight=cfg["minstrel.ewma_weight"], tx_power=cfg["minstrel.tx_power_dbm"])))
        else:
            power, mcs = (int(args[0]), int(args[1])) if args else (cfg["agent.power"], cfg["agent.mcs"])
            ControlAction(power, mcs).index  # validates
            out.append((f"fixed:{power}:{mcs}", FixedPolicy(power, mcs)))
    return out


def evaluate(cfg: ExperimentConfig, controller, arrival_rate, distance, jammers, seed, episodes=None):
    """Mean test metrics of one controller at one sweep point."""
    link = cfg.link(arrival_rate, distance, jammers)
    factory = controller.controller if isinstance(controller, MinstrelPolicy) else None
    weight = cfg["agent.lambda"]
    env = LinkEnv(link, weight, energy_reference=cfg["agent.energy_reference"],
                  terminal_states=False, controller_factory=factory)
    episodes = cfg["test.episodes"] if episodes is None else episodes
    runs = [run_test_episode(env, controller, derive_seed(seed, ep)) for ep in range(episodes)]
    return {
        "episodes": episodes,
        "throughput_mbps": float(np.mean([r["throughput_mbps"] for r in runs])),
        "energy_j": float(np.mean([r["energy_j"] for r in runs])),
        "loss_pct": float(np.mean([r["loss_pct"] for r in runs])),
    }


def test(cfg: ExperimentConfig, qtables=(), out_csv=None, seed=None):
    """Sweep arrival rate x distance x jammers for every configured controller."""
    if cfg["mode"] != "test":
        raise HarnessError("config mode is not 'test'")
    seed = cfg["seed"] if seed is None else seed
    out_csv = out_csv or cfg["output.csv"]
    controllers = build_controllers(cfg, qtables)
    points = [(r, d, j) for j in cfg["jammers"] for d in cfg["distance"] for r in cfg["arrival_rate"]]
    rows = []
    for name, ctrl in controllers:
        for row_idx, (rate, dist, jam) in enumerate(points):
            # same seed per sweep point across controllers: paired comparison
            res = evaluate(cfg, ctrl, rate, dist, jam, seed + row_idx)
            rows.append(dict(controller=name, arrival_rate=float(rate), distance=float(dist),
                             jammers=int(jam), **res))
            log.info("%s rate=%g d=%g j=%d -> %.1f Mbps %.4f J", name, rate, dist, jam,
                     res["throughput_mbps"], res["energy_j"])
    write_csv(out_csv, TEST_COLUMNS, rows)
    return rows


def read_csv(path) -> list[dict]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise HarnessError(f"cannot read {path}: {exc.strerror}") from None


def emit_plotdata(csv_path, figure: str, out=None) -> dict:
    """Reshape a training or test CSV into x/y series for one figure type.

    Test CSVs give one series per controller (suffixed with distance and
    jammer count when the file holds more than one such combination).
    """
    if figure not in FIGURES:
        raise HarnessError(f"unknown figure id {figure!r}; choose from {', '.join(FIGURES)}")
    rows = read_csv(csv_path)
    if not rows:
        raise HarnessError(f"{csv_path}: no data")
    xk, yk = FIGURES[figure]
    if xk not in rows[0] or yk not in rows[0]:
        raise HarnessError(f"{csv_path}: figure {figure!r} needs columns {xk!r} and {yk!r}")
    series: dict[str, dict] = {}
    if xk == "episode":
        series["training"] = {"x": [int(r[xk]) for r in rows], "y": [float(r[yk]) for r in rows]}
    else:
        combos = {(r["distance"], r["jammers"]) for r in rows}
        for r in rows:
            label = r["controller"]
            if len(combos) > 1:
                label += f" d={r['distance']}m j={r['jammers']}"
            s = series.setdefault(label, {"x": [], "y": []})
            s["x"].append(float(r[xk]))
            s["y"].append(float(r[yk]))
    data = {"figure": figure, "x": xk, "y": yk,
            "series": [{"label": k, **v} for k, v in series.items()]}
    if out is not None:
        try:
            Path(out).write_text(json.dumps(data, indent=1) + "\n", encoding="utf-8")
        except OSError as exc:
            raise HarnessError(f"cannot write {out}: {exc.strerror}") from None
    return data


# stop pytest from collecting the sweep driver when it is imported into a test module
test.__test__ = False
