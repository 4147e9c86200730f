"""Discrete-event machinery: integer-microsecond clock, event queue, RNG streams, nodes."""
from __future__ import annotations

import heapq
import itertools
import math
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

EPOCH_US = 5000


class PastEventError(ValueError):
    pass


class EventQueue:
    """Min-heap of callbacks keyed by (time, insertion order)."""

    def __init__(self):
        self.now = 0
        self._heap = []
        self._seq = itertools.count()

    def __len__(self):
        return len(self._heap)

    def schedule(self, time: int, callback: Callable[[], None]) -> None:
        time = int(time)
        if time < self.now:
            raise PastEventError(f"past event: t={time} < now={self.now}")
        heapq.heappush(self._heap, (time, next(self._seq), callback))

    def peek_time(self):
        return self._heap[0][0] if self._heap else None

    def run_until(self, t_end: int) -> int:
        """Fire every event with timestamp < t_end, then set the clock to t_end."""
        if t_end < self.now:
            raise PastEventError(f"cannot run backwards to {t_end}")
        heap = self._heap
        while heap and heap[0][0] < t_end:
            time, _, cb = heapq.heappop(heap)
            self.now = time
            cb()
        self.now = t_end
        return self.now


STREAMS = ("traffic", "channel", "backoff", "jammer", "agent-exploration", "mobility", "minstrel")


def derive_seed(*keys: int) -> int:
    """A 32-bit seed that depends on every key (e.g. base seed, row, episode)."""
    return int(np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in keys]).generate_state(1)[0])


def rng_stream(seed: int, stream_id: str) -> np.random.Generator:
    # crc32 keeps the stream key stable across interpreter runs (hash() is salted)
    key = zlib.crc32(stream_id.encode())
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, key]))


@dataclass
class RandomWalk:
    step: float = 1.0
    interval_us: int = 500_000
    bounds: tuple = (0.0, 0.0, 50.0, 50.0)  # xmin, ymin, xmax, ymax


@dataclass
class Node:
    node_id: str
    x: float
    y: float
    mobility: RandomWalk | None = None
    _next_move: int = field(default=0, repr=False)


class NodeRegistry:
    def __init__(self, rng: np.random.Generator | None = None):
        self._nodes: dict[str, Node] = {}
        self._rng = rng

    def add(self, node_id, x, y, mobility: RandomWalk | None = None) -> Node:
        node = Node(node_id, float(x), float(y), mobility)
        if mobility is not None:
            if self._rng is None:
                raise ValueError("random-walk mobility needs an RNG")
            xmin, ymin, xmax, ymax = mobility.bounds
            if not (xmin <= x <= xmax and ymin <= y <= ymax):
                raise ValueError(f"{node_id} starts outside its walk bounds")
            node._next_move = mobility.interval_us
        self._nodes[node_id] = node
        return node

    def __getitem__(self, node_id) -> Node:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise KeyError(f"unknown node id: {node_id!r}") from None

    def __contains__(self, node_id):
        return node_id in self._nodes

    def advance(self, now: int) -> None:
        """Apply every random-walk step due at or before ``now``."""
        for node in self._nodes.values():
            walk = node.mobility
            if walk is None:
                continue
            while node._next_move <= now:
                theta = self._rng.uniform(0.0, 2.0 * math.pi)
                xmin, ymin, xmax, ymax = walk.bounds
                node.x = min(max(node.x + walk.step * math.cos(theta), xmin), xmax)
                node.y = min(max(node.y + walk.step * math.sin(theta), ymin), ymax)
                node._next_move += walk.interval_us

    def position(self, node_id):
        n = self[node_id]
        return n.x, n.y

    def distance(self, a, b) -> float:
        na, nb = self[a], self[b]
        return math.hypot(na.x - nb.x, na.y - nb.y)
