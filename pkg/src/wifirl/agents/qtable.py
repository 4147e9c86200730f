"""Sparse tabular Q-function with a small versioned binary file format.

File layout (little-endian): ``b"WRLQ"``, ``u16`` version, ``u64`` entry
count, then ``count`` packed records of ``(state u32, action u8, q f64)``.
"""
from __future__ import annotations

import os
import struct

import numpy as np

from ..env import N_ACTIONS, N_STATES

MAGIC = b"WRLQ"
VERSION = 1
_HEADER = struct.Struct("<4sHQ")
RECORD = np.dtype([("state", "<u4"), ("action", "u1"), ("q", "<f8")])


class QTableFormatError(ValueError):
    pass


class QTable:
    """Q(s, a) with 0 as the default for pairs never written.

    Rows are allocated per visited state so ``argmax`` over the 100 actions
    is a single numpy call.
    """

    def __init__(self, n_states: int = N_STATES, n_actions: int = N_ACTIONS):
        self.n_states = n_states
        self.n_actions = n_actions
        self._rows: dict[int, np.ndarray] = {}
        self._written: dict[int, np.ndarray] = {}

    def __len__(self):
        return int(sum(int(w.sum()) for w in self._written.values()))

    def __eq__(self, other):
        if not isinstance(other, QTable):
            return NotImplemented
        return self.entries() == other.entries()

    def _check(self, s, a):
        if not 0 <= s < self.n_states:
            raise IndexError(f"state {s} out of range")
        if not 0 <= a < self.n_actions:
            raise IndexError(f"action {a} out of range")

    def get(self, s: int, a: int) -> float:
        self._check(s, a)
        row = self._rows.get(s)
        return 0.0 if row is None else float(row[a])

    def __getitem__(self, key):
        return self.get(*key)

    def set(self, s: int, a: int, value: float) -> None:
        self._check(s, a)
        row = self._rows.get(s)
        if row is None:
            row = self._rows[s] = np.zeros(self.n_actions)
            self._written[s] = np.zeros(self.n_actions, dtype=bool)
        row[a] = value
        self._written[s][a] = True

    def __setitem__(self, key, value):
        self.set(key[0], key[1], value)

    def row(self, s: int) -> np.ndarray:
        """Read-only view of the Q-values of state ``s``."""
        row = self._rows.get(s)
        if row is None:
            return np.zeros(self.n_actions)
        v = row.view()
        v.flags.writeable = False
        return v

    def written(self, s: int) -> np.ndarray:
        """Mask of the actions of state ``s`` that hold a stored value."""
        w = self._written.get(s)
        return np.zeros(self.n_actions, dtype=bool) if w is None else w.copy()

    def entries(self) -> dict[tuple[int, int], float]:
        return {(s, int(a)): float(self._rows[s][a])
                for s, w in self._written.items() for a in np.flatnonzero(w)}

    def states(self):
        return self._rows.keys()

    def to_records(self) -> np.ndarray:
        ent = sorted(self.entries().items())
        rec = np.empty(len(ent), dtype=RECORD)
        if ent:
            keys, vals = zip(*ent)
            rec["state"], rec["action"] = zip(*keys)
            rec["q"] = vals
        return rec

    @classmethod
    def from_records(cls, rec: np.ndarray) -> "QTable":
        q = cls()
        for s, a, v in zip(rec["state"].tolist(), rec["action"].tolist(), rec["q"].tolist()):
            q.set(s, a, v)
        return q


def save_qtable(q: QTable, path) -> None:
    rec = q.to_records()
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(rec)))
        fh.write(rec.tobytes())
    os.replace(tmp, path)


def load_qtable(path) -> QTable:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise QTableFormatError(f"{path}: truncated header")
    magic, version, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise QTableFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise QTableFormatError(f"{path}: format version {version}, expected {VERSION}")
    body = data[_HEADER.size:]
    if len(body) != count * RECORD.itemsize:
        raise QTableFormatError(f"{path}: expected {count} records, found {len(body)} bytes")
    rec = np.frombuffer(body, dtype=RECORD)
    if count and (rec["state"].max() >= N_STATES or rec["action"].max() >= N_ACTIONS):
        raise QTableFormatError(f"{path}: record index out of range")
    return QTable.from_records(rec)
