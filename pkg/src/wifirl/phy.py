"""802.11ac VHT physical layer: rate table, propagation, SINR and error model.

All functions here are pure; randomness (fading draws) is passed in by the
caller so the simulator keeps control of its RNG streams.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_HZ = -174.0
MIN_DISTANCE_M = 0.1

# 160 MHz, 1 spatial stream, 800 ns GI: 468 data subcarriers, 4 us symbols
DATA_SUBCARRIERS = 468
SYMBOL_US = 4.0

_MODULATIONS = [
    # (label, bits per subcarrier, coding rate)
    ("BPSK", 1, 1 / 2),
    ("QPSK", 2, 1 / 2),
    ("QPSK", 2, 3 / 4),
    ("16-QAM", 4, 1 / 2),
    ("16-QAM", 4, 3 / 4),
    ("64-QAM", 6, 2 / 3),
    ("64-QAM", 6, 3 / 4),
    ("64-QAM", 6, 5 / 6),
    ("256-QAM", 8, 3 / 4),
    ("256-QAM", 8, 5 / 6),
]

DEFAULT_MIN_SINR_DB = (5.0, 8.0, 11.0, 14.0, 18.0, 22.0, 24.0, 26.0, 30.0, 32.0)

# Reference MPDU for centering the error curve: 1472 B payload + 40 B overhead.
REFERENCE_MPDU_BITS = (1472 + 40) * 8


@dataclass(frozen=True)
class McsEntry:
    index: int
    modulation: str
    coding_rate: float
    phy_rate: float  # Mbps
    min_sinr: float  # dB


def vht_phy_rate(bits_per_subcarrier: int, coding_rate: float) -> float:
    """Data rate in Mbps for one stream at 160 MHz with a long guard interval."""
    return DATA_SUBCARRIERS * bits_per_subcarrier * coding_rate / SYMBOL_US


def build_mcs_table(min_sinr=DEFAULT_MIN_SINR_DB) -> tuple[McsEntry, ...]:
    if len(min_sinr) != len(_MODULATIONS):
        raise ValueError(f"need {len(_MODULATIONS)} SINR thresholds, got {len(min_sinr)}")
    if any(b <= a for a, b in zip(min_sinr, min_sinr[1:])):
        raise ValueError("SINR thresholds must be strictly increasing")
    return tuple(
        McsEntry(i, label, rate, round(vht_phy_rate(bps, rate), 6), float(thr))
        for i, ((label, bps, rate), thr) in enumerate(zip(_MODULATIONS, min_sinr))
    )


MCS_TABLE = build_mcs_table()
N_MCS = len(MCS_TABLE)


@dataclass(frozen=True)
class ChannelParams:
    frequency: float = 5.2e9
    bandwidth: float = 160e6
    nakagami_m: float = 1.5
    noise_figure: float = 7.0
    cca_threshold: float = -82.0
    fading: bool = True
    per_width_db: float = 1.5
    min_sinr: tuple = field(default=DEFAULT_MIN_SINR_DB)

    @property
    def noise_floor_dbm(self) -> float:
        return noise_floor_dbm(self.bandwidth, self.noise_figure)


def noise_floor_dbm(bandwidth: float, noise_figure: float) -> float:
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth) + noise_figure


def dbm_to_mw(dbm):
    return np.power(10.0, np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(mw)


def friis_loss_db(d: float, frequency: float = 5.2e9) -> float:
    d = max(d, MIN_DISTANCE_M)
    return 20.0 * math.log10(4.0 * math.pi * d * frequency / SPEED_OF_LIGHT)


def rx_power_dbm(tx_power: float, d: float, frequency: float = 5.2e9,
                 fading_draw: float | None = None) -> float:
    """Received power under free-space loss, optionally scaled by a fading power factor.

    ``fading_draw`` is a linear power multiplier (unit mean), e.g. from
    :func:`nakagami_power`.
    """
    p = tx_power - friis_loss_db(d, frequency)
    if fading_draw is not None:
        p += 10.0 * math.log10(max(fading_draw, 1e-30))
    return p


def nakagami_power(rng: np.random.Generator, m: float, size=None):
    # Nakagami-m amplitude => Gamma(m, 1/m) power with unit mean
    return rng.gamma(shape=m, scale=1.0 / m, size=size)


def sinr_db(signal: float, interferers, noise_floor: float) -> float:
    denom = float(dbm_to_mw(noise_floor)) + float(np.sum(dbm_to_mw(list(interferers))))
    return float(mw_to_dbm(float(dbm_to_mw(signal)) / denom))


def _ber(sinr, threshold, width):
    # logistic in dB, shifted so a reference MPDU sees PER = 0.5 at the threshold
    offset = math.log(REFERENCE_MPDU_BITS / math.log(2.0))
    z = (np.asarray(sinr, dtype=float) - threshold) / width + offset
    return 0.5 * (1.0 - np.tanh(z / 2.0))  # == 1 / (1 + exp(z)), overflow-safe


def per(sinr, mcs: int, frame_bits: int, width: float = 1.5, table=MCS_TABLE):
    """Packet error rate of a ``frame_bits`` long unit sent at ``mcs``.

    Accepts scalar or array ``sinr``; returns the same shape.
    """
    if not 0 <= mcs < len(table):
        raise ValueError(f"mcs out of range: {mcs}")
    if frame_bits <= 0:
        raise ValueError("frame_bits must be positive")
    ber = _ber(sinr, table[mcs].min_sinr, width)
    # 1 - (1 - ber)^bits, computed stably
    out = -np.expm1(frame_bits * np.log1p(-np.minimum(ber, 1.0 - 1e-16)))
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FrameSpec:
    mcs: int
    tx_power: float
    n_aggregated: int = 1
    mpdu_payload: int = 1472

    def __post_init__(self):
        if not 1 <= self.n_aggregated <= 64:
            raise ValueError(f"n_aggregated must be in [1, 64], got {self.n_aggregated}")
        if not 0 <= self.mcs < N_MCS:
            raise ValueError(f"mcs out of range: {self.mcs}")


MPDU_OVERHEAD_BYTES = 40
PREAMBLE_US = 44


def mpdu_bits(payload: int = 1472) -> int:
    return (payload + MPDU_OVERHEAD_BYTES) * 8


def airtime_us(frame: FrameSpec, preamble_us: int = PREAMBLE_US, table=MCS_TABLE) -> int:
    bits = frame.n_aggregated * mpdu_bits(frame.mpdu_payload)
    half_mbps = round(2 * table[frame.mcs].phy_rate)  # all VHT rates are multiples of 0.5
    return preamble_us + -(-2 * bits // half_mbps)
