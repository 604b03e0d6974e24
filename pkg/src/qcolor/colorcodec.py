"""Channel values <-> qubit rotation angles and |0>-probabilities.

A channel value ``i`` out of ``max`` is written into a qubit as
``RY(theta)|0>`` with ``theta = arccos(2 i / max - 1)``, which makes
``P(|0>) = cos^2(theta / 2) = i / max``. Decoding multiplies the measured
|0>-probability back by ``max`` and rounds.
"""

from __future__ import annotations

import colorsys
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .qstate import Circuit, ProbEstimate, marginal_prob0_dense, ry

CHANNEL_MAX = 255
PROB_SLACK = 1e-9
# Half-way products (e.g. 0.5 * 255) must round up even when float noise
# lands them a few ulps low.
_ROUND_EPS = 1e-9


@dataclass(frozen=True)
class RgbColor:
    r: int
    g: int
    b: int

    def __post_init__(self):
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= v <= CHANNEL_MAX:
                raise ValueError(f"channel {name}={v!r} outside 0..{CHANNEL_MAX}")
            object.__setattr__(self, name, int(v))

    def __iter__(self):
        return iter((self.r, self.g, self.b))

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class HsvColor:
    """Hue in degrees [0, 360), saturation and value in [0, 1]."""

    h: float
    s: float
    v: float

    def __post_init__(self):
        if not 0.0 <= self.h < 360.0:
            raise ValueError(f"hue {self.h!r} outside [0, 360)")
        for name in ("s", "v"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name}={getattr(self, name)!r} outside [0, 1]")

    def __iter__(self):
        return iter((self.h, self.s, self.v))


@dataclass(frozen=True)
class ChannelEncoding:
    value: int
    max: int
    theta: float

    @classmethod
    def from_value(cls, value: int, max: int = CHANNEL_MAX) -> ChannelEncoding:
        return cls(value, max, theta_from_channel(value, max))

    @property
    def prob0(self) -> float:
        return math.cos(self.theta / 2) ** 2


def theta_from_fraction(f: float) -> float:
    """Rotation angle whose |0>-probability is ``f``."""
    return math.acos(min(1.0, max(-1.0, 2.0 * f - 1.0)))


def theta_from_channel(value: int, max: int = CHANNEL_MAX) -> float:
    if max < 1:
        raise ValueError(f"channel max must be >= 1, got {max}")
    if not 0 <= value <= max:
        raise ValueError(f"channel value {value} outside 0..{max}")
    return math.acos(2.0 * value / max - 1.0)


def round_half_up(x):
    """Round to nearest integer, ties upward. Works on scalars and arrays."""
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5 + _ROUND_EPS).astype(np.int64)


def channel_from_prob0(prob0: float, max: int = CHANNEL_MAX) -> int:
    if not -PROB_SLACK <= prob0 <= 1.0 + PROB_SLACK:
        raise ValueError(f"probability {prob0!r} outside [0, 1]")
    return int(np.clip(round_half_up(prob0 * max), 0, max))


def channels_from_prob0(prob0: np.ndarray, max: int = CHANNEL_MAX) -> np.ndarray:
    """Vectorized :func:`channel_from_prob0` without the range check."""
    return np.clip(round_half_up(np.asarray(prob0) * max), 0, max)


def encode_channels_circuit(fractions: Sequence[float], n_qubits: int | None = None, offset: int = 0) -> Circuit:
    """One RY per fraction on consecutive qubits starting at ``offset``."""
    n = len(fractions) + offset if n_qubits is None else n_qubits
    return Circuit(n, tuple(ry(theta_from_fraction(f), offset + k) for k, f in enumerate(fractions)))


def encode_rgb_circuit(color: RgbColor, n_qubits: int = 3, offset: int = 0) -> Circuit:
    """``[RY(theta_R) q0, RY(theta_G) q1, RY(theta_B) q2]``, optionally shifted into a wider register."""
    return Circuit(n_qubits, tuple(ry(theta_from_channel(v), offset + k) for k, v in enumerate(color)))


def encode_hsv_circuit(color: HsvColor, n_qubits: int = 3, offset: int = 0) -> Circuit:
    return encode_channels_circuit((color.h / 360.0, color.s, color.v), n_qubits, offset)


def decode_channels(est: ProbEstimate, qubits: Sequence[int], max: int = CHANNEL_MAX) -> tuple[int, ...]:
    """Channel values read from the |0>-marginals of ``qubits``."""
    return tuple(
        channel_from_prob0(float(marginal_prob0_dense(est.probs, q, est.n_qubits)), max) for q in qubits
    )


def decode_rgb(est: ProbEstimate) -> RgbColor:
    # R = P|000> + P|001> + P|010> + P|011>, and likewise for G and B.
    if est.n_qubits != 3:
        raise ShapeError(f"RGB decode needs an 8-state estimate, got {1 << est.n_qubits}")
    return RgbColor(*decode_channels(est, (0, 1, 2)))


def rgb_to_hsv(color: RgbColor) -> HsvColor:
    h, s, v = colorsys.rgb_to_hsv(color.r / 255.0, color.g / 255.0, color.b / 255.0)
    return HsvColor((h * 360.0) % 360.0, s, v)


def hsv_to_rgb(color: HsvColor) -> RgbColor:
    rgb = colorsys.hsv_to_rgb(color.h / 360.0, color.s, color.v)
    return RgbColor(*(int(c) for c in channels_from_prob0(np.array(rgb))))
