"""Per-user rate requirements and the minimum total transmit power."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .system_model import ChannelState, InvalidInputError, SystemParams, _frozen

__all__ = ["QosProfile", "MinPowerResult", "qos_profile", "min_power", "is_feasible",
           "FEASIBILITY_RTOL"]

FEASIBILITY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class QosProfile:
    """Minimum rates ``r_min`` (bits/s/Hz) with ``A = 2^r - 1`` and ``D = A / 2^r``."""

    r_min: np.ndarray
    a_const: np.ndarray
    d_const: np.ndarray

    @property
    def num_users(self) -> int:
        return int(self.r_min.size)


def qos_profile(r_min: Sequence[float] | float, num_users: int | None = None) -> QosProfile:
    """Build a :class:`QosProfile`; a scalar rate is broadcast to ``num_users``."""
    r = np.atleast_1d(np.asarray(r_min, dtype=float))
    if num_users is not None and r.size == 1:
        r = np.full(num_users, float(r[0]))
    if r.ndim != 1 or r.size == 0:
        raise InvalidInputError("r_min must be a non-empty list")
    if not np.all(np.isfinite(r)) or np.any(r < 0.0):
        raise InvalidInputError(f"minimum rates must be finite and >= 0, got {r.tolist()}")
    a = np.power(2.0, r) - 1.0
    d = a / (a + 1.0)
    return QosProfile(_frozen(r), _frozen(a), _frozen(d))


@dataclass(frozen=True, eq=False)
class MinPowerResult:
    per_user_w: np.ndarray
    total_w: float
    theta_min: float


def _check_sizes(channel: ChannelState, qos: QosProfile):
    if channel.num_users != qos.num_users:
        raise InvalidInputError(
            f"channel has {channel.num_users} users but QoS profile has {qos.num_users}")


def min_power(channel: ChannelState, params: SystemParams, qos: QosProfile) -> MinPowerResult:
    """Smallest per-user powers meeting every rate requirement.

    Every SIC rate constraint is tight at the optimum, so the powers follow from
    back-substitution starting at the strongest user:
    ``P_k = A_k (sum_{i>k} P_i + sigma^2 / |h_k|^2)``.
    """
    _check_sizes(channel, qos)
    noise = params.noise_power_w
    gains = channel.gains.tolist()
    a = qos.a_const.tolist()
    per_user = [0.0] * len(gains)
    above = 0.0  # power of users decoded after k (treated as interference by k)
    for k in range(len(gains) - 1, -1, -1):
        per_user[k] = a[k] * (above + noise / gains[k])
        above += per_user[k]
    total = math.fsum(per_user)
    return MinPowerResult(_frozen(per_user), total, total / params.total_power_w)


def is_feasible(params: SystemParams, min_power: MinPowerResult) -> bool:
    return min_power.total_w <= params.total_power_w * (1.0 + FEASIBILITY_RTOL)
