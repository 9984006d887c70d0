"""TDMA baseline: equal time slots, one fixed transmit power, grid-searched EE.

Each of the K users owns a 1/K share of the frame and is served alone at the
common power ``p``, so its time-averaged rate is ``log2(1 + p|h_k|^2/s2) / K``
and the average transmit power is ``p``.

``qos_mode`` selects where the minimum rate is enforced:

* ``"time-averaged"`` (default): the 1/K-scaled rate must reach ``r_min``.
* ``"per-slot"``: the rate while the user's slot is active must reach ``r_min``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qos import FEASIBILITY_RTOL, QosProfile, _check_sizes
from .system_model import ChannelState, SystemParams, _frozen

__all__ = ["TdmaConfig", "TdmaResult", "tdma_rates", "tdma_min_power", "tdma_max_ee",
           "power_grid"]

QOS_MODES = ("time-averaged", "per-slot")
# Lower end of the dB grid when no power is required: 30 dB below the noise
# floor of the strongest user.
_FLOOR_SNR = 1e-3


@dataclass(frozen=True)
class TdmaConfig:
    grid_points: int = 2001
    power_grid_scale: str = "decibel"
    qos_mode: str = "time-averaged"

    def __post_init__(self):
        if self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.power_grid_scale not in ("linear", "decibel"):
            raise ValueError(f"unknown power_grid_scale {self.power_grid_scale!r}")
        if self.qos_mode not in QOS_MODES:
            raise ValueError(f"unknown qos_mode {self.qos_mode!r}")


@dataclass(frozen=True, eq=False)
class TdmaResult:
    power_w: float
    rates: np.ndarray
    sum_rate: float
    ee: float
    feasible: bool

    def to_dict(self) -> dict:
        return {"power_w": self.power_w, "rates": self.rates.tolist(),
                "sum_rate": self.sum_rate, "ee": self.ee, "feasible": self.feasible}


def tdma_rates(power_w: float, channel: ChannelState, params: SystemParams) -> np.ndarray:
    snr = power_w * channel.gains / params.noise_power_w
    return _frozen(np.log1p(snr) / math.log(2.0) / channel.num_users)


def tdma_min_power(channel: ChannelState, params: SystemParams, qos: QosProfile,
                   qos_mode: str = "time-averaged") -> float:
    """Smallest common slot power meeting every user's minimum rate."""
    _check_sizes(channel, qos)
    if qos_mode == "time-averaged":
        need = np.expm1(channel.num_users * qos.r_min * math.log(2.0))
    elif qos_mode == "per-slot":
        need = qos.a_const
    else:
        raise ValueError(f"unknown qos_mode {qos_mode!r}")
    return float(np.max(need * params.noise_power_w / channel.gains))


def power_grid(p_low: float, p_high: float, config: TdmaConfig) -> np.ndarray:
    """Ascending search grid with both endpoints included exactly."""
    n = config.grid_points
    if config.power_grid_scale == "linear":
        grid = np.linspace(p_low, p_high, n)
    else:
        grid = np.logspace(math.log10(p_low), math.log10(p_high), n)
    grid[0], grid[-1] = p_low, p_high
    return grid


def tdma_max_ee(channel: ChannelState, params: SystemParams, qos: QosProfile,
                config: TdmaConfig | None = None) -> TdmaResult:
    """Exhaustive search of the TDMA EE over the feasible power range.

    Infeasible budgets (required power above ``P``) return ``ee = 0``. Ties
    in the grid argmax go to the lowest power.
    """
    config = config or TdmaConfig()
    budget = params.total_power_w
    p_req = tdma_min_power(channel, params, qos, config.qos_mode)
    k = channel.num_users
    if p_req > budget * (1.0 + FEASIBILITY_RTOL):
        return TdmaResult(0.0, _frozen(np.zeros(k)), 0.0, 0.0, False)
    p_req = min(p_req, budget)

    p_low = p_req
    if p_low <= 0.0 and config.power_grid_scale == "decibel":
        p_low = min(budget, _FLOOR_SNR * params.noise_power_w / float(channel.gains[-1]))
    grid = power_grid(p_low, budget, config)
    if p_req <= 0.0 and config.power_grid_scale == "decibel":
        grid = np.concatenate(([0.0], grid))

    snr = np.outer(grid, channel.gains) / params.noise_power_w
    sum_rates = np.log1p(snr).sum(axis=1) / math.log(2.0) / k
    ee = sum_rates / (grid + params.circuit_power_w)
    best = int(np.argmax(ee))
    p = float(grid[best])
    r = tdma_rates(p, channel, params)
    total = math.fsum(r.tolist())
    return TdmaResult(p, r, total, total / (p + params.circuit_power_w), True)
