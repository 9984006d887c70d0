"""Closed-form power split for a fixed transmit-power ratio ``theta``.

For ``theta`` in ``[theta_min, 1]`` the sum-rate-optimal split keeps every
user but the strongest exactly at its minimum rate and hands whatever is
left to the strongest user. All coefficients are affine in ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qos import FEASIBILITY_RTOL, QosProfile, _check_sizes, min_power
from .system_model import ChannelState, SystemParams, _frozen

__all__ = [
    "InfeasibleThetaError",
    "Allocation",
    "AllocationSlopes",
    "optimal_coeffs",
    "slopes",
    "rates",
    "sum_rate",
    "sum_rate_telescoped",
    "ee_of_theta",
    "ee_derivative",
    "make_allocation",
]

LN2 = math.log(2.0)


class InfeasibleThetaError(ValueError):
    """``theta`` is below ``theta_min``: the strongest user would miss its rate."""

    def __init__(self, theta: float, theta_min: float):
        super().__init__(f"theta={theta!r} is below theta_min={theta_min!r}")
        self.theta = theta
        self.theta_min = theta_min


@dataclass(frozen=True, eq=False)
class Allocation:
    coeffs: np.ndarray
    theta: float
    rates: np.ndarray
    sum_rate: float
    transmit_power_w: float
    ee: float  # bits/Joule/Hz

    def to_dict(self) -> dict:
        return {
            "coeffs": self.coeffs.tolist(),
            "theta": self.theta,
            "rates": self.rates.tolist(),
            "sum_rate": self.sum_rate,
            "transmit_power_w": self.transmit_power_w,
            "ee": self.ee,
        }


@dataclass(frozen=True, eq=False)
class AllocationSlopes:
    slopes: np.ndarray  # d a_k^* / d theta


class _Problem:
    """Scalar constants of one (channel, params, qos) instance.

    Built once and reused by the optimizers, which evaluate the allocation and
    the EE derivative many times per instance.
    """

    __slots__ = ("c", "noise", "d", "theta_min", "slopes", "power", "circuit", "k")

    def __init__(self, channel: ChannelState, params: SystemParams, qos: QosProfile):
        _check_sizes(channel, qos)
        self.power = params.total_power_w
        self.circuit = params.circuit_power_w
        self.noise = params.noise_power_w
        self.c = (self.power * channel.gains).tolist()
        self.d = qos.d_const.tolist()
        self.k = len(self.c)
        self.theta_min = min_power(channel, params, qos).total_w / self.power
        self.slopes = _slope_recursion(self.d)

    def check_theta(self, theta: float):
        if not theta >= self.theta_min * (1.0 - FEASIBILITY_RTOL):
            raise InfeasibleThetaError(theta, self.theta_min)

    def coeffs(self, theta: float) -> list[float]:
        self.check_theta(theta)
        out = [0.0] * self.k
        used = 0.0
        for k in range(self.k - 1):
            out[k] = self.d[k] * (theta - used) + self.d[k] * self.noise / self.c[k]
            used += out[k]
        # Round-off at theta == theta_min can leave a tiny negative remainder.
        out[-1] = max(theta - used, 0.0)
        return out

    def sum_rate(self, coeffs: list[float]) -> float:
        total = 0.0
        interference = 0.0
        for k in range(self.k - 1, -1, -1):
            total += math.log1p(self.c[k] * coeffs[k] / (self.c[k] * interference + self.noise))
            interference += coeffs[k]
        return total / LN2

    def ee(self, theta: float) -> float:
        return self.sum_rate(self.coeffs(theta)) / (theta * self.power + self.circuit)

    def rate_derivative(self, theta: float, a_strongest: float) -> float:
        """d(sum rate)/d(theta): only the strongest user's rate moves with theta."""
        ck = self.c[-1]
        return ck * self.slopes[-1] / (LN2 * (self.noise + ck * a_strongest))

    def ee_derivative(self, theta: float) -> float:
        a = self.coeffs(theta)
        denom = theta * self.power + self.circuit
        num = self.rate_derivative(theta, a[-1]) * denom - self.sum_rate(a) * self.power
        return num / (denom * denom)


def _slope_recursion(d: Sequence[float]) -> list[float]:
    out = [0.0] * len(d)
    acc = 0.0
    for k in range(len(d) - 1):
        out[k] = d[k] * (1.0 - acc)
        acc += out[k]
    out[-1] = 1.0 - acc
    return out


def optimal_coeffs(theta: float, channel: ChannelState, params: SystemParams,
                   qos: QosProfile) -> np.ndarray:
    """Optimal coefficients ``a_k^*(theta)``, fractions of the budget ``P``.

    Raises
    ------
    InfeasibleThetaError
        If ``theta`` is below ``P_Min / P``.
    """
    return _frozen(_Problem(channel, params, qos).coeffs(theta))


def slopes(channel: ChannelState, params: SystemParams, qos: QosProfile) -> AllocationSlopes:
    """Constant derivatives ``d a_k^*/d theta``; they are positive and sum to one."""
    _check_sizes(channel, qos)
    return AllocationSlopes(_frozen(_slope_recursion(qos.d_const.tolist())))


def rates(coeffs: Sequence[float], channel: ChannelState, params: SystemParams) -> np.ndarray:
    """Achievable SIC rates: user k sees the signals of users k+1..K as noise."""
    a = np.asarray(coeffs, dtype=float)
    c = params.total_power_w * channel.gains
    # interference[k] = sum of a_i for i > k
    interference = np.concatenate((np.cumsum(a[::-1])[::-1][1:], [0.0]))
    return _frozen(np.log1p(c * a / (c * interference + params.noise_power_w)) / LN2)


def sum_rate(coeffs: Sequence[float], channel: ChannelState, params: SystemParams) -> float:
    return math.fsum(rates(coeffs, channel, params).tolist())


def sum_rate_telescoped(coeffs: Sequence[float], channel: ChannelState,
                        params: SystemParams) -> float:
    """Sum rate written as a first term in ``theta`` plus the gap terms ``F_k``.

    ``R = log2(C_1 theta + s2) - log2(s2) + sum_k F_k(x_k)`` where ``x_k`` is the
    power fraction of users above k and
    ``F_k(x) = log2(C_{k+1} x + s2) - log2(C_k x + s2)``.
    """
    a = np.asarray(coeffs, dtype=float).tolist()
    c = (params.total_power_w * channel.gains).tolist()
    s2 = params.noise_power_w
    theta = math.fsum(a)
    terms = [math.log2(c[0] * theta + s2), -math.log2(s2)]
    x = theta
    for k in range(len(a) - 1):
        x -= a[k]
        terms.append(math.log2(c[k + 1] * x + s2) - math.log2(c[k] * x + s2))
    return math.fsum(terms)


def make_allocation(coeffs: Sequence[float], channel: ChannelState,
                    params: SystemParams) -> Allocation:
    a = _frozen(coeffs)
    r = rates(a, channel, params)
    theta = math.fsum(a.tolist())
    total_rate = math.fsum(r.tolist())
    pt = theta * params.total_power_w
    return Allocation(a, theta, r, total_rate, pt, total_rate / (pt + params.circuit_power_w))


def ee_of_theta(theta: float, channel: ChannelState, params: SystemParams,
                qos: QosProfile) -> float:
    """Energy efficiency of the optimal split at transmit power ``theta * P``."""
    return _Problem(channel, params, qos).ee(theta)


def ee_derivative(theta: float, channel: ChannelState, params: SystemParams,
                  qos: QosProfile) -> float:
    """Analytic ``dEE/dtheta`` along the optimal-split curve."""
    return _Problem(channel, params, qos).ee_derivative(theta)
