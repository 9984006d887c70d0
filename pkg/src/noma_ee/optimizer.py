"""Energy-efficiency maximisation over the transmit-power ratio ``theta``.

EE(theta) has a strictly concave numerator and an affine denominator, so it is
strictly pseudo-concave and its derivative changes sign at most once on
``[theta_min, 1]``. :func:`maximize_ee` bisects on that sign;
:func:`dinkelbach_maximize` is an independent parametric solver used for
cross-checking.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .allocation import Allocation, _Problem, make_allocation
from .qos import FEASIBILITY_RTOL, QosProfile
from .system_model import ChannelState, SystemParams

__all__ = [
    "InfeasibleProblemError",
    "ConvergenceError",
    "PseudoConcavityError",
    "Boundary",
    "OptimizerConfig",
    "Optimum",
    "maximize_ee",
    "max_se_allocation",
    "dinkelbach_maximize",
]


class InfeasibleProblemError(ValueError):
    """The budget cannot meet every minimum rate."""

    def __init__(self, p_min_w: float, total_power_w: float):
        super().__init__(
            f"infeasible: minimum required power {p_min_w!r} W exceeds budget {total_power_w!r} W")
        self.p_min_w = p_min_w
        self.total_power_w = total_power_w


class ConvergenceError(RuntimeError):
    pass


class PseudoConcavityError(RuntimeError):
    """The EE derivative failed to bracket a single root. Should never happen."""


class Boundary(str, enum.Enum):
    INTERIOR = "interior-root"
    CLAMPED_LOW = "clamped-low"
    CLAMPED_HIGH = "clamped-high"


@dataclass(frozen=True)
class OptimizerConfig:
    theta_tolerance: float = 1e-10
    max_iterations: int = 200
    dinkelbach_tolerance: float = 1e-10

    def __post_init__(self):
        if not self.theta_tolerance > 0 or not self.dinkelbach_tolerance > 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class Optimum:
    theta_star: float
    allocation: Allocation
    boundary: Boundary
    iterations: int

    def to_dict(self) -> dict:
        return {
            "theta_star": self.theta_star,
            "boundary": self.boundary.value,
            "iterations": self.iterations,
            "allocation": self.allocation.to_dict(),
        }


def _feasible_problem(channel, params, qos) -> _Problem:
    prob = _Problem(channel, params, qos)
    if prob.theta_min > 1.0 + FEASIBILITY_RTOL:
        raise InfeasibleProblemError(prob.theta_min * prob.power, prob.power)
    return prob


def _bisect_sign(f, lo: float, hi: float, tol: float, max_iter: int) -> tuple[float, int]:
    """Locate the + to - sign change of a decreasing-sign function on [lo, hi]."""
    it = 0
    while hi - lo > tol:
        if it >= max_iter:
            raise ConvergenceError(f"bisection did not reach width {tol} in {max_iter} steps")
        mid = 0.5 * (lo + hi)
        value = f(mid)
        if math.isnan(value):
            raise PseudoConcavityError(f"derivative is NaN at theta={mid!r}")
        if value > 0.0:
            lo = mid
        else:
            hi = mid
        it += 1
    return 0.5 * (lo + hi), it


def _result(prob: _Problem, theta: float, boundary: Boundary, iterations: int,
            channel, params) -> Optimum:
    return Optimum(theta, make_allocation(prob.coeffs(theta), channel, params),
                   boundary, iterations)


def maximize_ee(channel: ChannelState, params: SystemParams, qos: QosProfile,
                config: OptimizerConfig | None = None) -> Optimum:
    """Find the EE-maximising ``theta`` in ``[theta_min, 1]``.

    A non-positive derivative at ``theta_min`` clamps the solution there and a
    non-negative derivative at 1 clamps it to full power; otherwise the unique
    root of the derivative is bisected to ``config.theta_tolerance``.

    Raises
    ------
    InfeasibleProblemError
        If ``P_Min > P``.
    """
    config = config or OptimizerConfig()
    prob = _feasible_problem(channel, params, qos)
    lo = min(prob.theta_min, 1.0)
    d_lo = prob.ee_derivative(lo)
    if d_lo <= 0.0 or lo >= 1.0:
        boundary = Boundary.CLAMPED_LOW if d_lo <= 0.0 else Boundary.CLAMPED_HIGH
        return _result(prob, lo, boundary, 0, channel, params)
    d_hi = prob.ee_derivative(1.0)
    if d_hi >= 0.0:
        return _result(prob, 1.0, Boundary.CLAMPED_HIGH, 0, channel, params)
    if not (d_lo > 0.0 > d_hi):
        raise PseudoConcavityError(
            f"derivative signs do not bracket a root: d({lo!r})={d_lo!r}, d(1)={d_hi!r}")
    theta, it = _bisect_sign(prob.ee_derivative, lo, 1.0,
                             config.theta_tolerance, config.max_iterations)
    return _result(prob, theta, Boundary.INTERIOR, it, channel, params)


def max_se_allocation(channel: ChannelState, params: SystemParams,
                      qos: QosProfile) -> Allocation:
    """Full-power (``theta = 1``) sum-rate-optimal allocation."""
    prob = _feasible_problem(channel, params, qos)
    return make_allocation(prob.coeffs(1.0), channel, params)


def dinkelbach_maximize(channel: ChannelState, params: SystemParams, qos: QosProfile,
                        config: OptimizerConfig | None = None) -> Optimum:
    """Dinkelbach iteration on ``max R(theta) - lam * (theta P + P_c)``.

    Each inner problem is concave in ``theta``; it is solved by bisection on
    ``R'(theta) - lam P``. Iteration stops once the parametric optimum falls
    to ``config.dinkelbach_tolerance``.
    """
    config = config or OptimizerConfig()
    prob = _feasible_problem(channel, params, qos)
    lo = min(prob.theta_min, 1.0)
    p, pc = prob.power, prob.circuit

    def rate(theta):
        return prob.sum_rate(prob.coeffs(theta))

    def marginal(theta, lam):
        return prob.rate_derivative(theta, prob.coeffs(theta)[-1]) - lam * p

    lam = rate(lo) / (lo * p + pc)
    for it in range(1, config.max_iterations + 1):
        if lo >= 1.0 or marginal(lo, lam) <= 0.0:
            theta = lo
        elif marginal(1.0, lam) >= 0.0:
            theta = 1.0
        else:
            theta, _ = _bisect_sign(lambda t: marginal(t, lam), lo, 1.0,
                                    config.theta_tolerance, config.max_iterations)
        r = rate(theta)
        gap = r - lam * (theta * p + pc)
        lam = r / (theta * p + pc)
        if gap <= config.dinkelbach_tolerance:
            if theta == lo:
                boundary = Boundary.CLAMPED_LOW
            elif theta == 1.0:
                boundary = Boundary.CLAMPED_HIGH
            else:
                boundary = Boundary.INTERIOR
            return _result(prob, theta, boundary, it, channel, params)
    raise ConvergenceError(f"Dinkelbach did not converge in {config.max_iterations} iterations")
