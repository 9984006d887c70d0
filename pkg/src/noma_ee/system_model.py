"""Physical-layer data model: unit conversion, channel draws and ordering.

Users are stored 0-based in ascending order of channel power gain, so index
``k`` here is user ``k + 1`` in the usual 1-based NOMA notation and the last
entry is the strongest user (decoded last under SIC).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "InvalidInputError",
    "SystemParams",
    "ChannelState",
    "DerivedConstants",
    "dbm_to_watts",
    "watts_to_dbm",
    "make_rng",
    "generate_channel",
    "derived_constants",
]


class InvalidInputError(ValueError):
    """Raised when a model object is built from out-of-domain values."""


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0) / 1000.0


def watts_to_dbm(x_w: float) -> float:
    if x_w <= 0.0:
        return -math.inf
    return 10.0 * math.log10(x_w * 1000.0)


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Budget, noise and circuit power (linear watts) plus path-loss exponent."""

    total_power_w: float
    noise_power_w: float
    circuit_power_w: float
    pathloss_exponent: float = 3.0

    def __post_init__(self):
        for name in ("total_power_w", "noise_power_w", "circuit_power_w",
                     "pathloss_exponent"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise InvalidInputError(f"{name} must be positive and finite, got {value!r}")

    @classmethod
    def from_dbm(cls, power_dbm: float, noise_dbm: float = -70.0,
                 circuit_dbm: float = 30.0, pathloss_exponent: float = 3.0) -> "SystemParams":
        return cls(dbm_to_watts(power_dbm), dbm_to_watts(noise_dbm),
                   dbm_to_watts(circuit_dbm), pathloss_exponent)

    def with_total_power(self, total_power_w: float) -> "SystemParams":
        return SystemParams(total_power_w, self.noise_power_w,
                            self.circuit_power_w, self.pathloss_exponent)


@dataclass(frozen=True, eq=False)
class ChannelState:
    """Sorted channel power gains ``|h_k|^2`` with the draws that produced them.

    ``distances_m`` and ``fading`` are permuted jointly with ``gains`` so that
    ``gains[k] == abs(fading[k])**2 * distances_m[k]**-alpha`` holds after
    sorting. Channels built directly from gains carry NaN placeholders there.
    """

    gains: np.ndarray
    distances_m: np.ndarray
    fading: np.ndarray

    def __post_init__(self):
        gains = self.gains
        if gains.ndim != 1 or gains.size == 0:
            raise InvalidInputError("a channel needs at least one user")
        if not np.all(np.isfinite(gains)) or np.any(gains <= 0.0):
            raise InvalidInputError("channel gains must be positive and finite")
        if np.any(np.diff(gains) < 0.0):
            raise InvalidInputError("channel gains must be sorted ascending")
        if self.distances_m.shape != gains.shape or self.fading.shape != gains.shape:
            raise InvalidInputError("gains, distances and fading must have equal length")

    @property
    def num_users(self) -> int:
        return int(self.gains.size)

    @classmethod
    def from_gains(cls, gains: Sequence[float]) -> "ChannelState":
        """Build a channel from explicit gains, sorting them ascending."""
        g = np.sort(np.asarray(gains, dtype=float), kind="stable")
        if g.size == 0:
            raise InvalidInputError("a channel needs at least one user")
        return cls(_frozen(g), _frozen(np.full(g.size, np.nan)),
                   _frozen(np.full(g.size, np.nan + 0j), dtype=complex))


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """PCG64 generator keyed by ``(seed, *spawn_key)``.

    The key goes through :class:`numpy.random.SeedSequence`, so the stream for
    trial ``i`` of master seed ``s`` is ``make_rng(s, i)`` regardless of how
    many other trials ran before it or in which process.
    """
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in spawn_key))))


def draw_fading(rng: np.random.Generator, num_users: int) -> np.ndarray:
    """CN(0, 1) draws: independent real/imaginary parts with variance 1/2."""
    scale = math.sqrt(0.5)
    re = rng.normal(0.0, scale, num_users)
    im = rng.normal(0.0, scale, num_users)
    return re + 1j * im


def generate_channel(distances_m: Sequence[float], pathloss_exponent: float,
                     rng_seed: int | np.random.Generator,
                     fading: Sequence[complex] | None = None) -> ChannelState:
    """Draw a Rayleigh-faded channel ``h_k = g_k d_k^(-alpha/2)`` and sort it.

    Parameters
    ----------
    distances_m : sequence of float
        Base-station-to-user distances, one per user, in metres.
    pathloss_exponent : float
        Path-loss exponent ``alpha``.
    rng_seed : int or numpy.random.Generator
        Seed (fed to :func:`make_rng`) or an existing generator.
    fading : sequence of complex, optional
        Use these small-scale coefficients instead of drawing them.

    Returns
    -------
    ChannelState
        Users sorted ascending by ``|h_k|^2``; ties keep their input order.
    """
    d = np.asarray(distances_m, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise InvalidInputError("distances_m must be a non-empty list")
    if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
        raise InvalidInputError("distances must be positive")
    if not pathloss_exponent > 0.0:
        raise InvalidInputError("pathloss_exponent must be positive")

    if fading is None:
        rng = rng_seed if isinstance(rng_seed, np.random.Generator) else make_rng(rng_seed)
        g = draw_fading(rng, d.size)
    else:
        g = np.asarray(fading, dtype=complex)
        if g.shape != d.shape:
            raise InvalidInputError("fading and distances must have equal length")

    gains = (g.real ** 2 + g.imag ** 2) * d ** (-pathloss_exponent)
    order = np.argsort(gains, kind="stable")
    return ChannelState(_frozen(gains[order]), _frozen(d[order]),
                        _frozen(g[order], dtype=complex))


@dataclass(frozen=True, eq=False)
class DerivedConstants:
    c: np.ndarray  # C_k = P |h_k|^2, watts


def derived_constants(params: SystemParams, channel: ChannelState) -> DerivedConstants:
    return DerivedConstants(_frozen(params.total_power_w * channel.gains))
