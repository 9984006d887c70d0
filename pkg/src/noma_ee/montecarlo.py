"""Seeded Monte Carlo sweeps comparing EEPA, MaxSE and the TDMA baseline.

Trial ``i`` of an experiment with master seed ``s`` draws its fading from
``make_rng(s, i)``; the same draws are reused for every sweep value (common
random numbers), so curves are compared on identical channels and results do
not depend on trial execution order or worker count.

An infeasible trial contributes EE = 0 to the mean rather than being dropped.

The TDMA curves default to per-slot rate requirements (see :mod:`noma_ee.tdma`):
with time-averaged requirements TDMA would need at least as much power as NOMA
on every draw and could never outlast it as the minimum rate grows.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .optimizer import OptimizerConfig, maximize_ee
from .allocation import _Problem, make_allocation
from .qos import FEASIBILITY_RTOL, qos_profile
from .system_model import SystemParams, dbm_to_watts, draw_fading, generate_channel, make_rng
from .tdma import TdmaConfig, tdma_max_ee

__all__ = [
    "STRATEGIES",
    "FIG3_CASES",
    "ExperimentSpec",
    "SweepRecord",
    "TrialResult",
    "ExperimentResult",
    "run_trial",
    "run_experiment",
    "summarize",
    "figure1_specs",
    "figure2_specs",
    "figure3_specs",
    "sweep_figure1",
    "sweep_figure2",
    "sweep_figure3",
    "run_sweeps",
]

STRATEGIES = ("EEPA", "MaxSE", "TDMA")
SWEEP_VARIABLES = ("total_power_dbm", "r_min", "case_label")

FIG1_POWER_DBM = tuple(float(p) for p in range(0, 51, 2))
FIG2_R_MIN = tuple(round(0.25 * i, 10) for i in range(1, 25))
FIG3_CASES = {
    "case1": (60.0, 50.0, 40.0),
    "case2": (70.0, 55.0, 40.0),
    "case3": (60.0, 55.0, 50.0),
    "case4": (80.0, 80.0, 80.0),
}


@dataclass(frozen=True)
class ExperimentSpec:
    """One averaged curve family: a sweep variable, its grid and fixed settings.

    ``distances_m`` is a per-user tuple, or a mapping from case label to such a
    tuple when ``sweep_variable == "case_label"``. Powers are in dBm.
    """

    sweep_variable: str
    sweep_values: tuple
    users: int
    distances_m: tuple | Mapping[str, tuple]
    r_min_profile: float | tuple = 1.0
    power_dbm: float = 20.0
    noise_dbm: float = -70.0
    circuit_dbm: float = 30.0
    pathloss_exponent: float = 3.0
    strategies: tuple = STRATEGIES
    trials: int = 10000
    seed: int = 0
    label: str = ""
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    tdma: TdmaConfig = field(default_factory=lambda: TdmaConfig(qos_mode="per-slot"))

    def __post_init__(self):
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ValueError(f"unknown sweep variable {self.sweep_variable!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.sweep_values) == 0:
            raise ValueError("sweep_values must be non-empty")
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ValueError(f"unknown strategies {sorted(unknown)}")
        if self.sweep_variable == "case_label":
            missing = set(self.sweep_values) - set(self.distances_m)
            if missing:
                raise ValueError(f"no distances for cases {sorted(missing)}")
        elif len(self.distances_m) != self.users:
            raise ValueError("distances_m needs one entry per user")

    def strategy_label(self, strategy: str) -> str:
        return f"{strategy}_{self.label}" if self.label else strategy

    def metadata(self) -> dict:
        meta = asdict(self)
        meta["distances_m"] = (dict(self.distances_m) if isinstance(self.distances_m, Mapping)
                               else list(self.distances_m))
        return meta


@dataclass(frozen=True)
class SweepRecord:
    strategy: str
    sweep_value: float | str
    mean_ee: float
    stderr_ee: float
    feasible_fraction: float
    trials: int
    seed: int


@dataclass(frozen=True)
class TrialResult:
    ee: dict  # strategy -> list of EE per sweep value
    feasible: dict  # strategy -> list of bool per sweep value


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    ee: dict  # strategy -> array (trials, len(sweep_values))
    feasible: dict


def _instance_settings(spec: ExperimentSpec, value):
    power, r_min, dist = spec.power_dbm, spec.r_min_profile, spec.distances_m
    if spec.sweep_variable == "total_power_dbm":
        power = value
    elif spec.sweep_variable == "r_min":
        r_min = value
    else:
        dist = spec.distances_m[value]
    params = SystemParams(dbm_to_watts(power), dbm_to_watts(spec.noise_dbm),
                          dbm_to_watts(spec.circuit_dbm), spec.pathloss_exponent)
    return params, qos_profile(r_min, spec.users), tuple(dist)


def run_trial(spec: ExperimentSpec, trial_index: int) -> TrialResult:
    """Evaluate every requested strategy on one channel draw at every sweep value."""
    fading = draw_fading(make_rng(spec.seed, trial_index), spec.users)
    ee = {s: [] for s in spec.strategies}
    feasible = {s: [] for s in spec.strategies}
    for value in spec.sweep_values:
        params, qos, dist = _instance_settings(spec, value)
        channel = generate_channel(dist, spec.pathloss_exponent, 0, fading=fading)
        prob = _Problem(channel, params, qos)
        noma_ok = prob.theta_min <= 1.0 + FEASIBILITY_RTOL
        for s in spec.strategies:
            if s == "TDMA":
                res = tdma_max_ee(channel, params, qos, spec.tdma)
                ee[s].append(res.ee)
                feasible[s].append(res.feasible)
            elif not noma_ok:
                ee[s].append(0.0)
                feasible[s].append(False)
            elif s == "EEPA":
                ee[s].append(maximize_ee(channel, params, qos, spec.optimizer).allocation.ee)
                feasible[s].append(True)
            else:
                ee[s].append(make_allocation(prob.coeffs(1.0), channel, params).ee)
                feasible[s].append(True)
    return TrialResult(ee, feasible)


def _run_chunk(spec: ExperimentSpec, indices: Sequence[int]) -> list[TrialResult]:
    return [run_trial(spec, i) for i in indices]


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    """Run all trials, optionally across ``jobs`` worker processes."""
    indices = list(range(spec.trials))
    if jobs > 1 and spec.trials > 1:
        chunks = [indices[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, [spec] * len(chunks), chunks))
        trials: list = [None] * spec.trials
        for chunk, part in zip(chunks, parts):
            for i, res in zip(chunk, part):
                trials[i] = res
    else:
        trials = _run_chunk(spec, indices)
    ee = {s: np.array([t.ee[s] for t in trials]) for s in spec.strategies}
    feasible = {s: np.array([t.feasible[s] for t in trials], dtype=bool)
                for s in spec.strategies}
    return ExperimentResult(spec, ee, feasible)


def _mean_stderr(values: np.ndarray) -> tuple[float, float]:
    xs = values.tolist()
    n = len(xs)
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var / n)


def summarize(result: ExperimentResult) -> list[SweepRecord]:
    spec = result.spec
    records = []
    for s in spec.strategies:
        for j, value in enumerate(spec.sweep_values):
            mean, se = _mean_stderr(result.ee[s][:, j])
            frac = float(np.count_nonzero(result.feasible[s][:, j])) / spec.trials
            records.append(SweepRecord(spec.strategy_label(s), value, mean, se, frac,
                                       spec.trials, spec.seed))
    return records


def figure1_specs(seed: int, trials: int = 10000, users: Sequence[int] = (2, 3),
                  power_dbm: Sequence[float] = FIG1_POWER_DBM, r_min: float = 1.0,
                  distance_m: float = 80.0, strategies=STRATEGIES, **common) -> list[ExperimentSpec]:
    """Average EE versus budget P for each user count."""
    return [ExperimentSpec("total_power_dbm", tuple(power_dbm), k, (distance_m,) * k,
                           r_min_profile=r_min, strategies=tuple(strategies), trials=trials,
                           seed=seed, label=f"K{k}", **common)
            for k in users]


def figure2_specs(seed: int, trials: int = 10000, users: Sequence[int] = (2, 3),
                  r_min: Sequence[float] = FIG2_R_MIN, power_dbm: float = 20.0,
                  distance_m: float = 80.0, strategies=STRATEGIES, **common) -> list[ExperimentSpec]:
    """Average EE versus a common minimum rate at fixed budget."""
    return [ExperimentSpec("r_min", tuple(r_min), k, (distance_m,) * k, power_dbm=power_dbm,
                           strategies=tuple(strategies), trials=trials, seed=seed,
                           label=f"K{k}", **common)
            for k in users]


def figure3_specs(seed: int, trials: int = 10000, power_dbm: Sequence[float] = FIG1_POWER_DBM,
                  cases: Mapping[str, Sequence[float]] = FIG3_CASES, r_min: float = 1.0,
                  strategies=("EEPA",), **common) -> list[ExperimentSpec]:
    """Average EE versus P for the four three-user placements."""
    return [ExperimentSpec("total_power_dbm", tuple(power_dbm), len(dist), tuple(dist),
                           r_min_profile=r_min, strategies=tuple(strategies), trials=trials,
                           seed=seed, label=name, **common)
            for name, dist in cases.items()]


def run_sweeps(specs: Sequence[ExperimentSpec], jobs: int = 1) -> list[SweepRecord]:
    records = []
    for spec in specs:
        records.extend(summarize(run_experiment(spec, jobs)))
    return records


def sweep_figure1(seed: int, jobs: int = 1, **kwargs) -> list[SweepRecord]:
    return run_sweeps(figure1_specs(seed, **kwargs), jobs)


def sweep_figure2(seed: int, jobs: int = 1, **kwargs) -> list[SweepRecord]:
    return run_sweeps(figure2_specs(seed, **kwargs), jobs)


def sweep_figure3(seed: int, jobs: int = 1, **kwargs) -> list[SweepRecord]:
    return run_sweeps(figure3_specs(seed, **kwargs), jobs)
