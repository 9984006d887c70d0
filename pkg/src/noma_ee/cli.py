"""Command-line front end: single-instance solvers and figure sweeps.

Exit codes: 0 success, 2 infeasible instance, 64 usage error, 74 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .allocation import InfeasibleThetaError, _Problem, make_allocation
from .io import sweep_metadata, write_figure
from .montecarlo import (FIG1_POWER_DBM, FIG2_R_MIN, STRATEGIES, ExperimentSpec, figure1_specs,
                         figure2_specs, figure3_specs, run_sweeps)
from .optimizer import InfeasibleProblemError, dinkelbach_maximize, maximize_ee
from .qos import is_feasible, min_power, qos_profile
from .system_model import (ChannelState, InvalidInputError, SystemParams, generate_channel,
                           watts_to_dbm)
from .tdma import QOS_MODES, TdmaConfig, tdma_max_ee

EXIT_OK, EXIT_INFEASIBLE, EXIT_USAGE, EXIT_IO = 0, 2, 64, 74


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def float_list(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def grid(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    if ":" not in text:
        return float_list(text)
    try:
        start, stop, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def _physics(p: argparse.ArgumentParser):
    p.add_argument("--power-dbm", type=float, default=20.0, help="total power budget P (dBm)")
    p.add_argument("--noise-dbm", type=float, default=-70.0, help="noise power (dBm)")
    p.add_argument("--circuit-dbm", type=float, default=30.0, help="circuit power (dBm)")
    p.add_argument("--alpha", type=float, default=3.0, help="path-loss exponent")


def _instance_parser(sub, name, help_text) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help_text)
    _physics(p)
    p.add_argument("--users", type=int, default=None, help="number of users K")
    p.add_argument("--distances", type=float_list, default=None,
                   help="user distances in metres (one value is repeated K times)")
    p.add_argument("--gains", type=float_list, default=None,
                   help="explicit linear channel power gains (overrides --distances)")
    p.add_argument("--rmin", type=float_list, default=[1.0],
                   help="minimum rates in bits/s/Hz (one value applies to all users)")
    p.add_argument("--seed", type=int, default=0, help="fading seed for --distances")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--output", type=Path, default=None)
    return p


def _mc_parser(sub, name, help_text, grid_help) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help_text)
    _physics(p)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", type=grid, default=None, help=grid_help)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", type=Path, default=None,
                   help="output file or directory (default ./<command>.<format>)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--tdma-qos", choices=QOS_MODES, default="per-slot",
                   help="where the TDMA baseline enforces minimum rates")
    p.add_argument("--tdma-grid", type=int, default=2001, help="TDMA power grid points")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="noma-ee", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _instance_parser(sub, "feasibility", "minimum power per user and feasibility of P")
    p = _instance_parser(sub, "allocate", "optimal power split at a given theta")
    p.add_argument("--theta", type=float, default=1.0, help="transmit power ratio in (0, 1]")
    p = _instance_parser(sub, "optimize", "EE-optimal transmit power and split")
    p.add_argument("--cross-check", action="store_true",
                   help="also run Dinkelbach's method and report the relative EE gap")
    p = _instance_parser(sub, "tdma", "TDMA baseline by exhaustive power search")
    p.add_argument("--grid", type=int, default=2001, help="number of power grid points")
    p.add_argument("--tdma-qos", choices=QOS_MODES, default="time-averaged")

    for name, grid_help in (("figure1", "P grid in dBm"), ("figure2", "R_min grid"),
                            ("figure3", "P grid in dBm")):
        p = _mc_parser(sub, name, f"reproduce the {name} sweep", grid_help)
        if name != "figure3":
            p.add_argument("--users", type=int_list, default=[2, 3], help="user counts K")
        if name == "figure1":
            p.add_argument("--rmin", type=float, default=1.0)
        if name == "figure2":
            p.add_argument("--distance", type=float, default=80.0)

    p = _mc_parser(sub, "sweep", "custom sweep of P (dBm) or a common R_min", "sweep values")
    p.add_argument("--variable", choices=("power", "rmin"), default="power")
    p.add_argument("--users", type=int, default=2)
    p.add_argument("--distances", type=float_list, default=[80.0])
    p.add_argument("--rmin", type=float_list, default=[1.0])
    p.add_argument("--strategies", type=lambda s: s.split(","), default=list(STRATEGIES))
    p.add_argument("--label", default="")
    return parser


# single-instance commands

def _instance(args):
    params = SystemParams.from_dbm(args.power_dbm, args.noise_dbm, args.circuit_dbm, args.alpha)
    if args.gains is not None:
        channel = ChannelState.from_gains(args.gains)
    else:
        dist = args.distances or [80.0]
        k = args.users or (len(dist) if len(dist) > 1 else 2)
        if len(dist) == 1:
            dist = dist * k
        if len(dist) != k:
            raise UsageError(f"--distances has {len(dist)} entries but --users is {k}")
        channel = generate_channel(dist, args.alpha, args.seed)
    if args.users is not None and channel.num_users != args.users:
        raise UsageError(f"--gains has {channel.num_users} entries but --users is {args.users}")
    rmin = args.rmin
    if len(rmin) == 1:
        rmin = rmin * channel.num_users
    if len(rmin) != channel.num_users:
        raise UsageError(f"--rmin has {len(rmin)} entries for {channel.num_users} users")
    return params, channel, qos_profile(rmin)


def _channel_dict(channel: ChannelState) -> dict:
    return {"gains": channel.gains.tolist(),
            "distances_m": [None if math.isnan(d) else d for d in channel.distances_m.tolist()]}


def _emit(args, report: dict, lines: list[str]):
    text = (json.dumps(report, indent=2, sort_keys=True) + "\n" if args.format == "json"
            else "\n".join(lines) + "\n")
    if args.output is None:
        sys.stdout.write(text)
    else:
        args.output.write_text(text, encoding="utf-8")


def _fmt_w(w: float) -> str:
    return f"{w:.6g} W ({watts_to_dbm(w):.4f} dBm)"


def _infeasible(params, mp) -> int:
    sys.stderr.write(f"infeasible: P_Min = {_fmt_w(mp.total_w)} exceeds "
                     f"P = {_fmt_w(params.total_power_w)}\n")
    return EXIT_INFEASIBLE


def cmd_feasibility(args) -> int:
    params, channel, qos = _instance(args)
    mp = min_power(channel, params, qos)
    ok = is_feasible(params, mp)
    report = {"channel": _channel_dict(channel), "r_min": qos.r_min.tolist(),
              "per_user_min_power_w": mp.per_user_w.tolist(), "p_min_w": mp.total_w,
              "p_min_dbm": watts_to_dbm(mp.total_w), "theta_min": mp.theta_min,
              "total_power_w": params.total_power_w, "feasible": ok}
    lines = [f"user {k + 1}: gain {g:.6g}  r_min {r:g}  P_min {_fmt_w(p)}"
             for k, (g, r, p) in enumerate(zip(channel.gains, qos.r_min, mp.per_user_w))]
    lines += [f"P_Min: {_fmt_w(mp.total_w)}", f"P:     {_fmt_w(params.total_power_w)}",
              f"feasible: {'yes' if ok else 'no'}"]
    _emit(args, report, lines)
    return EXIT_OK


def _allocation_lines(alloc) -> list[str]:
    lines = [f"user {k + 1}: coeff {a:.10g}  rate {r:.10g} bits/s/Hz"
             for k, (a, r) in enumerate(zip(alloc.coeffs, alloc.rates))]
    return lines + [f"theta: {alloc.theta:.12g}", f"transmit power: {_fmt_w(alloc.transmit_power_w)}",
                    f"sum rate: {alloc.sum_rate:.10g} bits/s/Hz",
                    f"EE: {alloc.ee:.10g} bits/Joule/Hz"]


def cmd_allocate(args) -> int:
    params, channel, qos = _instance(args)
    mp = min_power(channel, params, qos)
    if not is_feasible(params, mp):
        return _infeasible(params, mp)
    if args.theta > 1.0:
        raise UsageError("--theta must not exceed 1")
    try:
        coeffs = _Problem(channel, params, qos).coeffs(args.theta)
    except InfeasibleThetaError as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return EXIT_INFEASIBLE
    alloc = make_allocation(coeffs, channel, params)
    _emit(args, {"channel": _channel_dict(channel), "allocation": alloc.to_dict()},
          _allocation_lines(alloc))
    return EXIT_OK


def cmd_optimize(args) -> int:
    params, channel, qos = _instance(args)
    try:
        opt = maximize_ee(channel, params, qos)
    except InfeasibleProblemError:
        return _infeasible(params, min_power(channel, params, qos))
    report = {"channel": _channel_dict(channel), "optimum": opt.to_dict()}
    lines = [f"theta*: {opt.theta_star:.12g}  ({opt.boundary.value}, {opt.iterations} iterations)"]
    lines += _allocation_lines(opt.allocation)
    if args.cross_check:
        alt = dinkelbach_maximize(channel, params, qos)
        gap = abs(alt.allocation.ee - opt.allocation.ee) / opt.allocation.ee
        report["cross_check"] = {"dinkelbach": alt.to_dict(), "relative_ee_gap": gap}
        lines.append(f"Dinkelbach EE: {alt.allocation.ee:.10g}  relative gap {gap:.3e}")
    _emit(args, report, lines)
    return EXIT_OK


def cmd_tdma(args) -> int:
    params, channel, qos = _instance(args)
    res = tdma_max_ee(channel, params, qos, TdmaConfig(grid_points=args.grid,
                                                       qos_mode=args.tdma_qos))
    lines = [f"feasible: {'yes' if res.feasible else 'no'}",
             f"power: {_fmt_w(res.power_w)}" if res.feasible else "power: 0 W"]
    lines += [f"user {k + 1}: rate {r:.10g} bits/s/Hz" for k, r in enumerate(res.rates)]
    lines += [f"sum rate: {res.sum_rate:.10g} bits/s/Hz", f"EE: {res.ee:.10g} bits/Joule/Hz"]
    _emit(args, {"channel": _channel_dict(channel), "tdma": res.to_dict()}, lines)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


# sweeps

def _common(args) -> dict:
    return dict(noise_dbm=args.noise_dbm, circuit_dbm=args.circuit_dbm,
                pathloss_exponent=args.alpha,
                tdma=TdmaConfig(grid_points=args.tdma_grid, qos_mode=args.tdma_qos))


def _sweep_specs(args) -> list[ExperimentSpec]:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    common = _common(args)
    if args.command == "figure1":
        return figure1_specs(args.seed, args.trials, args.users,
                             tuple(args.grid or FIG1_POWER_DBM), r_min=args.rmin, **common)
    if args.command == "figure2":
        return figure2_specs(args.seed, args.trials, args.users, tuple(args.grid or FIG2_R_MIN),
                             power_dbm=args.power_dbm, distance_m=args.distance, **common)
    if args.command == "figure3":
        return figure3_specs(args.seed, args.trials, tuple(args.grid or FIG1_POWER_DBM), **common)
    dist = args.distances * args.users if len(args.distances) == 1 else args.distances
    variable = "total_power_dbm" if args.variable == "power" else "r_min"
    values = tuple(args.grid or (FIG1_POWER_DBM if variable == "total_power_dbm" else FIG2_R_MIN))
    rmin = args.rmin[0] if len(args.rmin) == 1 else tuple(args.rmin)
    try:
        return [ExperimentSpec(variable, values, args.users, tuple(dist), r_min_profile=rmin,
                               power_dbm=args.power_dbm, strategies=tuple(args.strategies),
                               trials=args.trials, seed=args.seed, label=args.label, **common)]
    except ValueError as exc:
        raise UsageError(str(exc))


def cmd_figures(args) -> int:
    specs = _sweep_specs(args)
    out = args.output or Path(f"{args.command}.{args.format}")
    if out.is_dir():
        out = out / f"{args.command}.{args.format}"
    records = run_sweeps(specs, jobs=max(1, args.jobs))
    paths = write_figure(records, sweep_metadata(args.command, specs), out, args.format)
    for p in paths:
        print(p)
    return EXIT_OK


COMMANDS = {"feasibility": cmd_feasibility, "allocate": cmd_allocate,
            "optimize": cmd_optimize, "tdma": cmd_tdma, "figure1": cmd_figures,
            "figure2": cmd_figures, "figure3": cmd_figures, "sweep": cmd_figures}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, InvalidInputError) as exc:
        sys.stderr.write(f"noma-ee: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"noma-ee: I/O error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
