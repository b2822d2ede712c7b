import argparse
import logging
import os
import platform
import sys
import time
from collections.abc import Callable, Sequence
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, NoReturn

import joblib  # type: ignore
import numpy as np
import scipy
from dotenv import load_dotenv

from salpeter.cache import EigenCache, physics_hash
from salpeter.delta_check import compare_to_delta_limit
from salpeter.errors import ConfigurationError, SalpeterError
from salpeter.grid import Grid
from salpeter.kernel import EigenBasis, eigenfunction_position, parity, select_state
from salpeter.observables import (
    Denominator,
    edge_mass,
    observable_series,
    olc_global_max,
    olc_series,
    transmitted_cut,
)
from salpeter.potential import describe
from salpeter.propagate import evolve_series
from salpeter.scan import olc_scan
from salpeter.types import OlcRecord, Units, Wavepacket
from salpeter.utils.output import FLOAT_FORMAT, write_csv, write_manifest
from salpeter.utils.scenario import Scenario, load_scenario, scan_packet
from salpeter.wavepacket import cos8_packet, support_edges

logger = logging.getLogger(__name__)

# --- Configuration ---
# Mass this close to the box edge wraps around through the periodic FFT
EDGE_WARNING = 1e-8
# Other exit codes come from SalpeterError.exit_code
EXIT_USAGE = 1
EXIT_IO = 4


# --- Run context ---
class RunContext:
    """Everything a subcommand needs: the validated scenario, output location and cache."""

    def __init__(self, scenario: Scenario, out_dir: Path, threads: int, use_cache: bool) -> None:
        self.scenario = scenario
        self.out_dir = out_dir
        self.threads = threads
        self.grid: Grid = scenario.make_grid()
        self.cache = EigenCache.beside(out_dir, enabled=use_cache)
        self.files: list[str] = []
        self.results: dict[str, Any] = {}
        self.snapshots: tuple[list[Wavepacket], list[Wavepacket] | None] | None = None

    @property
    def units(self) -> Units:
        return self.scenario.units

    def basis(self) -> EigenBasis:
        return self.cache.load_or_solve(self.grid, self.scenario.potential, self.units)

    def initial(self) -> Wavepacket:
        return cos8_packet(self.scenario.packet, self.grid)

    def csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
        path = write_csv(self.out_dir / f"{name}.csv", header, rows)
        self.files.append(path.name)


def _guard_edges(snapshots: Sequence[Wavepacket], label: str) -> None:
    for psi in snapshots:
        mass = edge_mass(psi)
        if mass > EDGE_WARNING:
            logger.warning(
                f"{label} packet has mass {mass:.3e} within 5 nodes of the box edge at t={psi.time}; "
                "periodic wrap-around may contaminate results"
            )
            return


def _snapshots(ctx: RunContext) -> tuple[list[Wavepacket], list[Wavepacket] | None]:
    """Barrier and (optionally) free snapshots, computed once per run."""
    if ctx.snapshots is not None:
        return ctx.snapshots
    psi0 = ctx.initial()
    times = ctx.scenario.time_list
    barrier = evolve_series(ctx.basis(), psi0, times, n_jobs=ctx.threads)
    _guard_edges(barrier, "Barrier")
    free = None
    if ctx.scenario.observables.free_reference:
        free = evolve_series(ctx.units, psi0, times, n_jobs=ctx.threads)
        _guard_edges(free, "Free")
    ctx.snapshots = (barrier, free)
    return ctx.snapshots


# --- Subcommands ---
def cmd_eigen(ctx: RunContext, args: argparse.Namespace) -> None:
    basis = ctx.basis()
    ctx.csv("eigen", ["n", "eps"], [(n, e) for n, e in enumerate(basis.eps)])
    ctx.results["eps_min"] = float(basis.eps[0])
    ctx.results["eps_max"] = float(basis.eps[-1])
    energy = getattr(args, "state_energy", None)
    if energy is not None:
        n = select_state(basis, energy, ctx.scenario.delta_check.parity)
        phi_x = eigenfunction_position(basis, n)
        rows = zip(ctx.grid.p_nodes, np.abs(basis.vecs[:, n]), ctx.grid.x_nodes, np.abs(phi_x))
        ctx.csv("eigenfunction", ["p", "abs_phi_p", "x", "abs_phi_x"], list(rows))
        ctx.results["state"] = {"n": n, "eps": float(basis.eps[n]), "parity": parity(basis.vecs[:, n], ctx.grid)}


def cmd_evolve(ctx: RunContext, args: argparse.Namespace) -> None:
    barrier, free = _snapshots(ctx)
    x = ctx.grid.x_nodes
    rows: list[tuple[Any, ...]] = []
    for k, psi in enumerate(barrier):
        free_density = free[k].density if free is not None else [None] * len(x)
        rows.extend(zip([psi.time] * len(x), x, psi.density, free_density))
    ctx.csv("evolve", ["t", "x", "density", "free_density"], rows)
    ctx.results["norms"] = [psi.norm() for psi in barrier]


def _olc(ctx: RunContext, snapshots: Sequence[Wavepacket], denominator: Denominator | None = None) -> list[OlcRecord]:
    _, right = support_edges(ctx.scenario.packet)
    x_cut = transmitted_cut(ctx.scenario.potential)
    return olc_series(snapshots, right, ctx.units, denominator or ctx.scenario.olc_denominator, x_cut)


def cmd_olc(ctx: RunContext, args: argparse.Namespace) -> None:
    barrier, free = _snapshots(ctx)
    series = _olc(ctx, barrier)
    ctx.csv("olc", ["t", "fraction"], [(r["t"], r["fraction"]) for r in series])
    t_max, f_max = olc_global_max(series)
    ctx.results["olc_global_max"] = {"t": t_max, "fraction": f_max}
    if free is not None:
        free_t, free_f = olc_global_max(_olc(ctx, free, "total"))
        ctx.results["free_olc_global_max"] = {"t": free_t, "fraction": free_f}


def cmd_transmitted(ctx: RunContext, barrier: Sequence[Wavepacket], free: Sequence[Wavepacket] | None) -> None:
    _, right = support_edges(ctx.scenario.packet)
    x_cut = transmitted_cut(ctx.scenario.potential)
    records = observable_series(barrier, x_cut, right, ctx.units, ctx.scenario.olc_denominator)
    free_records = observable_series(free, x_cut, right, ctx.units) if free is not None else None
    rows = []
    for k, r in enumerate(records):
        free_mean = free_records[k]["conditional_mean"] if free_records is not None else None
        rows.append(
            (r["t"], r["norm"], r["transmission"], r["reflection"], r["conditional_mean"],
             r["peak_position"], r["olc_fraction"], free_mean)
        )
    header = ["t", "norm", "transmission", "reflection", "conditional_mean",
              "peak_position", "olc_fraction", "free_conditional_mean"]
    ctx.csv("transmitted", header, rows)


def cmd_scan(ctx: RunContext, args: argparse.Namespace) -> None:
    scan = ctx.scenario.scan
    if scan is None:
        raise ConfigurationError("invalid scenario", [("scan", "the scan command needs a scan section")])
    packets = {length: scan_packet(ctx.scenario, length) for length in scan.length}
    points = olc_scan(
        ctx.grid,
        ctx.scenario.potential,
        ctx.units,
        packets,
        scan.v0,
        ctx.scenario.time_list,
        ctx.cache,
        ctx.scenario.olc_denominator,
        n_jobs=ctx.threads,
    )
    header = ["length", "v0", "t_max", "olc_max", "free_t_max", "free_olc_max"]
    ctx.csv("scan", header, [tuple(p[h] for h in header) for p in points])  # type: ignore[literal-required]


def cmd_delta_check(ctx: RunContext, args: argparse.Namespace) -> None:
    basis = ctx.basis()
    cfg = ctx.scenario.delta_check
    n = select_state(basis, cfg.energy, cfg.parity)
    result = compare_to_delta_limit(basis, n, ctx.grid, ctx.units)
    ctx.csv(
        "delta_check",
        ["n", "eps", "rel_l2_error", "scale_re", "scale_im"],
        [(result.index, result.eps_n, result.rel_l2_error, result.scale.real, result.scale.imag)],
    )
    ctx.results["rel_l2_error"] = result.rel_l2_error


def cmd_run(ctx: RunContext, args: argparse.Namespace) -> None:
    flags = ctx.scenario.observables
    if flags.density:
        cmd_evolve(ctx, args)
    if flags.olc:
        cmd_olc(ctx, args)
    if flags.transmitted:
        cmd_transmitted(ctx, *_snapshots(ctx))
    if ctx.scenario.scan is not None:
        cmd_scan(ctx, args)


COMMANDS: dict[str, Callable[[RunContext, argparse.Namespace], None]] = {
    "run": cmd_run,
    "eigen": cmd_eigen,
    "evolve": cmd_evolve,
    "olc": cmd_olc,
    "scan": cmd_scan,
    "delta-check": cmd_delta_check,
}


# --- Manifest ---
def _versions() -> dict[str, str]:
    try:
        own = metadata.version("salpeter-tunneling")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {
        "salpeter-tunneling": own,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "joblib": joblib.__version__,
        "python": platform.python_version(),
    }


def manifest_for(ctx: RunContext, command: str, wall_time: float) -> dict[str, Any]:
    scenario = ctx.scenario
    return {
        "command": command,
        "scenario": scenario.name,
        "scenario_hash": str(joblib.hash(scenario.model_dump(mode="json"))),
        "physics_hash": physics_hash(ctx.grid, scenario.potential, scenario.units),
        "potential": describe(scenario.potential),
        "versions": _versions(),
        "float_format": FLOAT_FORMAT,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": wall_time,
        "cache": {
            "location": str(ctx.cache.location) if ctx.cache.location else None,
            "hits": ctx.cache.hits,
            "misses": ctx.cache.misses,
        },
        "files": ctx.files,
        "results": ctx.results,
    }


# --- Environment settings ---
def env_threads() -> int:
    raw = os.getenv("SALPETER_THREADS", "1")
    try:
        return int(raw)
    except ValueError:
        problem = ("SALPETER_THREADS", f"expected an integer, got {raw!r}")
        raise ConfigurationError("bad environment", [problem]) from None


# --- Argument parsing ---
class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="path to a YAML scenario file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="override a scenario field, e.g. potential.v0=3 (repeatable)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: $SALPETER_THREADS or 1)")
    common.add_argument("--no-cache", action="store_true", help="always re-diagonalize")
    common.add_argument("--log-level", default=os.getenv("SALPETER_LOG_LEVEL", "INFO"))

    parser = _Parser(prog="salpeter", description="Salpeter-equation wavepacket tunneling simulations")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="every artifact the scenario enables")
    eigen = sub.add_parser("eigen", parents=[common], help="dump the spectrum")
    eigen.add_argument("--state-energy", type=float, default=None,
                       help="also dump the eigenfunction closest to this energy")
    sub.add_parser("evolve", parents=[common], help="density snapshots")
    sub.add_parser("olc", parents=[common], help="OLC fraction time series and its global maximum")
    sub.add_parser("scan", parents=[common], help="OLC maximum over barrier heights and widths")
    sub.add_parser("delta-check", parents=[common], help="narrow-barrier eigenvector comparison")
    return parser


# --- Entry point ---
def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=str(args.log_level).upper(), format="%(asctime)s - %(levelname)s - %(message)s"
    )

    started = time.perf_counter()
    try:
        scenario = load_scenario(args.scenario, args.override)
        out_dir = Path(args.out)
        threads = args.threads if args.threads is not None else env_threads()
        ctx = RunContext(scenario, out_dir, max(1, threads), use_cache=not args.no_cache)
        logger.info(f"Scenario '{scenario.name}': {describe(scenario.potential)}")
        COMMANDS[args.command](ctx, args)
        manifest = manifest_for(ctx, args.command, time.perf_counter() - started)
        write_manifest(out_dir / f"{args.command}.manifest.json", manifest)
    except SalpeterError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        return EXIT_IO
    logger.info(f"Done in {time.perf_counter() - started:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
