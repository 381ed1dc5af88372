"""
Command line interface.

    graphflow simulate        --config cfg.json [--out DIR] [--emit-plot-script]
    graphflow stability       --config cfg.json --period T [--t0 T0] [--save-matrix]
    graphflow resolvent-check --config cfg.json --lambda RE,IM
    graphflow validate        --config cfg.json

Exit codes: 0 success, 1 configuration error, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import SimConfig, parse_config
from .errors import (
    ConfigError,
    GraphflowError,
    NotPeriodic,
    SingularBoundarySystem,
)
from .graph import constant_domain_check, validate_conservation
from .spectral.monodromy import monodromy_assemble, spectral_radius
from .spectral.resolvent import resolvent_check
from .transport.oracle import oracle_cell_averages
from .transport.state import NetworkState, total_mass
from .transport.stepping import evolve, step_times

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

PERTURBED_NOTE = (
    "note: for the absorption problem the initial condition is read as u_j(s, x) = f_j(x) "
    "and the vertex coupling as in the unperturbed problem, "
    "c_j u_j(1, t) = w_ij sum_k phi+_ik c_k u_k(0, t) with k = 1..m."
)

PLOT_SCRIPT = '''"""Plot the snapshots written by `graphflow simulate`."""
import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "snapshots.csv"
rows = [r for r in csv.reader(open(path)) if r and not r[0].startswith("#")]
header, rows = rows[0], rows[1:]
series = defaultdict(lambda: defaultdict(list))
for time, edge, _, x, value in rows:
    series[edge][float(time)].append((float(x), float(value)))
fig, axes = plt.subplots(len(series), 1, sharex=True, squeeze=False)
for ax, (edge, snaps) in zip(axes[:, 0], sorted(series.items())):
    for time, pts in sorted(snaps.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, label=f"t={time:g}")
    ax.set_ylabel(edge)
axes[-1, 0].set_xlabel("x")
axes[0, 0].legend(fontsize="small")
plt.savefig(path.replace(".csv", ".png"), dpi=120)
'''


def fmt(x) -> str:
    """Shortest round-trip decimal."""
    return repr(float(x))


def _header(cfg: SimConfig, scheme: str) -> str:
    return f"# config_sha256={cfg.sha256} scheme={scheme}\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _outdir(cfg: SimConfig, override) -> Path:
    return Path(override) if override else Path(cfg.output_directory)


# -- simulate ------------------------------------------------------------------


def run_simulate(cfg: SimConfig, outdir: Path, emit_plot_script: bool = False) -> int:
    sim = cfg.sim
    g = cfg.graph
    snapshots: list[NetworkState] = []
    every = sim.snapshot_every
    times = step_times(sim.s, sim.t, sim.dt)

    if sim.scheme == "oracle":
        snap_times = list(times[::every])
        if snap_times[-1] != times[-1]:
            snap_times.append(times[-1])
        for tt in snap_times:
            snapshots.append(oracle_cell_averages(g, cfg.velocities, cfg.initial, sim.s, tt, sim.cells_per_edge))
        first = NetworkState.from_data(cfg.initial, g.m, sim.cells_per_edge, sim.s)
        _, report = evolve(g, cfg.velocities, cfg.initial, sim.s, sim.t, sim.dt, "oracle", sim.cells_per_edge)
        steps = len(times) - 1
    else:
        first = NetworkState.from_data(cfg.initial, g.m, sim.cells_per_edge, sim.s)
        snapshots.append(first)
        counter = {"k": 0}

        def keep(state):
            counter["k"] += 1
            if counter["k"] % every == 0 or counter["k"] == len(times) - 1:
                snapshots.append(state)

        _, report = evolve(
            g, cfg.velocities, first, sim.s, sim.t, sim.dt, sim.scheme,
            absorption=cfg.absorption if cfg.has_absorption else None, callback=keep,
        )
        steps = report.steps

    head = _header(cfg, sim.scheme)
    ids = g.edge_ids
    lines = [head, "time,edge_id,cell_index,x_center,value\n"]
    for st in snapshots:
        xc = st.centers
        for j, e in enumerate(ids):
            for k in range(st.cells_per_edge):
                lines.append(f"{fmt(st.timestamp)},{e},{k},{fmt(xc[k])},{fmt(st.values[j, k])}\n")
    mass_lines = [head, "time," + ",".join(f"mass_{e}" for e in ids) + ",total\n"]
    for st in snapshots:
        per, tot = total_mass(st)
        mass_lines.append(",".join([fmt(st.timestamp)] + [fmt(v) for v in per] + [fmt(tot)]) + "\n")

    rep = report.to_dict()
    rep.update({"config_sha256": cfg.sha256, "steps": steps, "snapshots": len(snapshots)})
    if "csv" in cfg.formats:
        _write(outdir / "snapshots.csv", "".join(lines))
        _write(outdir / "mass.csv", "".join(mass_lines))
    if "json" in cfg.formats:
        _write(outdir / "report.json", _dump_json(rep))
    if emit_plot_script:
        _write(outdir / "plot_snapshots.py", PLOT_SCRIPT)
    print(f"simulate: {steps} steps, mass drift {report.mass_drift:.3e}, wrote {outdir}")
    return EXIT_OK


# -- stability -----------------------------------------------------------------


def run_stability(cfg: SimConfig, period: float, t0: float, outdir: Path, save_matrix=False) -> int:
    sim = cfg.sim
    M = monodromy_assemble(
        cfg.graph,
        cfg.velocities,
        period,
        t0,
        sim.cells_per_edge,
        sim.dt,
        sim.scheme,
        absorption=cfg.absorption if cfg.has_absorption else None,
    )
    rep = spectral_radius(M)
    out = rep.to_dict()
    out.update(
        {
            "config_sha256": cfg.sha256,
            "scheme": sim.scheme,
            "t0": t0,
            "cells_per_edge": sim.cells_per_edge,
            "dt": sim.dt,
            "min_entry": float(M.matrix.min()),
            "max_column_norm": float(M.column_norms().max()),
        }
    )
    _write(outdir / "stability.json", _dump_json(out))
    if save_matrix:
        rows = [_header(cfg, sim.scheme), "row,col,value\n"]
        rows += [f"{r},{c},{fmt(v)}\n" for r, c, v in M.to_csv_rows()]
        _write(outdir / "monodromy.csv", "".join(rows))
    print(f"stability: r = {rep.radius:.12g}, omega0 = {rep.omega0:.12g} -> {rep.verdict}")
    return EXIT_OK


# -- resolvent-check -----------------------------------------------------------


def parse_lambda(text: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        parts.append("0")
    if len(parts) != 2:
        raise ValueError(f"lambda must be given as 're,im', got {text!r}")
    return complex(float(parts[0]), float(parts[1]))


def run_resolvent_check(cfg: SimConfig, lam: complex, outdir: Path) -> int:
    sim = cfg.sim
    cells = max(200, sim.cells_per_edge)
    out = {"config_sha256": cfg.sha256, "lambda": [lam.real, lam.imag], "s": sim.s}
    try:
        chk = resolvent_check(cfg.graph, cfg.velocities, sim.s, lam, cfg.initial, cells=cells)
    except SingularBoundarySystem as exc:
        out.update({"singular": True, "condition": exc.condition, "message": str(exc)})
        _write(outdir / "resolvent.json", _dump_json(_finite(out)))
        print(f"resolvent-check: {exc}")
        return EXIT_NUMERIC
    passed = chk.passed()
    out.update(
        {
            "singular": False,
            "condition": chk.condition,
            "identity_residual": chk.identity_residual,
            "boundary_residual": chk.boundary_residual,
            "laplace_residual": chk.laplace_residual,
            "thresholds": {"identity": 1e-6, "boundary": 1e-8, "laplace": 1e-3},
            "passed": passed,
        }
    )
    _write(outdir / "resolvent.json", _dump_json(out))
    print(
        f"resolvent-check: identity {chk.identity_residual:.3e}, boundary {chk.boundary_residual:.3e}, "
        f"laplace {chk.laplace_residual:.3e} -> {'ok' if passed else 'FAILED'}"
    )
    return EXIT_OK if passed else EXIT_NUMERIC


def _finite(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    return obj


# -- validate ------------------------------------------------------------------


def run_validate(cfg: SimConfig) -> int:
    g = cfg.graph
    sim = cfg.sim
    for line in validate_conservation(g).lines():
        print(line)
    window = (sim.s, sim.t) if sim.t > sim.s else (sim.s, sim.s + 1.0)
    bounds_ok = True
    for e, p in zip(g.edge_ids, cfg.velocities):
        rep = p.validate_bounds(window)
        bounds_ok &= rep.ok
        status = "ok" if rep.ok else "VIOLATED"
        print(
            f"velocity {e}: {status} (observed [{rep.observed_min:.6g}, {rep.observed_max:.6g}], "
            f"declared [{p.lower:.6g}, {p.upper:.6g}])"
        )
    times = np.linspace(window[0], window[1], 64)
    dom = constant_domain_check(g.line_adjacency, cfg.velocities, times)
    if dom.constant:
        print("constant domain: yes")
    else:
        i, j, ta, tb = dom.witness
        print(
            f"constant domain: no (witness: edges {g.edge_ids[i]}, {g.edge_ids[j]}; "
            f"c_i/c_j differs between t={ta:.6g} and t={tb:.6g})"
        )
    smooth = all(p.smooth for p in cfg.velocities)
    print(f"velocities C^1: {'yes' if smooth else 'no'}")
    print(PERTURBED_NOTE)
    for path, msg in cfg.diagnostics:
        print(f"error: {path}: {msg}")
    return EXIT_OK if not cfg.diagnostics else EXIT_CONFIG


# -- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="graphflow", description=__doc__.splitlines()[1])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="evolve the initial state and write snapshots")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (default: output.directory of the config)")
    p.add_argument("--emit-plot-script", action="store_true")

    p = sub.add_parser("stability", help="assemble the period map and its spectral radius")
    p.add_argument("--config", required=True)
    p.add_argument("--period", required=True, type=float)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--out")
    p.add_argument("--save-matrix", action="store_true")

    p = sub.add_parser("resolvent-check", help="check the explicit resolvent formula")
    p.add_argument("--config", required=True)
    p.add_argument("--lambda", dest="lam", required=True)
    p.add_argument("--out")

    p = sub.add_parser("validate", help="print conservation, bounds and domain diagnostics")
    p.add_argument("--config", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config, strict=args.command != "validate")
        if args.command == "validate":
            return run_validate(cfg)
        outdir = _outdir(cfg, args.out)
        if args.command == "simulate":
            return run_simulate(cfg, outdir, args.emit_plot_script)
        if args.command == "stability":
            return run_stability(cfg, args.period, args.t0, outdir, args.save_matrix)
        try:
            lam = parse_lambda(args.lam)
        except ValueError as exc:
            print(f"error: --lambda: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return run_resolvent_check(cfg, lam, outdir)
    except (ConfigError, NotPeriodic) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GraphflowError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
