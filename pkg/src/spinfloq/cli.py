"""Command-line front end.

Every subcommand resolves its parameters as defaults <- ``--config`` JSON
file <- explicit flags, writes data files plus a ``manifest.json`` into the
output directory and prints a JSON summary on stdout.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 ill-defined
invariant, 4 numerical failure (integrator drift or lost positivity).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from spinfloq import __version__
from spinfloq.bloch import (
    BlochMap1D,
    bands_2d,
    chern_fhs,
    closed_grid,
    d_path,
    dispersion_1d,
    paper_chern_report,
    winding_integral,
    winding_number,
    zak_phase,
)
from spinfloq.couplings import DriveConfig, GeometryConfig, build_hopping_table
from spinfloq.dynamics import LindbladConfig, evolve_lindblad
from spinfloq.errors import (
    DomainError,
    IllDefinedInvariantError,
    IntegratorAccuracyError,
    PositivityError,
    PreconditionError,
)
from spinfloq.lattice import (
    build_chain,
    build_network,
    chiral_zero_mode_solver,
    diagonalize,
    projected_bands,
    zero_modes,
)
from spinfloq.physunits import feasibility_report, load_params

OUT_ENV = "SPINFLOQ_OUT"
FORMATS = ("csv", "json", "svg")

DEFAULTS = {
    "a0": 4.0,
    "a0_range": None,
    "omega": 10.0,
    "q": 1,
    "n": 5,
    "nx": 11,
    "orders": "1,3",
    "kpoints": 1024,
    "grid": 128,
    "gamma": 0.0,
    "tmax": 2000.0,
    "format": "csv,json",
    "jobs": 1,
    "boundary": "open",
    "tol": 1e-6,
}

# Per-command overrides of the shared defaults.
COMMAND_DEFAULTS = {
    "strip": {"kpoints": 256},
    "edges": {"n": 50},
    "transfer": {"n": 3, "a0": 12.0},
    "chern": {"grid": 64},
}

COMMANDS = ("hoppings", "spectrum", "dispersion", "dpath", "winding", "zak", "chern",
            "bands2d", "strip", "edges", "transfer", "params", "reproduce")
FIGURES = ("fig3", "fig4", "fig5", "fig7", "fig9")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _add_common(p: argparse.ArgumentParser):
    # every value defaults to None so that config files can fill the gaps
    p.add_argument("--a0", type=float)
    p.add_argument("--a0-range", dest="a0_range", metavar="LO:HI:STEP")
    p.add_argument("--omega", type=float)
    p.add_argument("--q", type=int)
    p.add_argument("--n", type=int, help="unit cells along the chain")
    p.add_argument("--nx", type=int, help="strip width in unit cells")
    p.add_argument("--orders", help="comma separated odd neighbor orders")
    p.add_argument("--kpoints", type=int)
    p.add_argument("--grid", type=int)
    p.add_argument("--gamma", type=float, help="dephasing rate in J0")
    p.add_argument("--tmax", type=float, help="evolution time in 1/J0")
    p.add_argument("--boundary", choices=("open", "periodic"))
    p.add_argument("--tol", type=float, help="zero-mode energy tolerance in J0")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./spinfloq_out)")
    p.add_argument("--format", help="comma separated subset of csv,json,svg")
    p.add_argument("--jobs", type=int)
    p.add_argument("--config", help="flat JSON file of flag values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spinfloq", description="Floquet-engineered topological spin arrays")
    parser.add_argument("--version", action="version", version=f"spinfloq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        _add_common(p)
        if name == "reproduce":
            p.add_argument("figure", choices=FIGURES)
        if name == "params":
            p.add_argument("file", nargs="?", help="flat JSON file of physical parameters")
        if name == "edges":
            p.add_argument("--lattice", choices=("chain", "network"), default="chain")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, an optional config file and explicit flags."""
    params = dict(DEFAULTS)
    params.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a flat JSON object")
        unknown = sorted(set(data) - set(DEFAULTS) - {"out"})
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        params.update(data)
    for key in list(DEFAULTS) + ["out"]:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    params.setdefault("out", None)
    if params["out"] is None:
        params["out"] = os.environ.get(OUT_ENV, "spinfloq_out")
    params["orders"] = _parse_orders(params["orders"])
    params["format"] = _parse_formats(params["format"])
    params["command"] = args.command
    for extra in ("figure", "file", "lattice"):
        if hasattr(args, extra):
            params[extra] = getattr(args, extra)
    return params


def _parse_orders(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [s for s in str(value).split(",") if s.strip()]
    try:
        return [int(s) for s in items]
    except ValueError as exc:
        raise UsageError(f"bad --orders value {value!r}") from exc


def _parse_formats(value) -> list[str]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    fmts = [s.strip() for s in items if s.strip()]
    bad = [f for f in fmts if f not in FORMATS]
    if bad:
        raise UsageError(f"unknown format(s): {', '.join(bad)}")
    return fmts


def a0_values(params: dict) -> list[float]:
    spec = params.get("a0_range")
    if not spec:
        return [float(params["a0"])]
    try:
        lo, hi, step = (float(x) for x in str(spec).split(":"))
    except ValueError as exc:
        raise UsageError(f"bad --a0-range {spec!r}, expected lo:hi:step") from exc
    if step <= 0 or hi < lo:
        raise UsageError("--a0-range needs lo <= hi and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def _table(params: dict, a0: float):
    drive = DriveConfig(a0=a0, omega=params["omega"], q=params["q"])
    return build_hopping_table(GeometryConfig(), drive, params["orders"])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


class Output:
    """Collects files for one run and writes them with a manifest."""

    def __init__(self, params: dict):
        self.params = params
        self.root = Path(params["out"])
        self.files: list[str] = []

    def _path(self, name: str) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return path

    def csv(self, name: str, header: list[str], rows):
        if "csv" not in self.params["format"]:
            return
        with open(self._path(name + ".csv"), "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) for v in row])

    def json(self, name: str, payload: dict):
        if "json" not in self.params["format"]:
            return
        with open(self._path(name + ".json"), "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def svg(self, name: str, draw):
        if "svg" not in self.params["format"]:
            return
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        matplotlib.rcParams["svg.hashsalt"] = "spinfloq"
        fig, ax = plt.subplots(figsize=(5, 4))
        draw(ax)
        fig.tight_layout()
        fig.savefig(self._path(name + ".svg"), metadata={"Date": None})
        plt.close(fig)

    def manifest(self):
        resolved = {k: v for k, v in self.params.items() if k != "out"}
        payload = {"version": __version__, "parameters": resolved, "files": sorted(self.files)}
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.root / "manifest.json", "w") as fh:
            json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _key(a0: float) -> str:
    return format(float(a0), ".12g")


def _tag(a0: float) -> str:
    return ("m" if a0 < 0 else "") + ("%g" % abs(a0)).replace(".", "p")


# ---------------------------------------------------------------- commands


def cmd_hoppings(params, out: Output):
    rows = []
    for a0 in a0_values(params):
        table = _table(params, a0)
        for r in table.rows():
            rows.append({"a0": a0, **r})
    out.json("hoppings", {"rows": rows})
    out.csv("hoppings", ["a0[J0]", "order", "forward_re[J0]", "forward_im[J0]",
                         "backward_re[J0]", "backward_im[J0]"],
            [[r["a0"], r["order"], r["forward_re"], r["forward_im"], r["backward_re"],
              r["backward_im"]] for r in rows])
    return {"rows": rows}


def _spectrum_one(params, a0):
    op = build_chain(params["n"], _table(params, a0), params["boundary"])
    spec = diagonalize(op)
    count = zero_modes(spec, params["tol"]).count if params["boundary"] == "open" else None
    return spec.eigenvalues, count


def cmd_spectrum(params, out: Output, name="spectrum"):
    a0s = a0_values(params)
    if params["jobs"] > 1 and len(a0s) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=params["jobs"]) as pool:
            results = list(pool.map(lambda a: _spectrum_one(params, a), a0s))
    else:
        results = [_spectrum_one(params, a) for a in a0s]
    rows = [[a0, i, e] for a0, (w, _) in zip(a0s, results) for i, e in enumerate(w)]
    out.csv(name, ["a0[J0]", "index", "energy[J0]"], rows)
    counts = {_key(a0): c for a0, (_, c) in zip(a0s, results)}
    summary = {"N": params["n"], "dimension": 2 * params["n"], "zero_mode_counts": counts,
               "tolerance[J0]": params["tol"]}
    out.json(name + "_summary", summary)

    def draw(ax):
        xs = np.repeat(a0s, 2 * params["n"])
        ys = np.concatenate([w for w, _ in results])
        ax.plot(xs, ys, ".", ms=1.5)
        ax.set_xlabel("a0 [J0]")
        ax.set_ylabel("energy [J0]")

    out.svg(name, draw)
    return summary


def cmd_dispersion(params, out: Output, name="dispersion"):
    summary = {}
    for a0 in a0_values(params):
        disp = dispersion_1d(BlochMap1D(_table(params, a0)), params["kpoints"])
        out.csv(f"{name}_a0_{_tag(a0)}", ["k[1/a]", "lower[J0]", "upper[J0]"],
                zip(disp.k, disp.lower, disp.upper))
        summary[_key(a0)] = {"gap_minimum[J0]": disp.gap_minimum}

        def draw(ax, d=disp):
            ax.plot(d.k, d.lower, d.k, d.upper)
            ax.set_xlabel("k")
            ax.set_ylabel("energy [J0]")

        out.svg(f"{name}_a0_{_tag(a0)}", draw)
    out.json(name + "_summary", summary)
    return summary


def cmd_dpath(params, out: Output, name="dpath"):
    summary = {}
    for a0 in a0_values(params):
        path = d_path(BlochMap1D(_table(params, a0)), params["kpoints"])
        out.csv(f"{name}_a0_{_tag(a0)}", ["k[1/a]", "dx[J0]", "dy[J0]"],
                zip(path.k_grid, path.dx, path.dy))
        summary[_key(a0)] = {"closure_error[J0]": path.closure_error()}

        def draw(ax, p=path):
            ax.plot(p.dx, p.dy)
            ax.plot([0], [0], "r*")
            ax.set_aspect("equal")
            ax.set_xlabel("dx [J0]")
            ax.set_ylabel("dy [J0]")

        out.svg(f"{name}_a0_{_tag(a0)}", draw)
    out.json(name + "_summary", summary)
    return summary


def _winding_one(params, a0):
    path = d_path(BlochMap1D(_table(params, a0)), max(params["kpoints"], 256))
    return {"a0": a0, "winding": winding_number(path),
            "winding_integral": winding_integral(path)}


def cmd_winding(params, out: Output, name="winding"):
    a0s = a0_values(params)
    if len(a0s) == 1:
        result = _winding_one(params, a0s[0])
        out.json(name, result)
        return result
    rows = []
    for a0 in a0s:
        try:
            r = _winding_one(params, a0)
            rows.append([a0, r["winding"], r["winding_integral"]])
        except IllDefinedInvariantError:
            rows.append([a0, "gapless", "nan"])
    out.csv(name, ["a0[J0]", "winding", "winding_integral"], rows)
    summary = {"points": len(rows), "gapless": sum(r[1] == "gapless" for r in rows)}
    out.json(name + "_summary", summary)
    return summary


def cmd_zak(params, out: Output):
    summary = {}
    for a0 in a0_values(params):
        z = zak_phase(BlochMap1D(_table(params, a0)), params["kpoints"])
        summary[_key(a0)] = {"phase[rad]": z.phase, "winding": z.winding,
                             "resolved[rad]": z.resolved}
    result = next(iter(summary.values())) if len(summary) == 1 else summary
    out.json("zak", result)
    return result


def cmd_chern(params, out: Output):
    summary = {}
    for a0 in a0_values(params):
        table = _table(params, a0)
        drive = DriveConfig(a0=a0, omega=params["omega"], q=params["q"])
        report = paper_chern_report(a0, drive, orders=params["orders"])
        lattice = {}
        for band in range(4):
            try:
                lattice[str(band)] = chern_fhs(table, band, params["grid"])
            except IllDefinedInvariantError as exc:
                lattice[str(band)] = f"not isolated: {exc}"
        summary[_key(a0)] = {
            "half_winding_chern": report.chern,
            "zak_vector[rad]": report.zak_vector,
            "winding": report.winding,
            "convention": report.convention,
            "lattice_gauge_chern": lattice,
        }
    result = next(iter(summary.values())) if len(summary) == 1 else summary
    out.json("chern", result)
    return result


def cmd_bands2d(params, out: Output, name="bands2d"):
    summary = {}
    for a0 in a0_values(params):
        bands = bands_2d(_table(params, a0), grid=params["grid"])
        kx, ky = np.meshgrid(bands.kx, bands.ky, indexing="ij")
        e = bands.numeric
        out.csv(f"{name}_a0_{_tag(a0)}", ["kx[1/a]", "ky[1/a]", "E0[J0]", "E1[J0]", "E2[J0]",
                                          "E3[J0]"],
                zip(kx.ravel(), ky.ravel(), *(e[..., b].ravel() for b in range(4))))
        gap = bands.middle_gap()
        summary[_key(a0)] = {"formula_error[J0]": bands.formula_error(),
                             "middle_gap_min[J0]": float(gap.min()),
                             "lowest_gap_min[J0]": float((e[..., 1] - e[..., 0]).min())}

        def draw(ax, b=bands):
            diag = np.arange(len(b.kx))
            for j in range(4):
                ax.plot(b.kx, b.numeric[diag, diag, j])
            ax.set_xlabel("kx = ky")
            ax.set_ylabel("energy [J0]")

        out.svg(f"{name}_a0_{_tag(a0)}", draw)
    out.json(name + "_summary", summary)
    return summary


def cmd_strip(params, out: Output, name="strip"):
    summary = {}
    ky = closed_grid(params["kpoints"] - 1)
    for a0 in a0_values(params):
        pb = projected_bands(params["nx"], _table(params, a0), ky, jobs=params["jobs"])
        rows = []
        for i, k in enumerate(pb.ky):
            for j in range(pb.energies.shape[1]):
                rows.append([k, j, pb.energies[i, j], pb.edge_weight[i, j],
                             pb.edge_flags[i, j], pb.in_gap[i, j]])
        out.csv(f"{name}_a0_{_tag(a0)}", ["ky[1/a]", "index", "energy[J0]", "edge_weight",
                                          "edge_flag", "in_gap"], rows)
        summary[_key(a0)] = {"Nx": params["nx"], "ky_points": int(len(ky)),
                             "edge_states": int(pb.edge_flags.sum()),
                             "in_gap_edge_states": int(pb.in_gap.sum())}

        def draw(ax, p=pb):
            for j in range(p.energies.shape[1]):
                ax.plot(p.ky, p.energies[:, j], color="tab:blue", lw=0.5)
            kk = np.repeat(p.ky[:, None], p.energies.shape[1], axis=1)
            ax.plot(kk[p.in_gap], p.energies[p.in_gap], "r.", ms=2)
            ax.set_xlabel("ky")
            ax.set_ylabel("energy [J0]")

        out.svg(f"{name}_a0_{_tag(a0)}", draw)
    out.json(name + "_summary", summary)
    return summary


def cmd_edges(params, out: Output, name="edges"):
    summary = {}
    lattice = params.get("lattice") or "chain"
    for a0 in a0_values(params):
        table = _table(params, a0)
        if lattice == "network":
            op = build_network(params["n"], table)
        else:
            op = build_chain(params["n"], table)
        spec = diagonalize(op)
        rep = zero_modes(spec, params["tol"])
        solver = chiral_zero_mode_solver(op, tol=params["tol"])
        tag = f"{name}_a0_{_tag(a0)}"
        out.csv(tag + "_eigenvalues", ["index", "energy[J0]", "zero_mode"],
                [[i, e, abs(e) <= params["tol"]] for i, e in enumerate(spec.eigenvalues)])
        out.csv(tag + "_modes", ["mode", "energy[J0]", "left_weight", "right_weight",
                                 "sublattice_polarization"],
                [[m, rep.energies[m], rep.left_weight[m], rep.right_weight[m],
                  rep.sublattice_polarization[m]] for m in range(rep.count)])
        out.csv(tag + "_profiles", ["site"] + [f"mode{m}_density" for m in range(rep.count)],
                [[s, *np.abs(rep.modes[s]) ** 2] for s in range(op.dimension)])
        summary[_key(a0)] = {"lattice": lattice, "N": params["n"], "zero_modes": rep.count,
                             "chiral_solver_count": solver.count,
                             "min_edge_weight": float(rep.edge_weight.min()) if rep.count else None}

        def draw(ax, w=spec.eigenvalues):
            zero = np.abs(w) <= params["tol"]
            idx = np.arange(len(w))
            ax.plot(idx[~zero], w[~zero], "b.", idx[zero], w[zero], "r.")
            ax.set_xlabel("index")
            ax.set_ylabel("energy [J0]")

        out.svg(tag, draw)
    result = next(iter(summary.values())) if len(summary) == 1 else summary
    out.json(name + "_summary", summary)
    return result


def cmd_transfer(params, out: Output, name="transfer"):
    summary = {}
    for a0 in a0_values(params):
        chain = build_chain(params["n"], _table(params, a0))
        cfg = LindbladConfig(gamma_s=params["gamma"], t_max=params["tmax"])
        tr = evolve_lindblad(chain, cfg)
        sites = tr.populations.shape[1]
        tag = f"{name}_a0_{_tag(a0)}_gamma_{_fmt(params['gamma'])}"
        out.csv(tag, ["t[1/J0]"] + [f"P_site{j + 1}" for j in range(sites)]
                + ["trace", "fidelity"],
                ([t, *p, s, f] for t, p, s, f in zip(tr.times, tr.populations, tr.trace,
                                                     tr.fidelity)))
        summary[_key(a0)] = {"period[1/J0]": tr.detected_period,
                             "peak_fidelity": tr.peak_fidelity,
                             "peak_time[1/J0]": tr.peak_time, "flags": tr.flags,
                             "gamma_s[J0]": params["gamma"],
                             "trace_drift": tr.trace_drift,
                             "min_eigenvalue": float(tr.min_eigenvalue.min()),
                             "fidelity_convention": "peak target-site population"}

        def draw(ax, t=tr):
            ax.plot(t.times, t.populations[:, 0], label="left")
            ax.plot(t.times, t.fidelity, label="right")
            ax.set_xlabel("t [1/J0]")
            ax.set_ylabel("population")
            ax.legend()

        out.svg(tag, draw)
    result = next(iter(summary.values())) if len(summary) == 1 else summary
    out.json(name + "_summary", summary)
    return result


def cmd_params(params, out: Output):
    report = feasibility_report(load_params(params.get("file")))
    out.json("params", report)
    return report


FIG_A0 = {
    "fig4": [-16.0, -11.0, 4.0, 19.0, 21.0, 26.0],
    "fig5": [-11.0, 19.0, 21.0, 26.0],
    "fig7": [4.0, -11.0, 21.0],
    "fig9": [12.0, 24.0, -2.0],
}


def _with(params, **changes):
    p = dict(params)
    p.update(changes)
    return p


def cmd_reproduce(params, out: Output):
    base = _with(params, omega=10.0, q=1, orders=[1, 3])
    fig = params["figure"]
    summary = {"figure": fig}
    if fig == "fig3":
        sweep = _with(base, n=5, a0_range="-20:30:0.05")
        spec = cmd_spectrum(sweep, out, name="fig3_spectrum")
        summary["a0_points"] = len(spec["zero_mode_counts"])
        summary["winding"] = cmd_winding(sweep, out, name="fig3_winding")
    elif fig == "fig4":
        for a0 in FIG_A0[fig]:
            p = _with(base, a0=a0, a0_range=None)
            cmd_dispersion(p, out, name="fig4_dispersion")
            cmd_dpath(p, out, name="fig4_dpath")
            summary[_key(a0)] = cmd_winding(p, out, name=f"fig4_winding_a0_{_tag(a0)}")
    elif fig == "fig5":
        for a0 in FIG_A0[fig]:
            summary[_key(a0)] = cmd_edges(_with(base, a0=a0, a0_range=None, n=50, tol=1e-6,
                                                lattice="chain"), out, name="fig5")
    elif fig == "fig7":
        summary["bands2d"] = cmd_bands2d(_with(base, a0=4.0, a0_range=None, grid=128), out,
                                         name="fig7_bands2d")
        for a0 in FIG_A0[fig]:
            summary[_key(a0)] = cmd_strip(_with(base, a0=a0, a0_range=None, nx=11,
                                                kpoints=256), out, name="fig7_strip")
    elif fig == "fig9":
        runs = [(a0, 0.0) for a0 in FIG_A0[fig]] + [(12.0, 1e-4)]
        for a0, gamma in runs:
            tmax = 40000.0 if a0 == 12.0 else 2000.0
            res = cmd_transfer(_with(base, a0=a0, a0_range=None, n=3, gamma=gamma, tmax=tmax),
                               out, name="fig9")
            summary[f"{_key(a0)}/gamma={_fmt(gamma)}"] = res
    out.json(f"{fig}_summary", summary)
    return summary


HANDLERS = {
    "hoppings": cmd_hoppings,
    "spectrum": cmd_spectrum,
    "dispersion": cmd_dispersion,
    "dpath": cmd_dpath,
    "winding": cmd_winding,
    "zak": cmd_zak,
    "chern": cmd_chern,
    "bands2d": cmd_bands2d,
    "strip": cmd_strip,
    "edges": cmd_edges,
    "transfer": cmd_transfer,
    "params": cmd_params,
    "reproduce": cmd_reproduce,
}


def _join_range_values(argv: list[str]) -> list[str]:
    # argparse takes "-20:30:1" for an option; glue it to its flag instead
    out, i = [], 0
    while i < len(argv):
        if argv[i] == "--a0-range" and i + 1 < len(argv):
            out.append(f"--a0-range={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv=None) -> int:
    argv = _join_range_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = build_parser().parse_args(argv)
        params = resolve(args)
        if params["jobs"] < 1:
            raise UsageError("--jobs must be at least 1")
        out = Output(params)
        result = HANDLERS[args.command](params, out)
        out.manifest()
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return 1
    except IllDefinedInvariantError as exc:
        print(f"spinfloq: ill-defined invariant: {exc}", file=sys.stderr)
        return 3
    except (DomainError, PreconditionError) as exc:
        print(f"spinfloq: domain error: {exc}", file=sys.stderr)
        return 2
    except (IntegratorAccuracyError, PositivityError) as exc:
        print(f"spinfloq: numerical failure: {exc}", file=sys.stderr)
        return 4
    print(json.dumps(_jsonable(result), sort_keys=True))
    return 0


def main():
    sys.exit(run())
