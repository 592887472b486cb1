"""Command-line front end.

Every command writes ``<out>/<command>-<timestamp>.csv`` together with a
``.manifest.json`` holding the merged parameters; ``replay`` re-runs a
manifest and reproduces the CSV byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .disorder import DisorderSpec
from .ensemble import ProtocolSpec, default_workers, run_ensemble
from .evolve import PropagatorConfig
from .hamiltonian import ProtocolKind, build_hamiltonian, dimerized_profile, uniform_profile
from .hilbert import build_basis
from .protocols import Payload, find_tmin, make_setup
from .spectral import energy_gap

COMMANDS = ("gap", "prepare", "transfer", "tmin", "timescale", "sweep")


class ValidationError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def linear_fit(x, y) -> dict:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < 2:
        return {}
    slope, intercept = np.polyfit(x, y, 1)
    r2 = float(np.corrcoef(x, y)[0, 1] ** 2) if len(x) > 2 or np.ptp(y) > 0 else 1.0
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2}


class Table:
    def __init__(self, header: list[str]):
        self.header = header
        self.rows: list[list] = []

    def add(self, *row):
        self.rows.append(list(row))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


# ---------------------------------------------------------------- commands


def _cfg(p: dict) -> PropagatorConfig:
    return PropagatorConfig(backend=p["backend"], dt=p["dt"], krylov_dim=p["krylov_dim"])


def _workers(p: dict) -> int:
    return p["workers"] if p["workers"] else default_workers()


def cmd_gap(p: dict, progress) -> tuple[Table, dict]:
    table = Table(["N", "inv_N", "gap", "error"])
    ok_n, ok_gap = [], []
    for n in p["n"]:
        try:
            if n > p["max_n"]:
                raise ValidationError(f"N={n} exceeds --max-n {p['max_n']}")
            basis = build_basis(n, 0)
            prof = dimerized_profile(n) if p["mode"] == "dimerized" else uniform_profile(n)
            g = energy_gap(build_hamiltonian(basis, prof), seed=p["seed"])
        except ValueError as exc:
            table.add(n, "", "", str(exc))
            continue
        progress(f"gap N={n}: {g:.10f}")
        table.add(n, 1.0 / n, g, "")
        ok_n.append(n)
        ok_gap.append(g)
    results = {}
    if p["mode"] == "uniform" and len(ok_n) >= 2:
        results["fit_gap_vs_inv_n"] = linear_fit(1.0 / np.array(ok_n), ok_gap)
    return table, results


def _disorder_grid(p: dict) -> list[tuple[float, float, float]]:
    return [(eta, delta, bnuc) for delta, eta, bnuc in itertools.product(p["delta"], p["eta"], p["bnuc"])]


def _is_clean(p: dict) -> bool:
    return all(len(p[k]) == 1 and p[k][0] == 0 for k in ("delta", "eta", "bnuc"))


def _ensemble_table(p: dict, protocol: ProtocolSpec, progress) -> tuple[Table, dict]:
    table = Table(["eta", "delta", "b_nuc", "mean", "std_error", "peak_mean", "peak_std_error", "n_realizations"])
    for eta, delta, bnuc in _disorder_grid(p):
        spec = DisorderSpec(delta, eta, bnuc, p["realizations"], p["seed"], field_coupling=p["field_coupling"])
        stats = run_ensemble(protocol, spec, _cfg(p), workers=_workers(p))
        progress(f"eta={eta} delta={delta} b_nuc={bnuc}: <F>={stats.mean_fidelity:.6f} +- {stats.std_error:.6f}")
        table.add(eta, delta, bnuc, stats.mean_fidelity, stats.std_error, stats.mean_peak, stats.peak_std_error, stats.n)
    return table, {}


def _single_run(p: dict, protocol: ProtocolSpec, column: str, progress) -> tuple[Table, dict]:
    setup = make_setup(protocol.kind, protocol.n_sites, protocol.ramp_time, protocol.payload)
    cfg = _cfg(p)
    tr = setup.run(None, PropagatorConfig(cfg.backend, cfg.dt, cfg.krylov_dim, cfg.tol, p["observe_every"]),
                   protocol.t_end)
    table = Table(["Jt", column])
    for t, f in zip(tr.times, tr.fidelities):
        table.add(float(t), float(f))
    results = {"fidelity_at_ramp_end": tr.fidelity_at_ramp_end}
    if protocol.t_end > protocol.ramp_time:
        t_peak, f_peak = tr.post_ramp_peak()
        results.update(t_peak=t_peak, f_peak=f_peak)
    progress(" ".join(f"{k}={v:.10g}" for k, v in results.items()))
    return table, results


def cmd_prepare(p: dict, progress) -> tuple[Table, dict]:
    protocol = ProtocolSpec(ProtocolKind.GROUND_PREP, p["n"][0], p["ramp_time"], post_window=p["post_window"] or 0.0)
    if _is_clean(p):
        return _single_run(p, protocol, "F_g", progress)
    return _ensemble_table(p, protocol, progress)


def cmd_transfer(p: dict, progress) -> tuple[Table, dict]:
    window = p["post_window"]
    if window is None:
        window = 5.0 if _is_clean(p) else 0.0
    protocol = ProtocolSpec(ProtocolKind.TRANSFER, p["n"][0], p["ramp_time"], Payload(p["payload"]), window)
    if _is_clean(p):
        return _single_run(p, protocol, "F_c", progress)
    return _ensemble_table(p, protocol, progress)


def cmd_sweep(p: dict, progress) -> tuple[Table, dict]:
    kind = ProtocolKind(p["protocol"])
    window = p["post_window"] or 0.0
    protocol = ProtocolSpec(kind, p["n"][0], p["ramp_time"], Payload(p["payload"]), window)
    return _ensemble_table(p, protocol, progress)


def cmd_tmin(p: dict, progress) -> tuple[Table, dict]:
    table = Table(["N", "N2", "JT_min"])
    ns, ts = [], []
    for n in p["n"]:
        t = find_tmin(p["protocol"], n, p["threshold"], p["resolution"], p["payload"], _cfg(p), t_max=p["t_max"])
        progress(f"T_min N={n}: {t:.6f}")
        table.add(n, n * n, t)
        ns.append(n)
        ts.append(t)
    results = {}
    if len(ns) >= 2:
        results["fit_tmin_vs_n2"] = linear_fit(np.array(ns) ** 2, ts)
    return table, results


def cmd_timescale(p: dict, progress) -> tuple[Table, dict]:
    if not p["j_hz"] > 0:
        raise ValidationError("--j-hz must be positive")
    if p["jt_min"] is None:
        raise ValidationError("--jt-min is required (take it from a tmin table)")
    table = Table(["N", "JT_min", "J_hz", "seconds", "ns"])
    for n in p["n"]:
        seconds = p["jt_min"] / p["j_hz"]
        table.add(n, p["jt_min"], p["j_hz"], seconds, seconds * 1e9)
        progress(f"N={n}: {seconds * 1e9:.6g} ns")
    return table, {}


RUNNERS = {
    "gap": cmd_gap,
    "prepare": cmd_prepare,
    "transfer": cmd_transfer,
    "tmin": cmd_tmin,
    "timescale": cmd_timescale,
    "sweep": cmd_sweep,
}

PLOT_AXES = {
    "gap": ("2", "3", "1/N", "gap (J hbar)"),
    "prepare": ("1", "2", "Jt", "F_g"),
    "transfer": ("1", "2", "Jt", "F_c"),
    "tmin": ("2", "3", "N^2", "JT_min"),
    "timescale": ("1", "5", "N", "time (ns)"),
    "sweep": ("1", "4", "eta", "<F>"),
}


def gnuplot_script(command: str, csv_name: str) -> str:
    x, y, xl, yl = PLOT_AXES[command]
    return (
        "set datafile separator ','\n"
        "set key off\n"
        f"set xlabel '{xl}'\nset ylabel '{yl}'\n"
        f"plot '{csv_name}' every ::1 using {x}:{y} with linespoints\n"
    )


# ---------------------------------------------------------------- argument handling


def _base_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value file; flags override it")
    common.add_argument("--n", type=int, nargs="*", default=[10])
    common.add_argument("--ramp-time", type=float, default=None)
    common.add_argument("--dt", type=float, default=0.01)
    common.add_argument("--backend", choices=("auto", "dense", "krylov"), default="auto")
    common.add_argument("--krylov-dim", type=int, default=20)
    common.add_argument("--delta", type=float, nargs="+", default=[0.0])
    common.add_argument("--eta", type=float, nargs="+", default=[0.0])
    common.add_argument("--bnuc", type=float, nargs="+", default=[0.0])
    common.add_argument("--field-coupling", type=float, default=0.5)
    common.add_argument("--realizations", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=0, help="0 = all available cores")
    common.add_argument("--out", type=Path, default=Path("results"))
    common.add_argument("--emit-plot", action="store_true")
    common.add_argument("--tag", default=None, help="file stem to use instead of a timestamp")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="adiabatic-chain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gap", parents=[common], help="energy gap vs N")
    g.add_argument("--mode", choices=("dimerized", "uniform"), default="uniform")
    g.add_argument("--max-n", type=int, default=20)

    for name, helptext in (("prepare", "ground-state preparation"), ("transfer", "singlet/triplet transfer"),
                           ("sweep", "cartesian disorder sweep")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--payload", choices=[x.value for x in Payload], default="triplet")
        s.add_argument("--post-window", type=float, default=None)
        s.add_argument("--observe-every", type=int, default=1)
        if name == "sweep":
            s.add_argument("--protocol", choices=[k.value for k in ProtocolKind], default="ground_prep")

    t = sub.add_parser("tmin", parents=[common], help="minimal ramp time vs N")
    t.add_argument("--protocol", choices=[k.value for k in ProtocolKind], default="ground_prep")
    t.add_argument("--payload", choices=[x.value for x in Payload], default="triplet")
    t.add_argument("--threshold", type=float, default=0.99)
    t.add_argument("--resolution", type=float, default=0.05)
    t.add_argument("--t-max", type=float, default=200.0)

    ts = sub.add_parser("timescale", parents=[common], help="convert JT_min to physical time")
    ts.add_argument("--j-hz", type=float, required=True)
    ts.add_argument("--jt-min", type=float, default=None)

    r = sub.add_parser("replay", help="re-run a manifest")
    r.add_argument("manifest", type=Path)
    r.add_argument("--out", type=Path, default=None)
    r.add_argument("--tag", default=None)
    return parser


def read_config(path: Path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse(argv: list[str]) -> dict:
    parser = _base_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return {"command": "replay", "manifest": args.manifest, "out": args.out, "tag": args.tag}
    if args.config is not None:
        # re-parse with the file as defaults so explicit flags still win
        sub_argv = [argv[0]]
        for k, v in read_config(args.config).items():
            sub_argv += [f"--{k.replace('_', '-')}", *v.split()] if v.lower() not in ("true", "false") else (
                [f"--{k.replace('_', '-')}"] if v.lower() == "true" else [])
        args = parser.parse_args(sub_argv + argv[1:])
    p = vars(args)
    p.pop("config", None)
    p["out"] = str(p["out"])
    validate(p)
    return p


def validate(p: dict):
    cmd = p["command"]
    if cmd in ("prepare", "transfer", "sweep"):
        if p["ramp_time"] is None:
            raise ValidationError("--ramp-time is required")
        if not p["ramp_time"] > 0:
            raise ValidationError("ramp time must be positive")
        if len(p["n"]) != 1:
            raise ValidationError("give exactly one --n")
        n = p["n"][0]
        if n % 2 or n < 2:
            raise ValidationError("--n must be even")
        if (cmd == "transfer" or p.get("protocol") == "transfer") and n < 6:
            raise ValidationError("transfer needs --n >= 6")
    if cmd == "tmin":
        for n in p["n"]:
            if n % 2 or n < 2 or (p["protocol"] == "transfer" and n < 6):
                raise ValidationError(f"invalid chain length {n} for {p['protocol']}")
    if not p["dt"] > 0:
        raise ValidationError("--dt must be positive")
    if p["realizations"] < 1:
        raise ValidationError("--realizations must be >= 1")
    for k in ("delta", "eta", "bnuc"):
        if any(not (math.isfinite(v) and v >= 0) for v in p[k]):
            raise ValidationError(f"--{k} values must be finite and non-negative")
    if p["workers"] < 0:
        raise ValidationError("--workers must be >= 0")


# ---------------------------------------------------------------- execution


def execute(p: dict, stem: str | None = None, stream=sys.stderr) -> dict:
    """Run one command, write CSV + manifest (+ plot); return the manifest."""
    progress = (lambda msg: None) if p.get("quiet") else (lambda msg: print(msg, file=stream, flush=True))
    out = Path(p["out"])
    out.mkdir(parents=True, exist_ok=True)
    if stem is None:
        stem = p.get("tag") or f"{p['command']}-{datetime.now(timezone.utc).strftime('%Y%m%dT%H%M%S%f')}"
    csv_path = out / f"{stem}.csv"
    manifest_path = out / f"{stem}.manifest.json"
    plot_path = out / f"{stem}.gnuplot"
    written: list[Path] = []
    start = time.perf_counter()
    try:
        table, results = RUNNERS[p["command"]](p, progress)
        csv_path.write_text(table.to_csv(), newline="")
        written.append(csv_path)
        outputs = {"csv": str(csv_path)}
        if p.get("emit_plot"):
            plot_path.write_text(gnuplot_script(p["command"], csv_path.name))
            written.append(plot_path)
            outputs["plot"] = str(plot_path)
        params = {k: v for k, v in p.items() if k not in ("command", "quiet", "tag")}
        manifest = {
            "command": p["command"],
            "parameters": params,
            "master_seed": p["seed"],
            "code_version": __version__,
            "wall_clock_seconds": time.perf_counter() - start,
            "outputs": outputs,
            "results": results,
        }
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
        written.append(manifest_path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    if results:
        print(json.dumps(results, sort_keys=True))
    return manifest


def replay(manifest_path: Path, out: Path | None = None, tag: str | None = None) -> dict:
    manifest = json.loads(Path(manifest_path).read_text())
    p = dict(manifest["parameters"])
    p["command"] = manifest["command"]
    if out is not None:
        p["out"] = str(out)
    p["tag"] = tag
    validate(p)
    return execute(p)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        p = parse(argv)
        if p["command"] == "replay":
            replay(p["manifest"], p["out"], p["tag"])
        else:
            execute(p)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # noqa: BLE001 - reported as a nonzero exit status
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
