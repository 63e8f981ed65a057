"""Command-line front end.

Subcommands: rates, lattice-coeffs, cdos-model, simulate, sweep, fit,
validity. Each writes files into ``--out`` whose ``#`` header (CSV) or
``_meta`` block (JSON) records the package version, the command and the
fully resolved configuration. Exit codes: 0 ok, 2 configuration error,
3 numerical failure, 4 I/O or ingestion error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .cdos import BicMode, cdos, effective_beta, in_validity_range, preset, preset_names
from .config import RunConfig, field
from .constants import DEBYE, gamma0
from .dynamics import DickeState, SimulationGrid, integrate
from .entanglement import ConcurrenceTrace, c_max_analytic, t_max_analytic
from .errors import ConfigError, ConvergenceError, DomainError, IngestError
from .fitting import fit_cdos, fit_purcell, load_series, synthetic_cdos_series
from .greens import EmitterConfig, RateSet, free_space_rates
from .lattice import LatticeParams, ed_cosine_coefficients, md_cosine_coefficients
from .validity import regime_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
NM = 1e-9


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class Output:
    """Writes result files with provenance headers."""

    def __init__(self, out_dir, command, cfg: RunConfig, fmt, seed):
        self.dir = Path(out_dir)
        self.command = command
        self.cfg = cfg
        self.fmt = fmt
        self.seed = seed
        self.written = []

    def _meta(self):
        return {
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
            "config": dict(sorted(self.cfg.resolved.items())),
        }

    def _header(self, notes):
        lines = [f"metabic {__version__}", f"command: {self.command}", f"seed: {self.seed}"]
        lines += [f"config: {line}" for line in self.cfg.header_lines()]
        lines += list(notes)
        return "".join(f"# {line}\n" for line in lines)

    def _open(self, name):
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
            path = self.dir / name
            fh = open(path, "w", encoding="utf-8", newline="")
        except OSError as exc:
            raise OSError(f"cannot write {self.dir / name}: {exc.strerror}") from None
        self.written.append(str(path))
        return fh

    def table(self, stem, columns, rows, notes=()):
        if self.fmt == "json":
            records = [{c: (float(v) if isinstance(v, (float, np.floating)) else v) for c, v in zip(columns, r)} for r in rows]
            self.json(stem, {"notes": list(notes), "rows": records})
            return
        with self._open(f"{stem}.csv") as fh:
            fh.write(self._header(notes))
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_fmt(v) for v in r])

    def json(self, stem, payload):
        doc = {"_meta": self._meta()}
        doc.update(payload)
        with self._open(f"{stem}.json") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True, default=_json_default))
            fh.write("\n")


def _json_default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


# ---- configuration pieces -------------------------------------------------

def _mode_from_config(cfg: RunConfig, default_preset=None):
    name = cfg.get_str("mode", "preset", default_preset)
    renorm = cfg.get_bool("mode", "renormalize", False)
    if name is not None and not cfg.has("mode", "beta"):
        if name not in preset_names():
            raise ConfigError(f"mode.preset: unknown preset {name!r} (known: {', '.join(preset_names())})")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return preset(name, renormalize=renorm)
    lam = cfg.get_float("mode", "lambda_bic_nm", positive=True) * NM
    fwhm = cfg.get_float("mode", "fwhm_nm", float("nan"))
    with field("mode"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mode = BicMode(
            lambda_bic=lam,
            a=cfg.get_float("mode", "a_nm", positive=True) * NM,
            purcell=cfg.get_float("mode", "purcell"),
            beta=cfg.get_float("mode", "beta"),
            k_res=cfg.get_float("mode", "k_res_per_um") * 1e6,
            c_n=cfg.get_floats("mode", "c_n"),
            q_factor=lam / (fwhm * NM) if fwhm == fwhm else float("nan"),
            fwhm=fwhm * NM,
            kind=cfg.get_str("mode", "kind", "ED", choices=("ED", "MD")),
        )
        return mode.renormalized() if renorm else mode


def _table1():
    text = resources.files("metabic").joinpath("data", "table1_rates.csv").read_text()
    rows = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    out = {}
    for rec in csv.DictReader(rows):
        out[rec["mode"]] = tuple(float(rec[k]) for k in ("gamma11", "gamma22", "gamma12", "omega12"))
    return out


def _rates_from_config(cfg: RunConfig):
    """Normalized RateSet (gamma0 = 1) from [rates] or [mode] + separation."""
    if cfg.has("rates", "table1"):
        key = cfg.get_str("rates", "table1", choices=("ED", "MD"))
        return RateSet.from_normalized(*_table1()[key], 1.0), f"table1:{key}", None
    if cfg.has("rates"):
        vals = [cfg.get_float("rates", k) for k in ("gamma11", "gamma22", "gamma12", "omega12")]
        with field("rates"):
            return RateSet.from_normalized(*vals, 1.0), "explicit", None
    if cfg.has("mode"):
        mode = _mode_from_config(cfg)
        d = cfg.get_float("separation", "d_nm", positive=True) * NM
        g12 = cdos(d, mode, mode.purcell)
        r = RateSet.from_normalized(mode.purcell, mode.purcell, g12, 0.0, 1.0)
        return r, "model", effective_beta(d, mode)
    cfg.get_str("rates", "table1", "MD")
    return RateSet.from_normalized(*_table1()["MD"], 1.0), "table1:MD", None


def _d_grid(cfg: RunConfig, a=None, lam=None):
    n = cfg.get_int("scan", "n", 200, minimum=2)
    if cfg.has("scan", "d_min_a") or cfg.has("scan", "d_max_a"):
        if a is None:
            raise ConfigError("scan.d_min_a: lattice units need a lattice constant")
        lo = cfg.get_float("scan", "d_min_a", lo=0.0) * a
        hi = cfg.get_float("scan", "d_max_a", positive=True) * a
    elif cfg.has("scan", "d_min_lambda") or cfg.has("scan", "d_max_lambda"):
        if lam is None:
            raise ConfigError("scan.d_min_lambda: wavelength units need a wavelength")
        lo = cfg.get_float("scan", "d_min_lambda", lo=0.0) * lam
        hi = cfg.get_float("scan", "d_max_lambda", positive=True) * lam
    else:
        lo = cfg.get_float("scan", "d_min_nm", 0.0 if a is None else 5 * a / NM, lo=0.0) * NM
        hi = cfg.get_float("scan", "d_max_nm", (5000.0 if a is None else 20 * a / NM), positive=True) * NM
    if hi <= lo:
        raise ConfigError("scan: d_max must exceed d_min")
    return np.linspace(lo, hi, n)


# ---- commands -------------------------------------------------------------

def cmd_rates(cfg: RunConfig, out: Output):
    """Free-space collective rates versus separation, or echo of an ingested rate set."""
    if cfg.has("rates"):
        r, source, _ = _rates_from_config(cfg)
        out.table(
            "rates",
            ("source", "gamma11", "gamma22", "gamma12", "omega12"),
            [(source, *r.normalized())],
            notes=["rates in units of gamma0"],
        )
        return
    p = cfg.get_float("emitters", "p", positive=True)
    lam = cfg.get_float("emitters", "lambda0_nm", positive=True) * NM
    ori = cfg.get_floats("emitters", "orientation", (0.0, 0.0, 1.0), length=3)
    axis = cfg.get_floats("scan", "direction", (1.0, 0.0, 0.0), length=3)
    axis = np.asarray(axis) / np.linalg.norm(axis)
    ds = _d_grid(cfg, lam=lam)
    if ds[0] <= 0:
        raise ConfigError("scan: free-space scan needs d > 0 (dipole shift diverges at contact)")
    rows = []
    with field("emitters"):
        e1 = EmitterConfig.oriented((0.0, 0.0, 0.0), ori, p, lam)
        for d in ds:
            e2 = EmitterConfig.oriented(tuple(d * axis), ori, p, lam)
            r = free_space_rates(e1, e2)
            n = r.normalized()
            rows.append((d, d / lam, n[2], n[3]))
    out.table(
        "rates",
        ("d_m", "d_over_lambda", "gamma12_over_gamma0", "omega12_over_gamma0"),
        rows,
        notes=[f"gamma0 = {gamma0(p, lam)!r} 1/s"],
    )


def cmd_lattice_coeffs(cfg: RunConfig, out: Output):
    """Cosine coefficients of the lattice Green function with a convergence report."""
    kind = cfg.get_str("lattice", "kind", "ED", choices=("ED", "MD"))
    default_lam = 552.0 if kind == "ED" else 708.9
    a = cfg.get_float("lattice", "a_nm", 400.0, positive=True) * NM
    with field("lattice"):
        params = LatticeParams(
            a=a,
            lambda_bic=cfg.get_float("lattice", "lambda_nm", default_lam, positive=True) * NM,
            z=cfg.get_float("lattice", "z_nm", 104.0, positive=True) * NM,
            x0=cfg.get_float("lattice", "x0_a", 0.0 if kind == "ED" else 0.164) * a,
            l_max=cfg.get_int("lattice", "l_max", 8, minimum=1),
            p_max=cfg.get_int("lattice", "p_max", 64, minimum=1),
        )
    exp = ed_cosine_coefficients(params) if kind == "ED" else md_cosine_coefficients(params)
    inner = exp.meta.get("p_used", exp.meta.get("l_used"))
    notes = [
        f"truncation_delta = {exp.truncation_delta!r}",
        f"summed-order truncation used = {inner}",
        f"terms = {exp.n_terms}",
    ]
    rows = [(n, g, c) for n, (g, c) in enumerate(zip(exp.gamma_raw, exp.c_n))]
    out.table("lattice_coeffs", ("n", "gamma_raw", "c_n"), rows, notes=notes)


def cmd_cdos_model(cfg: RunConfig, out: Output):
    """Single-mode CDOS model and effective beta versus separation."""
    mode = _mode_from_config(cfg, "ed_finite")
    ds = _d_grid(cfg, a=mode.a)
    g12 = cdos(ds, mode, mode.purcell)
    bb = effective_beta(ds, mode)
    ok = in_validity_range(ds, mode)
    rows = list(zip(ds, ds / mode.a, g12, bb, ok))
    out.table(
        "cdos",
        ("d_m", "d_over_a", "gamma12_over_gamma0", "beta_bar", "in_validity_range"),
        rows,
        notes=[f"validity distance = {mode.validity_distance!r} m"],
    )


def cmd_simulate(cfg: RunConfig, out: Output):
    """Dynamics from |e1 g2>: trajectory, concurrence trace and summary."""
    r, source, bbar = _rates_from_config(cfg)
    r.check_bound()
    t_end = cfg.get_float("simulation", "t_end", 1.0, positive=True)
    with field("simulation"):
        grid = SimulationGrid(
            t_end=t_end,
            n_steps=cfg.get_int("simulation", "n_steps", 2000, minimum=2),
            method=cfg.get_str("simulation", "method", "rk45_adaptive"),
            rtol=cfg.get_float("simulation", "rtol", 1e-10, positive=True),
            atol=cfg.get_float("simulation", "atol", 1e-10, positive=True),
        )
    traj = integrate(DickeState.excited_ground(), r, grid)
    trace = ConcurrenceTrace.from_trajectory(traj)
    unit_note = ["time in units of 1/gamma0; rates in units of gamma0", f"rates source: {source}"]
    if out.fmt == "json":
        out.table("trajectory", traj.columns, [(t, *v) for t, v in zip(traj.times, traj.states)], unit_note)
        out.table("concurrence", ("t", "C"), list(zip(trace.times, trace.concurrence)), unit_note)
    else:
        with out._open("trajectory.csv") as fh:
            fh.write(out._header(unit_note))
            traj.write_csv(fh)
        with out._open("concurrence.csv") as fh:
            fh.write(out._header(unit_note))
            trace.write_csv(fh)
    summary = trace.summary(
        beta_bar=bbar,
        purcell=r.gamma11 / r.gamma0,
        rates=dict(zip(("gamma11", "gamma22", "gamma12", "omega12"), r.normalized())),
        source=source,
        method=grid.method,
        max_trace_error=float(np.max(np.abs(traj.trace - 1.0))),
    )
    out.json("summary", summary)


def cmd_sweep(cfg: RunConfig, out: Output):
    """Analytic maximum concurrence and its time over a separation grid."""
    mode = _mode_from_config(cfg, "ed_finite")
    ds = _d_grid(cfg, a=mode.a)
    bb = np.atleast_1d(effective_beta(ds, mode))
    rows = []
    for d, b in zip(ds, bb):
        if b <= 0:
            rows.append((d, d / mode.a, b, 0.0, math.nan, "beta_bar_nonpositive"))
        elif b >= 1:
            rows.append((d, d / mode.a, b, 0.5, math.nan, "beta_bar_saturated"))
        else:
            rows.append((d, d / mode.a, b, c_max_analytic(b), t_max_analytic(b, mode.purcell, 1.0), "ok"))
    out.table(
        "sweep",
        ("d_m", "d_over_a", "beta_bar", "c_max", "t_max_gamma0", "flag"),
        rows,
        notes=["analytic sinh-form maximum; t_max in units of 1/gamma0"],
    )


def _bundled(name):
    path = resources.files("metabic").joinpath("data", name)
    if not path.is_file():
        raise IngestError(f"no bundled dataset named {name!r}")
    return path


def cmd_fit(cfg: RunConfig, out: Output):
    """Fit the CDOS model or a Purcell height profile to tabulated data."""
    kind = cfg.get_str("fit", "kind", "cdos", choices=("cdos", "purcell"))
    if kind == "cdos" and cfg.has("fit", "synthetic"):
        # generate noisy model data from a preset, seeded by --seed
        truth = cfg.get_str("fit", "synthetic", choices=tuple(preset_names()))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            tm = preset(truth)
        ds = _d_grid(cfg, a=tm.a)
        noise = cfg.get_float("fit", "noise", 0.01, lo=0.0)
        series = synthetic_cdos_series(tm, ds, noise, seed=out.seed)
        src = f"synthetic:{truth}"
    else:
        default = "bundled:synthetic_md_cdos.csv" if kind == "cdos" else "bundled:synthetic_md_purcell.csv"
        src = cfg.get_path("fit", "data", default)
        unit = cfg.get_str("fit", "unit", None)
        fmt = cfg.get_str("fit", "format", None, choices=("csv", "json"))
        path = _bundled(src.split(":", 1)[1]) if src.startswith("bundled:") else src
        series = load_series(path, fmt, unit)
    if kind == "cdos":
        mode = _mode_from_config(cfg, "md_finite")
        d_min = cfg.get_float("fit", "d_min_a", mode.validity_distance / mode.a, lo=0.0) * mode.a
        res = fit_cdos(series, mode, d_min=d_min)
        res.params["k_res_per_um"] = res.params["k_res"] * 1e-6
    else:
        a = cfg.get_float("fit", "a_nm", 400.0, positive=True) * NM
        rs = cfg.get_float("fit", "r_sphere_nm", 100.0, positive=True) * NM
        res = fit_purcell(series, a, rs)
    payload = json.loads(res.to_json())
    payload["data"] = src
    out.json("fit", payload)
    if not res.converged:
        print(f"warning: fit did not converge: {res.message}", file=sys.stderr)


def cmd_validity(cfg: RunConfig, out: Output):
    """Weak/strong coupling report for a dipole moment and BIC mode."""
    if cfg.has("validity", "p"):
        p = cfg.get_float("validity", "p", positive=True)
    else:
        p = cfg.get_float("validity", "p_debye", 3.0, positive=True) * DEBYE
    if cfg.has("mode"):
        mode = _mode_from_config(cfg)
        purcell, lam, fwhm = mode.purcell, mode.lambda_bic, mode.fwhm
        if not fwhm > 0:
            raise ConfigError("mode.fwhm_nm: required for the validity check")
    else:
        purcell = cfg.get_float("validity", "purcell", 46.9, positive=True)
        lam = cfg.get_float("validity", "lambda_nm", 552.0, positive=True) * NM
        fwhm = cfg.get_float("validity", "fwhm_nm", 2.0, positive=True) * NM
    rep = regime_report(p, purcell, lam, fwhm)
    out.json("validity", rep.to_dict())


COMMANDS = {
    "rates": cmd_rates,
    "lattice-coeffs": cmd_lattice_coeffs,
    "cdos-model": cmd_cdos_model,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "validity": cmd_validity,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="metabic", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"metabic {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=fn.__doc__.strip().splitlines()[0])
        sp.add_argument("--config", help="INI configuration file")
        sp.add_argument("--out", default=".", help="output directory (default: current)")
        sp.add_argument("--seed", type=int, default=0, help="random seed recorded in outputs")
        sp.add_argument("--format", choices=("csv", "json"), default="csv", help="format of tabular outputs")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
        out = Output(args.out, args.command, cfg, args.format, args.seed)
        COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConvergenceError, DomainError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for path in out.written:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
