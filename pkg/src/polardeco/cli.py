"""Command-line interface: ``polar-deco <command> [options]``.

Commands write CSV files into the output directory (``--out``, else the
``POLARDECO_OUT`` environment variable, else ``output.dir`` from the
config, else ``./polar-deco-out``). Every CSV starts with a provenance
comment line and a header line with units in brackets.

Exit status: 0 on success; 1 when an operation raised; 2 for a bad
config or command line; 3 when a quadrature was flagged unconverged and
``--allow-unconverged`` was not given. With ``validate --strict`` a failed
check also gives 4.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .decoherence import MoleculeSpec, rate_full, rate_leading
from .interferometry import (
    central_visibility,
    measured_pedestal_width,
    pattern_free,
    pattern_with_chamber,
    pedestal_width,
)
from .numerics import UnconvergedWarning, radial_fourier3
from .scattering import cross_sections, sigma_tot_numeric
from .validation import reference_scenario, run_validation

COMMANDS = ("xsec", "rate", "eta", "kicks", "pattern", "validate")
DEFAULT_OUT = "polar-deco-out"


class CommandError(RuntimeError):
    """An operation failed; ``operation`` names it."""

    def __init__(self, operation: str, exc: BaseException):
        self.operation = operation
        super().__init__(f"{operation}: {type(exc).__name__}: {exc}")


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "pass" if v else "fail"
    return format(float(v), ".12g")


def write_csv(path: Path, command: str, cfg_hash: str, header: list[str], rows) -> Path:
    lines = [f"# polar-deco v{__version__}, command={command}, config-hash={cfg_hash}", ", ".join(header)]
    lines += [", ".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _op(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        raise CommandError(name, exc) from exc


# --------------------------------------------------------------------------
# commands


def cmd_xsec(cfg: ScenarioConfig, out: Path, args) -> list[Path]:
    pg = cfg.gas.p_g
    m = cfg.gas.m
    ps = cfg.output.p_over_pg
    if args.grid:
        ps = tuple(np.geomspace(0.25, 4.0, args.grid))
    rows = []
    for f in ps:
        p = f * pg
        b = _op("cross_sections", cross_sections, p, cfg.potential, m)
        num = _op("sigma_tot_numeric", sigma_tot_numeric, p, cfg.potential, m, cfg.numerics)
        rows.append((f, p, b.sigma0, b.sigma_tot_avg, num, b.A, b.theta_star))
    hdr = ["p_over_pg[1]", "p[kg m/s]", "sigma0[m^2]", "sigma_tot_avg[m^2]", "sigma_tot_numeric[m^2]",
           "A[m^2/sr]", "theta_star[rad]"]
    return [write_csv(out / "xsec.csv", "xsec", cfg.config_hash, hdr, rows)]


def cmd_rate(cfg: ScenarioConfig, out: Path, args) -> list[Path]:
    lead = _op("rate_leading", rate_leading, cfg.gas, cfg.potential)
    rows = []
    for v in cfg.output.v_M_list:
        mol = dataclasses.replace(cfg.molecule, v_M=v)
        full = _op("rate_full", rate_full, cfg.gas, cfg.potential, mol)
        rows.append((v, lead, full, full / lead - 1))
    hdr = ["v_M[m/s]", "gamma_leading[1/s]", "gamma_full[1/s]", "relative_shift[1]"]
    return [write_csv(out / "rate.csv", "rate", cfg.config_hash, hdr, rows)]


def cmd_eta(cfg: ScenarioConfig, out: Path, args) -> list[Path]:
    model = _op("DecoherenceModel", cfg.model)
    n = args.grid or cfg.output.R_points
    r = np.linspace(0.0, cfg.output.R_max_over_w, n)
    R = r * model.w_eta
    jobs = max(1, args.jobs)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        f_closed = pool.submit(_op, "eta_closed", model.eta_closed, R)
        f_xi = pool.submit(_op, "eta_xi", model.eta_xi, R, cfg.numerics)
        f_or = pool.submit(_op, "eta_oracle", model.eta_oracle, R)
        ec, ex, eo = f_closed.result(), f_xi.result(), f_or.result()
    rows = zip(r, R, ec, ex, eo)
    hdr = ["R_over_w[1]", "R[m]", "eta_closed[1]", "eta_xi[1]", "eta_oracle[1]"]
    return [write_csv(out / "eta.csv", "eta", cfg.config_hash, hdr, rows)]


def cmd_kicks(cfg: ScenarioConfig, out: Path, args) -> list[Path]:
    model = _op("DecoherenceModel", cfg.model)
    n = args.grid or cfg.output.P_points
    f = np.linspace(0.1, 5.0, n)
    P = f * model.most_probable_kick
    analytic = _op("eta_fourier", model.eta_fourier, P)

    def numeric(p):
        return radial_fourier3(lambda R: model.eta_closed(R), p, cfg.numerics, scale=model.w_eta).value

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        num = list(pool.map(lambda p: _op("radial_fourier3", numeric, p), P))
    rows = zip(f, P, analytic, num)
    hdr = ["P_over_Pmp[1]", "P[kg m/s]", "eta_tilde_analytic[s^3/(kg^3 m^3)]", "eta_tilde_numeric[s^3/(kg^3 m^3)]"]
    return [write_csv(out / "kicks.csv", "kicks", cfg.config_hash, hdr, rows)]


def _pattern_one(conf, cfg_hash, out):
    w0 = _op("pattern_free", pattern_free, conf)
    w = _op("pattern_with_chamber", pattern_with_chamber, conf, w0)
    dI, _ = pedestal_width(conf)
    try:
        measured = measured_pedestal_width(w, w0, conf)
    except ValueError:
        measured = float("nan")
    r = conf.L_c / conf.L
    name = f"pattern_Lc{r:.6g}.csv"
    rows = zip(w0.x / conf.delta_x, w0.x, w0.intensity, w.intensity)
    hdr = ["x_over_dx[1]", "x[m]", "w0[1/m]", "w[1/m]"]
    path = write_csv(out / name, "pattern", cfg_hash, hdr, rows)
    summary = (r, conf.gamma, conf.model.w_eta, conf.delta_x, dI, measured, conf.attenuation,
               w0.norm, w.norm, central_visibility(w, conf.delta_x))
    return path, summary


def cmd_pattern(cfg: ScenarioConfig, out: Path, args) -> list[Path]:
    try:
        confs = cfg.interferometer_configs()
    except ConfigError:
        raise
    except ValueError as exc:
        raise CommandError("InterferometerConfig", exc) from exc
    if args.grid:
        confs = [c.with_grid(c.x_half_width, args.grid) for c in confs]
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda c: _pattern_one(c, cfg.config_hash, out), confs))
    paths = [p for p, _ in results]
    hdr = ["Lc_over_L[1]", "gamma[1/s]", "w_eta[m]", "delta_x[m]", "delta_I_estimate[m]", "delta_I_measured[m]",
           "attenuation[1]", "norm_w0[1]", "norm_w[1]", "visibility[1]"]
    paths.append(write_csv(out / "pattern_summary.csv", "pattern", cfg.config_hash, hdr, [s for _, s in results]))
    return paths


def cmd_validate(cfg: ScenarioConfig, out: Path, args) -> list[Path]:
    checks = run_validation(cfg, cfg.numerics)
    rows = [(c.name, c.value, c.bound, c.passed) for c in checks]
    path = write_csv(out / "validate.csv", "validate", cfg.config_hash,
                     ["name", "value[1]", "bound[1]", "result"], rows)
    for c in checks:
        status = "pass" if c.passed else "FAIL"
        print(f"{status:4s}  {c.name:34s} value={_fmt(c.value):>20s} bound={_fmt(c.bound)}", file=sys.stderr)
    errors = [c for c in checks if c.error]
    if errors:
        raise CommandError("validate", RuntimeError("; ".join(sorted({c.error for c in errors}))))
    for c in checks:
        if c.unconverged:
            warnings.warn(f"validate: check {c.name} used an unconverged quadrature", UnconvergedWarning)
    args._failed_checks = sum(not c.passed for c in checks)
    return [path]


HANDLERS = {
    "xsec": cmd_xsec,
    "rate": cmd_rate,
    "eta": cmd_eta,
    "kicks": cmd_kicks,
    "pattern": cmd_pattern,
    "validate": cmd_validate,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polar-deco",
        description="Cross sections, collisional decoherence and interference patterns for polar molecules.",
    )
    ap.add_argument("--version", action="version", version=f"polar-deco {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON scenario (default: built-in He / 5 D reference scenario)")
    ap.add_argument("--out", help="output directory (overrides POLARDECO_OUT)")
    ap.add_argument("--tol", type=float, help="relative quadrature tolerance")
    ap.add_argument("--grid", type=int, help="number of grid points for the command's main axis")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads; results do not depend on it")
    ap.add_argument("--allow-unconverged", action="store_true",
                    help="report unconverged quadratures as warnings instead of failing")
    ap.add_argument("--strict", action="store_true", help="validate: exit 4 if any check fails")
    return ap


def _resolve_out(args, cfg: ScenarioConfig) -> Path:
    out = args.out or os.environ.get("POLARDECO_OUT") or cfg.output.directory or DEFAULT_OUT
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        ap.error("--tol must be positive")
    if args.grid is not None and args.grid < 2:
        ap.error("--grid must be >= 2")
    if args.jobs < 1:
        ap.error("--jobs must be >= 1")

    try:
        cfg = load_config(args.config) if args.config else reference_scenario()
    except (ConfigError, OSError) as exc:
        print(f"polar-deco: config error: {exc}", file=sys.stderr)
        return 2
    if args.tol is not None:
        cfg = dataclasses.replace(cfg, numerics=dataclasses.replace(cfg.numerics, rel_tol=args.tol))

    try:
        out = _resolve_out(args, cfg)
    except OSError as exc:
        print(f"polar-deco: cannot create output directory: {exc}", file=sys.stderr)
        return 2

    args._failed_checks = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", UnconvergedWarning)
        try:
            paths = HANDLERS[args.command](cfg, out, args)
        except ConfigError as exc:
            print(f"polar-deco: config error: {exc}", file=sys.stderr)
            return 2
        except CommandError as exc:
            print(f"polar-deco: error in {exc}", file=sys.stderr)
            return 1
    unconverged = [w for w in caught if issubclass(w.category, UnconvergedWarning)]
    for w in caught:
        print(f"polar-deco: warning: {w.message}", file=sys.stderr)
    for p in paths:
        print(p)
    if unconverged and not args.allow_unconverged:
        print(f"polar-deco: {len(unconverged)} unconverged quadrature(s); "
              "rerun with --allow-unconverged to accept", file=sys.stderr)
        return 3
    if args.strict and args._failed_checks:
        return 4
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
