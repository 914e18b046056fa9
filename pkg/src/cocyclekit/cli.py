"""Command-line front end.

Every subcommand reads defaults, then an optional TOML config (top-level keys
plus a ``[subcommand]`` table), then command-line flags; later sources win.
Results are written as CSV (17 significant digits) into ``--out`` together
with a JSON sidecar recording the resolved configuration, package versions
and tolerances.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 search finished without a result.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CocycleError

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

log = logging.getLogger("cocyclekit")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_NOT_FOUND = 0, 2, 3, 4


class ConfigError(Exception):
    pass


class NotFound(Exception):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


# ----------------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------------

COMMON = {
    "seed": 0,
    "threads": None,
    "out": ".",
    "tag": "SpR",
    "d": 1,
    "base": "periodic",
    "period": 4,
    "family": "random",
    "scale": 0.5,
    "generators": None,
    "energy": 0.0,
    "v": "zero",
    "coupling": 1.0,
    "symbols": 2,
    "alpha": 0.6180339887498949,
    "n": 10_000,
    "samples": 8,
}

COMMANDS = {
    "lyapunov": {},
    "rotation": {"sigma_min": -np.pi, "sigma_max": np.pi, "points": 200, "t": 0.0, "deform": "auto",
                 "anchor_t": 5.0},
    "mfield": {"z": "0.3+0.1j", "side": "plus", "tol": 1e-12},
    "kotani-check": {"sigma": 0.3, "t_list": [0.05, 0.1, 0.2]},
    "theorem5": {"sigma": None, "t_list": [0.2, 0.1, 0.05, 0.02], "threshold": 1e-3},
    "bands": {"theta_min": -np.pi, "theta_max": np.pi, "grid": None, "tol_unit": 1e-8, "tol_sep": 1e-6},
    "strip-scan": {"range": [-3.0, 3.0], "grid": 601, "threshold": 1e-3},
    "phi-eps": {"eps": 0.1, "eta": 0.05, "nodes": 33},
    "density-search": {"delta": 0.5, "eta": 0.05, "trials": 100},
    "verify": {},
}

ALIASES = {"theorem5": ["boundary-gap"]}
CANONICAL = {alias: name for name, names in ALIASES.items() for alias in names}

HELP = {
    "lyapunov": "Lyapunov spectrum of a cocycle",
    "rotation": "rotation function rho and L^d along a sigma grid",
    "mfield": "m+ or m- field at one parameter",
    "kotani-check": "tau/q identities and the key equation",
    "theorem5": "boundary behaviour of m+ and m- as t -> 0",
    "bands": "simple unimodular bands of R(theta) A",
    "strip-scan": "zero-exponent measure of a strip operator over an energy range",
    "phi-eps": "regularised exponent average Phi_eps",
    "density-search": "small perturbation with a positive exponent",
    "verify": "run the invariant suite",
}


def _positive_checks(cfg):
    if int(cfg["d"]) < 1:
        raise ConfigError("field 'd': must be at least 1")
    for key in ("tol", "tol_unit", "tol_sep", "threshold", "eps", "eta", "delta", "scale"):
        if key in cfg and cfg[key] is not None and not float(cfg[key]) > 0:
            raise ConfigError(f"field '{key}': must be positive")
    for key in ("n", "samples", "period", "points", "trials", "nodes", "symbols"):
        if key in cfg and cfg[key] is not None and int(cfg[key]) < 1:
            raise ConfigError(f"field '{key}': must be a positive integer")
    for key in ("generators",):
        if cfg.get(key) and not Path(cfg[key]).exists():
            raise ConfigError(f"field '{key}': file {cfg[key]} does not exist")
    v = cfg.get("v")
    if v not in ("zero", "random", "decoupled") and not Path(str(v)).exists():
        raise ConfigError(f"field 'v': expected zero, random, decoupled or an existing file, got {v!r}")


def load_config(path, command):
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    known = set(COMMON) | set().union(*(COMMANDS[c].keys() for c in COMMANDS))
    out = {}
    for key, value in data.items():
        if isinstance(value, dict):
            if key not in COMMANDS:
                raise ConfigError(f"{path}: unknown section [{key}]")
            if key != command:
                continue
            for k, v in value.items():
                k2 = k.replace("-", "_")
                if k2 not in COMMON and k2 not in COMMANDS[command]:
                    raise ConfigError(f"{path}: unknown field '{k}' in section [{key}]")
                out[k2] = v
        else:
            k2 = key.replace("-", "_")
            if k2 not in known:
                raise ConfigError(f"{path}: unknown field '{key}'")
            out.setdefault(k2, value)
    return out


def resolve(command, args):
    cfg = dict(COMMON)
    cfg.update(COMMANDS[command])
    if args.config:
        fromfile = load_config(args.config, command)
        cfg.update({k: v for k, v in fromfile.items() if k in cfg})
    for key, value in vars(args).items():
        if key in cfg and value is not None:
            cfg[key] = value
    _positive_checks(cfg)
    return cfg


# ----------------------------------------------------------------------------
# building cocycles
# ----------------------------------------------------------------------------

def _load_generators(path):
    """Stack of generators from .npy or JSON (complex entries as [re, im] pairs)."""
    path = Path(path)
    if path.suffix == ".npy":
        return np.load(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    mats = np.asarray(data["matrices"] if isinstance(data, dict) else data, dtype=float)
    if mats.ndim == 4 and mats.shape[-1] == 2:
        mats = mats[..., 0] + 1j * mats[..., 1]
    return mats


def _potential(cfg, rng, count):
    from .strip import StripPotential, load_potential

    d = int(cfg["d"])
    v = cfg["v"]
    if v == "zero":
        return StripPotential("real_symmetric", np.zeros((count, d, d)))
    if v == "decoupled":
        return StripPotential("real_symmetric", np.broadcast_to(np.diag(np.linspace(-0.5, 0.5, d)), (count, d, d)))
    if v == "random":
        X = rng.uniform(-1, 1, size=(count, d, d))
        return StripPotential("real_symmetric", float(cfg["coupling"]) * (X + np.swapaxes(X, 1, 2)) / 2)
    return load_potential(v)


def _base(cfg, count):
    from .cocycle import FiniteShift, Periodic, TorusRotation

    kind = cfg["base"]
    if kind == "periodic":
        return Periodic(count)
    if kind == "shift":
        return FiniteShift(tuple(np.full(count, 1.0 / count)), span=int(cfg["n"]))
    if kind == "torus":
        return TorusRotation(float(cfg["alpha"]))
    raise ConfigError(f"field 'base': unknown base {kind!r}")


def build_schrodinger(cfg, rng):
    """(potential, base) for the strip-operator commands."""
    from .strip import StripPotential

    d = int(cfg["d"])
    if cfg["base"] == "torus":
        lam = float(cfg["coupling"])
        v = StripPotential("real_symmetric", lambda x: 2 * lam * np.cos(2 * np.pi * np.asarray(x)[0]) * np.eye(d))
        return v, _base(cfg, None)
    count = int(cfg["symbols"]) if cfg["base"] == "shift" else int(cfg["period"])
    v = _potential(cfg, rng, count)
    if cfg["base"] == "periodic":
        count = len(v.matrices())
    return v, _base(cfg, count)


def build_cocycle(cfg, rng):
    from .cocycle import Cocycle
    from .groups import GroupTag, random_group_element
    from .strip import transfer_cocycle

    d, tag = int(cfg["d"]), GroupTag(cfg["tag"])
    fam = cfg["family"]
    if fam == "schrodinger":
        v, base = build_schrodinger(cfg, rng)
        return transfer_cocycle(v, float(cfg["energy"]), base, d=d)
    if cfg["generators"]:
        mats = _load_generators(cfg["generators"])
    elif fam == "random":
        count = int(cfg["symbols"]) if cfg["base"] == "shift" else int(cfg["period"])
        mats = random_group_element(d, tag, rng, scale=float(cfg["scale"]), size=count)
    elif fam == "identity":
        mats = np.broadcast_to(np.eye(2 * d), (int(cfg["period"]), 2 * d, 2 * d))
    else:
        raise ConfigError(f"field 'family': unknown family {fam!r}")
    if cfg["base"] == "shift":
        k = len(mats)
        return Cocycle.shift(mats, np.full(k, 1.0 / k), tag, span=int(cfg["n"]))
    if cfg["base"] != "periodic":
        raise ConfigError("field 'base': generator tables need a periodic or shift base")
    return Cocycle.periodic(mats, tag)


def build_family(cfg, rng, deform="auto"):
    from .families import RotationFamily
    from .strip import energy_family

    if deform == "auto":
        deform = "energy" if cfg["family"] == "schrodinger" else "rotation"
    if deform == "energy":
        if cfg["family"] != "schrodinger":
            raise ConfigError("field 'deform': the energy deformation needs family = schrodinger")
        v, base = build_schrodinger(cfg, rng)
        return energy_family(v, base, d=int(cfg["d"]))
    return RotationFamily(build_cocycle(cfg, rng))


# ----------------------------------------------------------------------------
# output
# ----------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return str(x)


def write_sidecar(out, command, cfg, outputs, extra=None):
    import scipy

    from .groups import TOL_GROUP
    from .siegel import COND_CAP

    data = {
        "command": command,
        "config": cfg,
        "outputs": [str(p) for p in outputs],
        "versions": {"cocyclekit": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "tolerances": {"group": TOL_GROUP, "mobius_cond_cap": COND_CAP},
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    if extra:
        data["results"] = extra
    path = Path(out) / f"{command.replace('-', '_')}.json"
    path.write_text(json.dumps(data, indent=2, default=_jsonable))
    return path


# ----------------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------------

def cmd_lyapunov(cfg, rng, out):
    from .cocycle import lyapunov_spectrum

    A = build_cocycle(cfg, rng)
    rep = lyapunov_spectrum(A, n=int(cfg["n"]), samples=int(cfg["samples"]), rng=rng)
    path = write_csv(out / "lyapunov.csv", ["index", "exponent"], enumerate(rep.exponents, 1))
    return [path], {"Ld": rep.Lk(A.d), "top": rep.top}


def cmd_rotation(cfg, rng, out):
    from .rotation import rotation_function

    fam = build_family(cfg, rng, cfg["deform"])
    sig = np.linspace(float(cfg["sigma_min"]), float(cfg["sigma_max"]), int(cfg["points"]))
    targets = sig + 1j * float(cfg["t"])
    vals = rotation_function(fam, targets, n=int(cfg["n"]), samples=int(cfg["samples"]), rng=rng,
                             anchor_T=float(cfg["anchor_t"]), sigma_ref=float(sig[0]), lyapunov=False)
    rows = [(z.z.real, z.z.imag, z.rho, z.rho_stderr, z.Ld_tau) for z in vals]
    path = write_csv(out / "rotation.csv", ["sigma", "t", "rho", "rho_stderr", "Ld_tau"], rows)
    return [path], None


def _parse_complex(s):
    try:
        return complex(str(s).replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ConfigError(f"field 'z': cannot parse {s!r} as a complex number") from None


def cmd_mfield(cfg, rng, out):
    from .kotani import m_minus, m_plus

    fam = build_family(cfg, rng)
    z = _parse_complex(cfg["z"])
    fn = m_plus if cfg["side"] == "plus" else m_minus
    field = fn(fam, z, samples=int(cfg["samples"]), rng=rng, tol=float(cfg["tol"]))
    d = fam.d
    header = ["point"] + [f"{part}_{i}{j}" for i in range(d) for j in range(d) for part in ("re", "im")]
    rows = []
    for k, m in enumerate(field.values):
        row = [k]
        for e in np.asarray(m).ravel():
            row += [e.real, e.imag]
        rows.append(row)
    path = write_csv(out / "mfield.csv", header, rows)
    return [path], {"invariance_residual": field.invariance_residual(), "max_norm": field.max_norm()}


def cmd_kotani_check(cfg, rng, out):
    from .families import RotationFamily
    from .kotani import key_equation_check, ld_identities_check

    fam = build_family(cfg, rng)
    rows = []
    for t in cfg["t_list"]:
        z = float(cfg["sigma"]) + 1j * float(t)
        r1, r2 = ld_identities_check(fam, z, n=int(cfg["n"]), samples=int(cfg["samples"]), rng=rng)
        key = key_equation_check(fam, float(cfg["sigma"]), float(t), n=int(cfg["n"]), samples=int(cfg["samples"]),
                                 rng=rng) if isinstance(fam, RotationFamily) else float("nan")
        rows.append((float(t), r1, r2, key))
    path = write_csv(out / "kotani_check.csv", ["t", "ld_tau_residual", "ld_q_residual", "key_equation_residual"], rows)
    return [path], None


def cmd_boundary_gap(cfg, rng, out):
    from .kotani import boundary_gap_diagnostics

    fam = build_family(cfg, rng)
    sigma = cfg["sigma"]
    if sigma is None:
        sigma = float(cfg["energy"]) if cfg["family"] == "schrodinger" else 0.0
    rows, flags = boundary_gap_diagnostics(fam, float(sigma), cfg["t_list"], n=int(cfg["n"]),
                                           samples=int(cfg["samples"]), rng=rng, threshold=float(cfg["threshold"]))
    path = write_csv(out / "boundary_gap.csv", ["t", "I_plus", "I_minus", "D", "Ld_over_t", "dLd_dt", "converged"],
                     [(r.t, r.I_plus, r.I_minus, r.D, r.Ld_over_t, r.dLd_dt, r.converged) for r in rows])
    return [path], flags


def cmd_bands(cfg, rng, out):
    from .bands import band_scan

    A = build_cocycle(cfg, rng)
    rep = band_scan(A, (float(cfg["theta_min"]), float(cfg["theta_max"])),
                    grid=None if cfg["grid"] is None else int(cfg["grid"]),
                    tol_unit=float(cfg["tol_unit"]), tol_sep=float(cfg["tol_sep"]))
    path = write_csv(out / "bands.csv", ["a", "b", "length", "bound_ok"],
                     [(b.a, b.b, b.length, b.bound_ok) for b in rep.bands])
    report = out / "bands_report.json"
    report.write_text(rep.to_json())
    return [path, report], {"max_length": rep.max_length, "bound": rep.bound, "bound_ok": rep.bound_ok}


def cmd_strip_scan(cfg, rng, out):
    from .strip import energy_scan

    v, base = build_schrodinger(cfg, rng)
    lo, hi = map(float, cfg["range"])
    scan = energy_scan(v, base, (lo, hi), grid=int(cfg["grid"]), n=int(cfg["n"]), samples=int(cfg["samples"]),
                       L_threshold=float(cfg["threshold"]), rng=rng, workers=int(cfg["threads"] or 1),
                       d=int(cfg["d"]))
    p1 = write_csv(out / "strip_scan.csv", ["E", "top", "Ld_over_d", "zero_top", "zero_d"],
                   zip(scan.E, scan.top, scan.Ld_th, scan.zero, scan.zero_d))
    p2 = write_csv(out / "strip_scan_measure.csv", ["quantity", "zero_measure", "error"],
                   [("top", scan.M, scan.M_err), ("dth", scan.M_d, scan.M_d_err)])
    return [p1, p2], {"M": scan.M, "M_err": scan.M_err, "M_d": scan.M_d, "M_d_err": scan.M_d_err}


def _pair(cfg, rng, A):
    from .groups import GroupTag, random_algebra_element, symplectic_form
    from .perturbation import PerturbationPair

    k = len(A.matrices)
    a = random_algebra_element(A.d, GroupTag.SpR, rng, size=k)
    a *= float(cfg["eta"]) * 0.9 / np.max(np.linalg.norm(a, 2, axis=(-2, -1)))
    return PerturbationPair(a, symplectic_form(A.d), float(cfg["eps"]), float(cfg["eta"]))


def cmd_phi_eps(cfg, rng, out):
    from .perturbation import phi_epsilon, phi_weight

    A = build_cocycle(cfg, rng)
    pair = _pair(cfg, rng, A)
    phi, t, gamma = phi_epsilon(A, pair, nodes=int(cfg["nodes"]), n=int(cfg["n"]), samples=int(cfg["samples"]),
                                rng=rng, return_nodes=True)
    path = write_csv(out / "phi_eps.csv", ["t", "weight", "Ld"], zip(t, phi_weight(t), gamma))
    return [path], {"phi": phi, "t0_node": float(gamma[len(t) // 2])}


def cmd_density_search(cfg, rng, out):
    from .perturbation import density_search

    A = build_cocycle(cfg, rng)
    res = density_search(A, float(cfg["delta"]), eta=float(cfg["eta"]), trials=int(cfg["trials"]), rng=rng,
                         n=int(cfg["n"]), samples=int(cfg["samples"]))
    diag = {k: v for k, v in res.diagnostics.items() if k != "phi_values"}
    if not res.found:
        raise NotFound(f"no perturbation found in {res.trials} trials", diag)
    v = np.asarray(res.v)
    rows = [(k, i, j, v[k, i, j]) for k in range(v.shape[0]) for i in range(v.shape[1]) for j in range(v.shape[2])]
    path = write_csv(out / "density_search.csv", ["site", "row", "col", "v"], rows)
    return [path], {"Ld": res.Ld, "norm": res.norm, "trials": res.trials, **diag}


def cmd_verify(cfg, rng, out):
    from .verify import run_suite

    results = run_suite(int(cfg["d"]), int(cfg["seed"]))
    path = write_csv(out / "verify.csv", ["check", "residual", "tolerance", "passed"],
                     [(r.name, r.residual, r.tolerance, r.passed) for r in results])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} residual={r.residual:.3g} tol={r.tolerance:.3g}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise CocycleError("invariant checks failed: " + ", ".join(failed))
    return [path], {"passed": len(results)}


HANDLERS = {
    "lyapunov": cmd_lyapunov,
    "rotation": cmd_rotation,
    "mfield": cmd_mfield,
    "kotani-check": cmd_kotani_check,
    "theorem5": cmd_boundary_gap,
    "bands": cmd_bands,
    "strip-scan": cmd_strip_scan,
    "phi-eps": cmd_phi_eps,
    "density-search": cmd_density_search,
    "verify": cmd_verify,
}


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------

def _common_flags(p):
    g = p.add_argument_group("common options")
    g.add_argument("--config", help="TOML config file (flags override it)")
    g.add_argument("--seed", type=int, help="random seed (default 0)")
    g.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    g.add_argument("--out", help="output directory (default .)")
    g.add_argument("--tag", choices=["SpR", "SpC", "UddCapSpC", "HSp", "SHSp", "Udd", "SUdd"])
    g.add_argument("--d", type=int, help="half dimension / strip width")
    g.add_argument("--base", choices=["periodic", "shift", "torus"])
    g.add_argument("--period", type=int, help="period of a periodic base")
    g.add_argument("--family", choices=["random", "identity", "schrodinger"],
                   help="builtin cocycle (ignored when --generators is given)")
    g.add_argument("--scale", type=float, help="spread of random generators")
    g.add_argument("--generators", help="generator table (.npy or JSON list of matrices)")
    g.add_argument("--energy", type=float, help="energy for schrodinger cocycles")
    g.add_argument("--v", help="potential: zero, random, decoupled or a CSV/JSON file")
    g.add_argument("--coupling", type=float, help="potential amplitude")
    g.add_argument("--symbols", type=int, help="number of symbols of a shift base")
    g.add_argument("--alpha", type=float, help="frequency of a torus base")
    g.add_argument("--n", type=int, help="orbit length for ergodic averages")
    g.add_argument("--samples", type=int, help="base points averaged")


def _float_list(s):
    return [float(x) for x in s.split(",") if x.strip()]


def build_parser():
    parser = argparse.ArgumentParser(prog="cocyclekit", description="Numerical Kotani theory for symplectic cocycles.",
                                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"cocyclekit {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {name: sub.add_parser(name, help=HELP[name], description=HELP[name], allow_abbrev=False,
                                 aliases=ALIASES.get(name, [])) for name in COMMANDS}
    for p in subs.values():
        _common_flags(p)
    p = subs["rotation"]
    p.add_argument("--sigma-min", type=float)
    p.add_argument("--sigma-max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--t", type=float, help="height Im z >= 0 of the grid")
    p.add_argument("--deform", choices=["auto", "rotation", "energy"])
    p.add_argument("--anchor-t", type=float)
    p = subs["mfield"]
    p.add_argument("--z", help="complex parameter, e.g. 0.3+0.1j")
    p.add_argument("--side", choices=["plus", "minus"])
    p.add_argument("--tol", type=float)
    p = subs["kotani-check"]
    p.add_argument("--sigma", type=float)
    p.add_argument("--t-list", type=_float_list, help="comma separated heights")
    p = subs["theorem5"]
    p.add_argument("--sigma", type=float, help="real parameter (defaults to --energy for schrodinger)")
    p.add_argument("--t-list", type=_float_list)
    p.add_argument("--threshold", type=float)
    p = subs["bands"]
    p.add_argument("--theta-min", type=float)
    p.add_argument("--theta-max", type=float)
    p.add_argument("--grid", type=int)
    p.add_argument("--tol-unit", type=float)
    p.add_argument("--tol-sep", type=float)
    p = subs["strip-scan"]
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--grid", type=int)
    p.add_argument("--threshold", type=float, help="exponents below this count as zero")
    p = subs["phi-eps"]
    p.add_argument("--eps", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--nodes", type=int)
    p = subs["density-search"]
    p.add_argument("--delta", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--trials", type=int)
    return parser


def run(command, cfg):
    """Execute one subcommand with a resolved config; returns the written paths."""
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(int(cfg["seed"]))
    paths, extra = HANDLERS[command](cfg, rng, out)
    paths.append(write_sidecar(out, command, cfg, paths, extra))
    return paths


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.command = CANONICAL.get(args.command, args.command)
        cfg = resolve(args.command, args)
        if cfg["threads"] is None:
            cfg["threads"] = os.cpu_count() or 1
        paths = run(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NotFound as exc:
        print(f"not found: {exc}", file=sys.stderr)
        for k, v in exc.diagnostics.items():
            print(f"  {k}: {v}", file=sys.stderr)
        return EXIT_NOT_FOUND
    except (CocycleError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
