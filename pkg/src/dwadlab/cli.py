"""Command-line entry point: ``dwadlab <subcommand> ...``.

Subcommands
-----------
kernel-check  moment report of a product kernel
estimate      fit the estimator on a CSV file with header y,x1,...,xd
truth         population functionals of a preset design
edgeworth     evaluate the expansions on a grid from a key = value file
simulate      run a Monte Carlo cell from a key = value file

Exit codes are 0 on success, 2 for configuration errors, 3 for data errors,
4 for numerical failures and 5 for assumption violations.
"""

import argparse
import csv
import dataclasses
import io
import math
import os
import sys
import tempfile

import numpy as np

from . import dgp as dgp_mod, edgeworth, simlab
from .errors import ConfigurationError, DataError, DwadError
from .estimator import AL, SB, Sample, confidence_interval, estimate
from .kernel import make_higher_order_kernel, verify_moments


# ---------------------------------------------------------------------------
# formatting and output
# ---------------------------------------------------------------------------

def format_value(value):
    """Fixed formatting: 17 significant digits for floats, lowercase booleans."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(row[k]) if isinstance(row, dict) else format_value(k)
                         for k in (header if isinstance(row, dict) else row)])
    return buf.getvalue()


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".csv")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def read_config(path):
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc.strerror}") from None
    out = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigurationError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _apply_overrides(config, overrides):
    for item in overrides or ():
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        config[key] = value
    return config


def _float(value, name):
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    return out


def _int(value, name):
    try:
        out = int(str(value).strip())
    except ValueError:
        raise ConfigurationError(f"{name} must be an integer, got {value!r}") from None
    return out


def _bool(value, name):
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{name} must be true or false, got {value!r}")


def _vector(value, name):
    parts = [p for p in str(value).replace(" ", ",").split(",") if p]
    if not parts:
        raise ConfigurationError(f"{name} must be a comma-separated list of numbers")
    return tuple(_float(p, name) for p in parts)


def _positive_int(value, name):
    if value is None or value < 1:
        raise ConfigurationError(f"--{name} must be a positive integer, got {value}")
    return value


def read_data(path, dim):
    """Read a CSV with header ``y,x1,...,xd`` into a :class:`Sample`."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read data file {path}: {exc.strerror}") from None
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    expected = ["y"] + [f"x{j}" for j in range(1, dim + 1)]
    if header != expected:
        raise DataError(f"{path}: header must be {','.join(expected)}, got {','.join(header)}")
    values = []
    for lineno, row in enumerate(rows[1:], 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(expected):
            raise DataError(f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}")
        try:
            values.append([float(c) for c in row])
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric field in {row}") from None
    if not values:
        raise DataError(f"{path}: no observations")
    arr = np.asarray(values)
    return Sample(arr[:, 0], arr[:, 1:])


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_kernel_check(args):
    kernel = make_higher_order_kernel(_positive_int(args.dim, "dim"), args.order)
    if not args.tol > 0:
        raise ConfigurationError(f"--tol must be positive, got {args.tol}")
    report = verify_moments(kernel, tol=args.tol)
    rows = [{"multi_index": str(r.index), "value": r.value, "target": r.target,
             "abs_error": r.abs_error, "pass": r.passed} for r in report.rows]
    _emit(render_csv(["multi_index", "value", "target", "abs_error", "pass"], rows), args.out)
    if not report.all_pass:
        failed = ", ".join(str(r.index) for r in report.failures()) or "absolute integrability"
        print(f"assumption-violation: kernel moment checks failed at {failed}", file=sys.stderr)
        return 5
    return 0


def cmd_estimate(args):
    d = _positive_int(args.dim, "dim")
    if not 0 < args.alpha < 1:
        raise ConfigurationError(f"--alpha must lie in (0, 1), got {args.alpha}")
    if not args.bandwidth > 0:
        raise ConfigurationError(f"--bandwidth must be positive, got {args.bandwidth}")
    if args.direction:
        directions = [np.asarray(_vector(args.direction, "--direction"))]
        if directions[0].shape != (d,):
            raise ConfigurationError(f"--direction needs {d} components")
    else:
        directions = list(np.eye(d))
    kernel = make_higher_order_kernel(d, args.order)
    sample = read_data(args.data, d)
    fit = estimate(sample, kernel, args.bandwidth)
    rows = []
    for v in directions:
        ci_al = confidence_interval(fit, v, args.alpha, AL)
        ci_sb = confidence_interval(fit, v, args.alpha, SB)
        c = ci_al.half_width / math.sqrt(v @ fit.v_al @ v)
        rows.append({
            "direction": " ".join(format_value(x) for x in v),
            "estimate": ci_al.center,
            "se_al": ci_al.half_width / c, "se_sb": ci_sb.half_width / c,
            "ci_al_lo": ci_al.lower, "ci_al_hi": ci_al.upper,
            "ci_sb_lo": ci_sb.lower, "ci_sb_hi": ci_sb.upper,
        })
    header = ["direction", "estimate", "se_al", "se_sb", "ci_al_lo", "ci_al_hi", "ci_sb_lo", "ci_sb_hi"]
    _emit(render_csv(header, rows), args.out)
    return 0


def cmd_truth(args):
    d = _positive_int(args.dim, "dim")
    v = np.ones(d) if not args.direction else np.asarray(_vector(args.direction, "--direction"))
    model = dgp_mod.DgpSpec(args.dgp, d, noise_sd=args.noise_sd, heteroskedastic=args.heteroskedastic)
    kernel = make_higher_order_kernel(d, args.order)
    pf = dgp_mod.population_functionals(model, kernel, v, h0=args.h0)
    rows = [(f"theta_{j + 1}", pf.theta[j]) for j in range(d)]
    rows += [(f"Sigma_{i + 1}{j + 1}", pf.Sigma[i, j]) for i in range(d) for j in range(d)]
    rows += [(f"Delta_{i + 1}{j + 1}", pf.Delta[i, j]) for i in range(d) for j in range(d)]
    rows += [("theta_v", pf.theta_v), ("sigma_v2", pf.sigma_v2), ("delta_v2", pf.delta_v2),
             ("beta_v", pf.beta_v), ("kappa1_v", pf.kappa1_v), ("kappa2_v", pf.kappa2_v),
             ("kappa2_ustat", pf.kappa2_ustat)]
    if args.n is not None and args.bandwidth is not None:
        rows.append(("omega_v2", pf.omega_v2(args.n, args.bandwidth)))
    diag = pf.diagnostics
    rows += [("diag_theta_ibp_gap", diag["theta_ibp_gap"]),
             ("diag_kappa2_limit_route", diag["kappa2_limit_route"] * 6.0),
             ("diag_kappa2_route_gap", diag["kappa2_route_gap"] * 6.0),
             ("diag_kappa2_extrapolation_spread", diag["kappa2_extrapolation_spread"])]
    rows += [(f"diag_kappa2_finite_h_{h:g}", 6.0 * val)
             for h, val in zip(diag["kappa2_bandwidths"], diag["kappa2_finite_h"])]
    report = dgp_mod.assumption_checklist(model)
    rows += [(f"assumption_{c.code}", c.passed) for c in report.checks]
    _emit(render_csv(["quantity", "value"], rows), args.out)
    return 0


_EDGEWORTH_KEYS = ("n", "h", "d", "P", "sigma_v", "delta_v2", "beta_v", "kappa1_v", "kappa2_v")


def cmd_edgeworth(args):
    cfg = _apply_overrides(read_config(args.config), args.set)
    missing = [k for k in _EDGEWORTH_KEYS if k not in cfg]
    if missing:
        raise ConfigurationError(f"edgeworth config is missing keys: {', '.join(missing)}")
    known = set(_EDGEWORTH_KEYS) | {"vartheta_ratio", "grid_min", "grid_max", "grid_points"}
    unknown = sorted(set(cfg) - known)
    if unknown:
        raise ConfigurationError(f"unknown edgeworth config keys: {', '.join(unknown)}")
    inputs = edgeworth.DwadExpansionInputs(
        n=_int(cfg["n"], "n"), h=_float(cfg["h"], "h"), d=_int(cfg["d"], "d"), P=_int(cfg["P"], "P"),
        sigma_v=_float(cfg["sigma_v"], "sigma_v"), delta_v2=_float(cfg["delta_v2"], "delta_v2"),
        beta_v=_float(cfg["beta_v"], "beta_v"), kappa1_v=_float(cfg["kappa1_v"], "kappa1_v"),
        kappa2_v=_float(cfg["kappa2_v"], "kappa2_v"),
        vartheta_ratio=_float(cfg.get("vartheta_ratio", 1.0), "vartheta_ratio"),
    )
    lo = _float(cfg.get("grid_min", -4.0), "grid_min")
    hi = _float(cfg.get("grid_max", 4.0), "grid_max")
    m = _int(cfg.get("grid_points", 81), "grid_points")
    if m < 2 or not hi > lo:
        raise ConfigurationError("grid needs grid_points >= 2 and grid_max > grid_min")
    x = np.linspace(lo, hi, m)
    cols = [x, edgeworth.norm_cdf(x), edgeworth.std_expansion(inputs, x),
            edgeworth.studentized_al(inputs, x), edgeworth.studentized_sb(inputs, x)]
    _emit(render_csv(["x", "Phi", "G", "G_AL", "G_SB"], zip(*cols)), args.out)
    return 0


_SIM_CONVERTERS = {
    "seed": _int, "dgp": lambda v, n: v, "dim": _int, "order": _int, "n": _int,
    "bandwidth": _float, "bandwidth_c": _float, "bandwidth_gamma": _float,
    "direction": _vector, "alphas": _vector, "replications": _int,
    "schemes": lambda v, n: tuple(s for s in str(v).replace(" ", ",").split(",") if s),
    "noise_sd": _float, "heteroskedastic": _bool,
    "grid_min": _float, "grid_max": _float, "grid_points": _int,
}
_SIM_EXTRA = {"bootstrap_draws": _int, "bootstrap_outer": _int}


def parse_experiment(cfg):
    """Build an :class:`ExperimentConfig` (and bootstrap settings) from string pairs."""
    unknown = sorted(set(cfg) - set(_SIM_CONVERTERS) - set(_SIM_EXTRA))
    if unknown:
        raise ConfigurationError(f"unknown simulate config keys: {', '.join(unknown)}")
    if "seed" not in cfg:
        raise ConfigurationError("simulate requires a seed (--seed or 'seed = ...' in the config)")
    kwargs = {k: _SIM_CONVERTERS[k](v, k) for k, v in cfg.items() if k in _SIM_CONVERTERS}
    extra = {k: _SIM_EXTRA[k](v, k) for k, v in cfg.items() if k in _SIM_EXTRA}
    return simlab.ExperimentConfig(**kwargs), extra


def cmd_simulate(args):
    cfg = _apply_overrides(read_config(args.config), args.set)
    if args.seed is not None:
        cfg["seed"] = str(args.seed)
    config, extra = parse_experiment(cfg)
    threads = simlab.resolve_threads(args.threads)
    result = simlab.run_experiment(config, threads=threads)

    table = simlab.edgeworth_comparison_table(result)
    header = ["scheme", "alpha", "n", "h", "KS_to_Phi", "KS_to_expansion", "coverage_emp",
              "coverage_se", "coverage_pred", "r_n", "excluded"]
    for row in table:
        sr = result[row["scheme"]]
        row["coverage_se"] = sr.coverage_at(row["alpha"]).se
        row["excluded"] = sr.excluded

    names = list(result.schemes)
    grid_rows = []
    for i, x in enumerate(result.grid):
        row = [x, float(edgeworth.norm_cdf(x))]
        for name in names:
            row += [result[name].ecdf[i], result[name].expansion[i]]
        grid_rows.append(row)
    grid_header = ["x", "Phi"] + [f"{p}_{name}" for name in names for p in ("ecdf", "expansion")]

    diag = [(k, result.diagnostics[k]) for k in sorted(result.diagnostics)]
    if extra.get("bootstrap_draws"):
        rep = simlab.bootstrap_diagnostic(config, extra["bootstrap_draws"],
                                          extra.get("bootstrap_outer", 50), threads=threads)
        diag += [(f"bootstrap_{f.name}", getattr(rep, f.name)) for f in dataclasses.fields(rep)]
        diag.append(("bootstrap_unstable", rep.unstable))

    out = args.out
    os.makedirs(out, exist_ok=True)
    write_atomic(os.path.join(out, "results.csv"), render_csv(header, table))
    write_atomic(os.path.join(out, "cdf_grid.csv"), render_csv(grid_header, grid_rows))
    write_atomic(os.path.join(out, "diagnostics.csv"), render_csv(["key", "value"], diag))
    if result.unreliable:
        print(f"warning: {result.diagnostics['sb_degenerate']} SB-degenerate replications; "
              "result flagged unreliable", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"configuration: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser():
    parser = _Parser(prog="dwadlab", description="Density-weighted average derivative toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel-check", help="moment report of a product kernel")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("estimate", help="fit the estimator on a CSV file")
    p.add_argument("--data", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--bandwidth", type=float, required=True)
    p.add_argument("--direction")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--out")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("truth", help="population functionals of a preset design")
    p.add_argument("--dgp", required=True, choices=dgp_mod.PRESETS)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--direction")
    p.add_argument("--noise-sd", type=float, default=1.0)
    p.add_argument("--heteroskedastic", action="store_true")
    p.add_argument("--h0", type=float, default=0.2)
    p.add_argument("--n", type=int)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_truth)

    p = sub.add_parser("edgeworth", help="evaluate the expansions on a grid")
    p.add_argument("--config", required=True)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--out")
    p.set_defaults(func=cmd_edgeworth)

    p = sub.add_parser("simulate", help="run a Monte Carlo cell")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="advisory worker count; results do not depend on it")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DwadError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
