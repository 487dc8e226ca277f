"""Command-line front end.

Exit status: 0 on success, 1 on usage errors (bad flags, unreadable files,
invalid parameters) and 2 when a numerical or model error stops the run.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from prepivot.engine import METHODS, TIE_RULES, BootstrapConfig, bootstrap_p_values, prepivot_ci
from prepivot.errors import DomainError, ParameterError, PrepivotError
from prepivot.harness import (
    McDesign,
    parse_design_text,
    run_power_curve,
    run_table1,
    run_uniformity,
    write_atomic,
)
from prepivot.models import (
    HeavyConfig,
    HeavyTailLocation,
    KernelRegression,
    MaConfig,
    ModelAveraging,
    NpConfig,
    RidgeConfig,
    RidgeRegression,
    load_matrix,
)
from prepivot.models.heavy import ESTIMATORS
from prepivot.numerics import KERNELS, KernelSpec, RngStream, StableLaw, kernel_constants, kernel_constants_gauss

PRECEDENCE = (
    "Configuration precedence, highest first: command-line flags, keys in the "
    "--design file, the PREPIVOT_SEED environment variable (seed only), "
    "built-in defaults.  dist, a, n and scheme accept comma lists and expand "
    "to a grid."
)

# flag name -> design key
_DESIGN_FLAGS = {
    "model": "model", "dist": "dist", "n": "n", "a": "a", "rate": "rate", "corr": "corr",
    "scheme": "scheme", "reps": "reps", "b1": "B1", "b2": "B2", "tie_rule": "tie_rule",
    "levels": "levels", "methods": "methods", "seed": "seed", "plugin": "plugin",
    "ridge_c0": "ridge_c0", "np_c": "np_c", "np_x": "np_x", "kernel": "kernel",
    "heavy_alpha": "heavy_alpha", "omega": "omega", "alpha_estimator": "alpha_estimator",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _methods(text: str) -> tuple[str, ...]:
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = set(items) - set(METHODS)
    if bad or not items:
        raise argparse.ArgumentTypeError(f"methods must be drawn from {', '.join(METHODS)}")
    return items


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6f}"
    return str(x)


def _header(config: dict) -> list[str]:
    lines = []
    for key, value in config.items():
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {key}={value}")
    return lines


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# design-driven subcommands


def _add_design_flags(p: argparse.ArgumentParser, *, pretty: bool = True) -> None:
    g = p.add_argument_group("design (flags override --design keys)")
    g.add_argument("--design", help="key=value design file")
    g.add_argument("--model", choices=("ma", "ridge", "np", "heavy"))
    g.add_argument("--dist", help="normal, t3, chi1 (comma list for a grid)")
    g.add_argument("--n", help="sample size (comma list for a grid)")
    g.add_argument("--a", help="local drift (comma list for a grid)")
    g.add_argument("--rate", type=float, help="drift exponent")
    g.add_argument("--corr", type=float, help="regressor correlation")
    g.add_argument("--scheme", help="par, frb-parametric, non-par, pairs (model averaging)")
    g.add_argument("--reps", type=int)
    g.add_argument("--b1", type=int, help="first-level replications")
    g.add_argument("--b2", type=int, help="second-level replications")
    g.add_argument("--tie-rule", choices=TIE_RULES)
    g.add_argument("--levels", type=_floats)
    g.add_argument("--methods", type=_methods)
    g.add_argument("--seed", type=int)
    g.add_argument("--plugin", choices=("estimated", "oracle"))
    g.add_argument("--ridge-c0", type=float, help="ridge penalty c_n / n")
    g.add_argument("--np-c", type=float, help="bandwidth constant, h = c n^(-1/5)")
    g.add_argument("--np-x", type=float, help="evaluation point")
    g.add_argument("--kernel", choices=KERNELS)
    g.add_argument("--heavy-alpha", type=float, help="stable index of the errors")
    g.add_argument("--omega", type=float, help="shrinkage weight")
    g.add_argument("--alpha-estimator", choices=ESTIMATORS)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    p.add_argument("--out", help="output CSV (default: stdout)")
    if pretty:
        p.add_argument("--pretty", action="store_true", help="frequencies as percents with one decimal")


def _designs(args: argparse.Namespace) -> list[McDesign]:
    text = ""
    env_seed = os.environ.get("PREPIVOT_SEED")
    if env_seed is not None:
        text += f"seed={env_seed}\n"
    if args.design:
        try:
            text += Path(args.design).read_text()
        except OSError as exc:
            raise UsageError(f"cannot read design file: {exc}") from exc
    overrides = {}
    for flag, key in _DESIGN_FLAGS.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[key] = value
    return parse_design_text(text, overrides)


def _workers(args: argparse.Namespace) -> int:
    w = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if w < 1:
        raise UsageError("--workers must be at least 1")
    return w


def cmd_mc(args: argparse.Namespace) -> int:
    designs = _designs(args)
    table = run_table1(designs, _workers(args))
    if len(designs) > 1:
        for key in ("dist", "a", "n", "scheme"):
            values = list(dict.fromkeys(getattr(d, key) for d in designs))
            table.header[key] = values if len(values) > 1 else values[0]
    table.header["pretty"] = bool(args.pretty)
    _emit(table.to_text(args.pretty), args.out)
    return 0


def cmd_uniformity(args: argparse.Namespace) -> int:
    lines, rows = [], []
    designs = _designs(args)
    for design in designs:
        res = run_uniformity(design, _workers(args))
        if not lines:
            lines = _header(design.resolved())
        for row in res.summary_rows():
            rows.append([design.dist_label, _fmt(design.n), design.scheme_label, row["method"],
                         _fmt(row["ks_statistic"]), _fmt(row["ks_pvalue"]), _fmt(row["size"]),
                         _fmt(row["mass_at_0"]), _fmt(row["mass_at_1"]), _fmt(res.aborts)])
        if args.pvalues_out:
            cols = list(res.p_values)
            body = [",".join(cols)] + [",".join(_fmt(v) for v in r) for r in zip(*(res.p_values[c] for c in cols))]
            write_atomic(args.pvalues_out, "\n".join(_header(design.resolved()) + body) + "\n")
    cols = "dist,n,scheme,method,ks_statistic,ks_pvalue,size,mass_at_0,mass_at_1,aborts"
    _emit("\n".join(lines + [cols] + [",".join(r) for r in rows]) + "\n", args.out)
    return 0


def cmd_power(args: argparse.Namespace) -> int:
    designs = _designs(args)
    lines, rows = [], []
    for design in designs:
        if not lines:
            lines = _header({**design.resolved(), "grid": args.grid})
        for pt in run_power_curve(design, args.grid, _workers(args)):
            if args.pretty:
                nums = [f"{100 * pt.reject_freq:.1f}", f"{100 * pt.se:.1f}", f"{100 * pt.overlay:.1f}"]
            else:
                nums = [_fmt(pt.reject_freq), _fmt(pt.se), _fmt(pt.overlay)]
            rows.append([design.dist_label, _fmt(design.n), design.scheme_label, f"{pt.a:g}", pt.method,
                         f"{pt.level:g}", *nums])
    cols = "dist,n,scheme,a,method,level,reject_freq,se,overlay"
    _emit("\n".join(lines + [cols] + [",".join(r) for r in rows]) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------
# single data set


def _build_problem(args: argparse.Namespace, data: np.ndarray):
    if data.ndim == 1:
        data = data[:, None]
    if args.model == "ma":
        if data.shape[1] < 3:
            raise ParameterError("model averaging data need columns y, x, z1, ...")
        cfg = MaConfig(scheme={"par": "frb-parametric", "non-par": "frb-residual"}.get(args.scheme, args.scheme),
                       include_intercept=not args.no_intercept, null_value=args.null)
        return ModelAveraging(data[:, 0], data[:, 1], data[:, 2:], cfg), cfg
    if args.model == "ridge":
        if data.shape[1] < 2:
            raise ParameterError("ridge data need columns y, x1, ...")
        g = args.g if args.g is not None else (1.0,) + (0.0,) * (data.shape[1] - 2)
        cfg = RidgeConfig(c_n=args.cn, g=g, r=args.r if args.r is not None else args.null)
        if len(cfg.g) != data.shape[1] - 1:
            raise ParameterError("--g must have one entry per regressor")
        return RidgeRegression(data[:, 0], data[:, 1:], cfg), cfg
    if args.model == "np":
        cfg = NpConfig(c=args.np_c, kernel=KernelSpec(args.kernel), x=args.np_x, null_value=args.null)
        return KernelRegression(data[:, 0], cfg), cfg
    cfg = HeavyConfig(omega=args.omega, alpha_estimator=args.alpha_estimator, alpha=args.alpha, null_value=args.null)
    return HeavyTailLocation(data[:, 0], cfg), cfg


def cmd_infer(args: argparse.Namespace) -> int:
    try:
        data = load_matrix(args.data)
    except OSError as exc:
        raise UsageError(f"cannot read data file: {exc}") from exc
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("PREPIVOT_SEED", "0"))
    problem, cfg = _build_problem(args, data)
    config = BootstrapConfig(args.b1, args.b2, args.tie_rule, args.methods)
    stream = RngStream(seed)
    report = bootstrap_p_values(problem, config, stream)
    names = {"standard": "pHat", "plugin": "pTildePlugin", "double": "pTildeDouble", "bias-removed": "pBiasRemoved"}
    cols, vals = ["statistic"], [report.statistic]
    for method in METHODS:
        if method in config.methods or method == "standard":
            cols.append(names[method])
            vals.append(report.p_value(method))
    cols += ["pRight", "pEqualTailed"]
    vals += [report.p_right, report.p_equal_tailed]
    if report.m_hat is not None:
        cols.append("mHat")
        vals.append(report.m_hat)
    d = report.diagnostics
    cols += ["B1", "B2", "outerDraws", "innerDraws", "retries", "ties"]
    vals += [d["B1"], d["B2"], d["outer_draws"], d["inner_draws"], d["retries"], d["ties"]]
    if args.ci is not None:
        draws = problem.resample(stream.split(1), config.B1)
        lower, _ = prepivot_ci(problem.theta_hat, problem.gn, problem.statistic_star(draws),
                               problem.plugin_map(), args.ci)
        cols.append("ciLower")
        vals.append(lower)
    resolved = {"model": args.model, "data": args.data, "n": data.shape[0], "seed": seed,
                "B1": config.B1, "B2": config.B2, "tie_rule": config.tie_rule, "methods": config.methods}
    resolved.update({k: v for k, v in vars(cfg).items() if k != "kernel"})
    if args.model == "np":
        resolved["kernel"] = cfg.kernel.kind
    if args.ci is not None:
        resolved["ci_alpha"] = args.ci
    text = "\n".join(_header(resolved) + [",".join(cols), ",".join(_fmt(v) for v in vals)]) + "\n"
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------------------
# numerical tables


def cmd_kernel_constants(args: argparse.Namespace) -> int:
    kinds = args.kernel or list(KERNELS)
    rows = []
    for kind in kinds:
        spec = KernelSpec(kind)
        for route, fn in (("adaptive", kernel_constants), ("gauss", kernel_constants_gauss)):
            if args.route not in ("both", route):
                continue
            c = fn(spec)
            rows.append(f"{kind},{route},{c.R_K:.12f},{c.kappa2:.12f},{c.m2:.12f},{c.m_np:.12f}")
    lines = _header({"kernels": kinds, "route": args.route})
    _emit("\n".join(lines + ["kernel,route,R_K,kappa2,m2,m_np"] + rows) + "\n", args.out)
    return 0


def cmd_stable_table(args: argparse.Namespace) -> int:
    rows = []
    for alpha in args.alpha:
        law = StableLaw(alpha)
        if args.p:
            for p in args.p:
                rows.append(f"{alpha:g},quantile,{p:.6f},{float(law.quantile(p)):.10f}")
        for u in args.u:
            rows.append(f"{alpha:g},cdf,{u:g},{float(law.cdf(u)):.6f}")
            rows.append(f"{alpha:g},pdf,{u:g},{float(law.pdf(u)):.10f}")
    lines = _header({"alpha": args.alpha, "u": args.u, "p": args.p or ()})
    _emit("\n".join(lines + ["alpha,function,argument,value"] + rows) + "\n", args.out)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prepivot", description="Prepivoted bootstrap p-values.", epilog=PRECEDENCE)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("mc", help="rejection frequencies of a Monte Carlo design", epilog=PRECEDENCE)
    _add_design_flags(p)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("uniformity", help="null p-values and their KS distance from uniform", epilog=PRECEDENCE)
    _add_design_flags(p, pretty=False)
    p.add_argument("--pvalues-out", help="also write the raw p-values here")
    p.set_defaults(func=cmd_uniformity)

    p = sub.add_parser("power", help="power curve with the Gaussian local-power overlay", epilog=PRECEDENCE)
    _add_design_flags(p)
    p.add_argument("--grid", type=_floats, required=True, help="comma list of drifts a")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("infer", help="p-values for one data set")
    p.add_argument("--model", choices=("ma", "ridge", "np", "heavy"), required=True)
    p.add_argument("--data", required=True, help="numeric matrix, first column y")
    p.add_argument("--b1", type=int, default=199)
    p.add_argument("--b2", type=int, default=199)
    p.add_argument("--tie-rule", choices=TIE_RULES, default="plain")
    p.add_argument("--methods", type=_methods, default=("standard", "plugin", "double"))
    p.add_argument("--seed", type=int, help="default: PREPIVOT_SEED, else 0")
    p.add_argument("--null", type=float, default=0.0, help="null value of the parameter")
    p.add_argument("--ci", type=float, help="also report the lower bound of a level 1-CI prepivot interval")
    p.add_argument("--scheme", default="frb-parametric",
                   choices=("par", "frb-parametric", "non-par", "frb-residual", "pairs"))
    p.add_argument("--no-intercept", action="store_true")
    p.add_argument("--cn", type=float, default=0.0, help="ridge penalty")
    p.add_argument("--g", type=_floats, help="ridge contrast (default e1)")
    p.add_argument("--r", type=float, help="ridge null value of g'theta (default --null)")
    p.add_argument("--np-c", type=float, default=0.5)
    p.add_argument("--np-x", type=float, default=0.5)
    p.add_argument("--kernel", choices=KERNELS, default="epanechnikov")
    p.add_argument("--omega", type=float, default=0.7)
    p.add_argument("--alpha-estimator", choices=ESTIMATORS, default="mcculloch-quantile")
    p.add_argument("--alpha", type=float, help="stable index when --alpha-estimator known")
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("kernel-constants", help="R_K, kappa2 and the kernel-regression scale ratio")
    p.add_argument("--kernel", choices=KERNELS, action="append")
    p.add_argument("--route", choices=("adaptive", "gauss", "both"), default="adaptive")
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel_constants)

    p = sub.add_parser("stable-table", help="symmetric stable cdf, density and quantiles")
    p.add_argument("--alpha", type=_floats, default=(1.5,))
    p.add_argument("--u", type=_floats, default=tuple(0.5 * k for k in range(11)))
    p.add_argument("--p", type=_floats)
    p.add_argument("--out")
    p.set_defaults(func=cmd_stable_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return int(args.func(args))
    except UsageError as exc:
        msg = str(exc)
        if not msg.startswith("usage:"):
            msg = f"{parser.format_usage()}prepivot: error: {msg}"
        print(msg, file=sys.stderr)
        return 1
    except (ParameterError, DomainError) as exc:
        print(f"prepivot: invalid input: {exc}", file=sys.stderr)
        return 1
    except PrepivotError as exc:
        print(f"prepivot: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"prepivot: numeric failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
