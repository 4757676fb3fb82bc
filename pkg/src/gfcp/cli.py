"""Command-line front end.

Every command writes a table (CSV with ``#`` metadata lines, or JSON) that
embeds the resolved configuration, the seed and a digest of the parameters.
Floats are written in shortest round-trip form. Thread count is not part of
the output: Monte Carlo work is cut into fixed chunks with their own streams,
so results do not depend on it.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Any

import numpy as np

from . import ctrw, dependence, process, risk, subordinator
from .errors import GfcpError, ValidationError, DomainError, UnsupportedDist
from .montecarlo import run_chunks
from .params import params_from_json
from .specfun import MlAccuracy, ml_three

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERIC = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _float_text(v: float) -> str:
    # shortest text that reads back to the same double
    s = repr(v)
    return s[:-2] if s.endswith(".0") else s


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return _float_text(v)
    if v is None:
        return ""
    return str(v)


def to_json(obj) -> str:
    """JSON text with round-trip floats; non-finite floats become strings."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return _float_text(v) if math.isfinite(v) else json.dumps(fmt(v))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def parse_int_list(text: str) -> list[int]:
    """``"0..5"`` (inclusive) or ``"1,2,7"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise ValidationError("n", f"empty integer list {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError("list", f"not a comma-separated list of numbers: {text!r}") from None
    if not vals:
        raise ValidationError("list", f"empty list {text!r}")
    return vals


class Output:
    def __init__(self, command: str, config: dict, seed: int | None, digest: str | None):
        self.command = command
        self.config = config
        self.seed = seed
        self.digest = digest
        self.columns: list[str] = []
        self.rows: list[list[Any]] = []
        self.summary: dict | None = None
        self.json_rows = True  # False when the summary already carries the table

    def table(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        return self

    def render(self, fmt_name: str) -> str:
        if fmt_name == "json":
            doc = {
                "command": self.command,
                "seed": self.seed,
                "params_digest": self.digest,
                "config": self.config,
            }
            if self.summary is not None:
                doc.update(self.summary)
            if self.columns and self.json_rows:
                doc["columns"] = self.columns
                doc["rows"] = self.rows
            return to_json(doc) + "\n"
        lines = [
            f"# command: {self.command}",
            f"# seed: {fmt(self.seed)}",
            f"# params_digest: {self.digest or ''}",
            f"# config: {to_json(self.config)}",
        ]
        if self.summary is not None:
            lines.append(f"# summary: {to_json(self.summary)}")
        if self.columns:
            lines.append(",".join(self.columns))
            lines.extend(",".join(fmt(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _common(parser):
    parser.add_argument("--params", help="inline JSON object or path to a JSON file")
    parser.add_argument("--seed", type=int, default=0, help="master seed (64-bit unsigned)")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--out", help="output file (default: standard output)")


def _need_params(args):
    if not args.params:
        raise ValidationError("params", "--params is required")
    return params_from_json(args.params)


def _base_config(args, p=None, **extra):
    cfg = {"command": args.command}
    if p is not None:
        cfg["params"] = p.to_dict()
    cfg.update(extra)
    return cfg


def cmd_ml(args):
    acc = MlAccuracy(rel_tol=args.rel_tol)
    xs = parse_float_list(args.x)
    rows = [[x, ml_three(args.beta, args.gamma, args.delta, x, acc)] for x in xs]
    cfg = _base_config(args, beta=args.beta, gamma=args.gamma, delta=args.delta, x=xs, rel_tol=args.rel_tol)
    return Output("ml", cfg, args.seed, None).table(["x", "value"], rows)


def cmd_pmf(args):
    p = _need_params(args)
    ns = parse_int_list(args.n)
    ts = parse_float_list(args.t)
    for n in ns:
        if n < 0:
            raise ValidationError("n", f"n must be >= 0, got {n}")
    rows = []
    for t in ts:
        vec = process.pmf_vector(p, max(ns), t)
        rows.extend([n, t, vec[n]] for n in ns)
    cfg = _base_config(args, p, n=ns, t=ts)
    return Output("pmf", cfg, args.seed, p.digest()).table(["n", "t", "value"], rows)


def cmd_moments(args):
    p = _need_params(args)
    ts = parse_float_list(args.t)
    orders = range(1, args.r + 1)
    cols = ["t", "mean", "var"] + [f"raw_{r}" for r in orders] + [f"factorial_{r}" for r in orders]
    rows = []
    for t in ts:
        m, v = process.mean_var(p, t)
        rows.append(
            [t, m, v]
            + [process.raw_moment(p, r, t) for r in orders]
            + [process.factorial_moment(p, r, t) for r in orders]
        )
    cfg = _base_config(args, p, t=ts, r=args.r)
    return Output("moments", cfg, args.seed, p.digest()).table(cols, rows)


def cmd_cov(args):
    p = _need_params(args)
    ts = parse_float_list(args.t)
    rows = []
    for t in ts:
        if t < args.s:
            raise DomainError(f"every t must be >= s = {args.s}, got {t}")
        rows.append([args.s, t, process.covariance(p, args.s, t), process.correlation(p, args.s, t)])
    cfg = _base_config(args, p, s=args.s, t=ts)
    return Output("cov", cfg, args.seed, p.digest()).table(["s", "t", "cov", "corr"], rows)


def cmd_sample(args):
    p = _need_params(args)
    ts = parse_float_list(args.t)
    method = args.method or ("superpose_gcp" if p.alpha == 1.0 else "time_change")

    def run(g, n):
        return process.sample_values(p, ts, n, method, g, x_step=args.x_step)

    vals = np.concatenate(run_chunks(run, args.paths, args.seed, args.threads, chunk=10_000))
    rows = [[i, t, int(vals[i, j])] for i in range(vals.shape[0]) for j, t in enumerate(ts)]
    cfg = _base_config(args, p, t=ts, paths=args.paths, method=method, x_step=args.x_step)
    return Output("sample", cfg, args.seed, p.digest()).table(["path", "t", "value"], rows)


def cmd_subordinator(args):
    if args.params:
        alpha = _need_params(args).alpha
    elif args.alpha is not None:
        alpha = args.alpha
    else:
        raise ValidationError("alpha", "give --alpha or --params")
    if not 0 < alpha < 1:
        raise ValidationError("alpha", f"the inverse subordinator needs 0 < alpha < 1, got {alpha}")
    ts = parse_float_list(args.t)
    rows = []
    for t in ts:
        if t < args.s:
            raise DomainError(f"every t must be >= s = {args.s}, got {t}")
        rows.append([
            t,
            subordinator.inverse_mean(alpha, t),
            subordinator.inverse_cov(alpha, args.s, t),
            subordinator.inverse_cov_asymptotic(alpha, args.s, t),
        ])
    cfg = _base_config(args, alpha=alpha, s=args.s, t=ts)
    return Output("subordinator", cfg, args.seed, None).table(["t", "mean", "cov_exact", "cov_asymptotic"], rows)


def cmd_dependence(args):
    p = _need_params(args)
    t_grid = parse_float_list(args.t) if args.t else dependence.default_t_grid(args.s).tolist()
    source = "mc" if args.paths > 0 else "exact"
    rep = dependence.fit_decay_exponent(
        p, args.s, args.h, t_grid, source, n_paths=args.paths, seed=args.seed, threads=args.threads
    )
    rows = []
    for i, t in enumerate(rep.t_grid):
        mc = rep.corr_mc[i] if rep.corr_mc is not None else None
        se = rep.corr_mc_se[i] if rep.corr_mc_se is not None else None
        rows.append([t, rep.corr_exact[i], mc, se])
    cfg = _base_config(args, p, s=args.s, h=args.h, t=list(map(float, rep.t_grid)), paths=args.paths)
    out = Output("dependence", cfg, args.seed, p.digest())
    out.summary = rep.summary()
    return out.table(["t", "corr_exact", "corr_mc", "se"], rows)


def cmd_ctrw(args):
    p = _need_params(args)
    c_grid = parse_float_list(args.c_grid)
    rows = ctrw.convergence_report(p, c_grid, args.t, args.paths, args.seed, args.threads)
    cfg = _base_config(args, p, c_grid=c_grid, t=args.t, paths=args.paths)
    return Output("ctrw", cfg, args.seed, p.digest()).table(
        ["c", "tv", "tv_se", "sup_gap"], [[r.c, r.tv, r.tv_se, r.sup_gap] for r in rows]
    )


def cmd_ruin(args):
    p = _need_params(args)
    if args.c is None or args.mu is None:
        raise ValidationError("c", "--c and --mu are required")
    claims = risk.Exponential(args.mu) if args.claims == "exponential" else risk.Deterministic(args.mu)
    m = risk.RiskModel(p, args.c, claims, u=args.u, horizon=args.horizon)
    ys = parse_float_list(args.y) if args.y else [0.5 * args.mu, args.mu, 2 * args.mu]
    est = risk.ruin_mc(m, [math.inf] + ys, args.paths, args.seed, args.threads)
    psi_mc = est[0]
    table = []
    for e in est[1:]:
        exact = risk.g_zero(m, e.y) if args.u == 0 else None
        table.append([e.y, exact, e.estimate, e.se])
    summary = {
        "eta": risk.safety_loading(m),
        "psi0_exact": risk.psi_zero(m) if args.u == 0 else None,
        "psi0_mc": psi_mc.estimate,
        "se": psi_mc.se,
        "horizon": psi_mc.horizon,
        "G0y_table": table,
    }
    cfg = _base_config(args, p, c=args.c, mu=args.mu, u=args.u, claims=args.claims, y=ys,
                       paths=args.paths, horizon=psi_mc.horizon)
    out = Output("ruin", cfg, args.seed, p.digest())
    out.summary = summary
    out.json_rows = False
    return out.table(["y", "exact", "mc", "se"], table)


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest(seed=args.seed, threads=args.threads)
    cfg = _base_config(args)
    out = Output("selftest", cfg, args.seed, None).table(
        ["check", "passed", "detail"], [[r.name, r.passed, r.detail] for r in results]
    )
    out.failed = sum(not r.passed for r in results)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gfcp", description="Exact laws, simulation, dependence, CTRW and ruin tools for the generalized fractional counting process.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sp = sub.add_parser("ml", help="three-parameter Mittag-Leffler function")
    _common(sp)
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--x", required=True, help="comma-separated arguments")
    sp.add_argument("--rel-tol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_ml)

    sp = sub.add_parser("pmf", help="exact pmf table")
    _common(sp)
    sp.add_argument("--n", required=True, help='"0..5" or "0,3,7"')
    sp.add_argument("--t", required=True, help="comma-separated times")
    sp.set_defaults(func=cmd_pmf)

    sp = sub.add_parser("moments", help="mean, variance, raw and factorial moments")
    _common(sp)
    sp.add_argument("--t", required=True)
    sp.add_argument("--r", type=int, default=3, help="highest moment order")
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("cov", help="covariance and correlation of M(s), M(t)")
    _common(sp)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--t", required=True)
    sp.set_defaults(func=cmd_cov)

    sp = sub.add_parser("sample", help="sample paths on a time grid")
    _common(sp)
    sp.add_argument("--t", required=True)
    sp.add_argument("--paths", type=int, default=10)
    sp.add_argument("--method", choices=process.SAMPLING_METHODS)
    sp.add_argument("--x-step", type=float, default=None)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("subordinator", help="inverse stable subordinator mean and covariance")
    _common(sp)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--t", required=True)
    sp.set_defaults(func=cmd_subordinator)

    sp = sub.add_parser("dependence", help="correlation decay fit (LRD / SRD)")
    _common(sp)
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--h", type=float, default=0.0)
    sp.add_argument("--t", help="comma-separated grid (default: s * 10^2 .. s * 10^4, 20 points)")
    sp.add_argument("--paths", type=int, default=0, help="Monte Carlo paths (0: exact only)")
    sp.set_defaults(func=cmd_dependence)

    sp = sub.add_parser("ctrw", help="CTRW convergence to the exact pmf")
    _common(sp)
    sp.add_argument("--c-grid", default="100,1000,10000")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--paths", type=int, default=100_000)
    sp.set_defaults(func=cmd_ctrw)

    sp = sub.add_parser("ruin", help="ruin probability and deficit law from zero capital")
    _common(sp)
    sp.add_argument("--c", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--u", type=float, default=0.0)
    sp.add_argument("--claims", choices=("exponential", "deterministic"), default="exponential")
    sp.add_argument("--y", help="comma-separated deficit levels (default: mu/2, mu, 2 mu)")
    sp.add_argument("--paths", type=int, default=10_000)
    sp.add_argument("--horizon", type=float)
    sp.set_defaults(func=cmd_ruin)

    sp = sub.add_parser("selftest", help="fast acceptance subset")
    _common(sp)
    sp.set_defaults(func=cmd_selftest)
    return parser


_DEFAULT_FORMAT = {"ruin": "json"}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return int(e.code or 0)
    fmt_name = args.format or _DEFAULT_FORMAT.get(args.command, "csv")
    try:
        if args.seed < 0 or args.seed >= 2**64:
            raise ValidationError("seed", f"seed must be a 64-bit unsigned integer, got {args.seed}")
        if args.threads < 1:
            raise ValidationError("threads", f"threads must be >= 1, got {args.threads}")
        out = args.func(args)
        text = out.render(fmt_name)
    except (ValidationError, DomainError, UnsupportedDist) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (GfcpError, ArithmeticError) as e:
        print(f"numeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if getattr(out, "failed", 0):
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())
