"""Command-line interface: ``droplet-lab params | verify | export``.

Exit codes: 0 success, 1 a verification failed, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import math
import os
import sys

import numpy as np

from . import dynamics, particles, potentials
from .droplet import ELLIPSE, STRIP, build_droplet, cap_pair, verify_schwarz_identity
from .line_equilibrium import POSTCRITICAL, LineEquilibrium, ProblemParams, compute_A_C
from .report import FAIL, VerificationReport, dumps

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SUITES = ("frostman", "mother-body", "schwarz", "stieltjes", "quadrature-domain", "dynamics")
POSTCRITICAL_ONLY = {"schwarz", "stieltjes", "dynamics"}
EXPORT_KINDS = ("boundary", "density", "dynamics", "oracle")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration


def _params(args, required: bool = True) -> ProblemParams | None:
    if args.b is None:
        if required:
            raise UsageError("--b is required")
        return None
    if args.a is None and args.t is None:
        if required:
            raise UsageError("one of --a or --t is required")
        return None
    try:
        if args.t is not None:
            return ProblemParams.from_t(args.b, args.t)
        return ProblemParams(args.b, args.a)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def params_table(params: ProblemParams) -> dict:
    """Regime constants and the mass table."""
    b, a = params.b, params.a
    out = {"regime": params.regime, "b": b, "a": a, "t": params.t,
           "a_cr": params.a_cr, "t_cr": params.t_cr}
    d = build_droplet(params)
    if d.shape == ELLIPSE:
        A, C = compute_A_C(params)
        g = d.ellipse
        out.update({"A": A, "C": C, "p": g.p, "q": g.q, "p2": g.p ** 2, "q2": g.q ** 2, "r": g.r})
    else:
        if d.shape == STRIP:
            out["strip_half_width"] = d.half_width
        caps = d.caps if d.caps else cap_pair(params)
        out["cap_radius"] = caps[0].geodesic_radius
        out["cap_area"] = caps[0].area
    out["masses"] = {"m_sigma": 2.0 * a, "lambda_D": 1.0 / (1.0 + 2.0 * a),
                     "m_sigma_star": 1.0 / (2.0 * a), "lambda_D_star": 2.0 * a / (1.0 + 2.0 * a)}
    return out


def _text_table(table: dict) -> str:
    lines = []
    for k, v in table.items():
        if isinstance(v, dict):
            for kk, vv in v.items():
                lines.append(f"{k}.{kk} = {_fmt(vv)}")
        else:
            lines.append(f"{k} = {_fmt(v)}")
    return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {out}: {exc}") from None


# ---------------------------------------------------------------------------
# verify


def run_suite(name: str, params: ProblemParams, grid_n: int | None, tol: float | None) -> list[VerificationReport]:
    if name in POSTCRITICAL_ONLY and params.regime != POSTCRITICAL:
        return [VerificationReport.skipped(name, f"needs the postcritical regime, got {params.regime}")]
    kw = {} if tol is None else {"tol": tol}
    n = 400 if grid_n is None else grid_n
    if name == "frostman":
        return [potentials.verify_frostman_sphere(params, n_grid=n, **kw)]
    if name == "mother-body":
        return [potentials.verify_mother_body(params, n_grid=n, **kw)]
    if name == "schwarz":
        return [verify_schwarz_identity(params, sample_count=256 if grid_n is None else grid_n, **kw)]
    if name == "stieltjes":
        return [potentials.verify_stieltjes_identities(params, n=50 if grid_n is None else grid_n, **kw)]
    if name == "quadrature-domain":
        return [potentials.verify_quadrature_domain(params, **kw)]
    if name == "dynamics":
        return dynamics.verify_dynamics(params.b, params.t, n_grid=n, **kw)
    raise UsageError(f"unknown suite {name!r}")


def _reports_csv(reports) -> str:
    rows = ["check_name,status,max_equality_residual,worst_inequality_violation,tolerance"]
    for r in reports:
        rows.append(",".join([r.check_name, r.status] + [_fmt(float(v)) for v in
                             (r.max_equality_residual, r.worst_inequality_violation, r.tolerance)]))
    return "\n".join(rows) + "\n"


def cmd_verify(args) -> int:
    params = _params(args)
    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = []
    for s in suites:
        reports.extend(run_suite(s, params, args.grid_n, args.tol))
    body = _reports_csv(reports) if args.format == "csv" else dumps(
        {"b": params.b, "a": params.a, "regime": params.regime, "reports": reports}) + "\n"
    if args.out is not None:
        _emit(body, args.out)
        for r in reports:
            print(r.summary())
    else:
        _emit(body, None)
    failed = [r.check_name for r in reports if r.status == FAIL]
    if failed:
        print("failed: " + ", ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# export


def _csv(header: list[str], rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def _records(header, rows, meta) -> str:
    return dumps({**meta, "rows": [dict(zip(header, r)) for r in rows]}) + "\n"


def density_table(params: ProblemParams, n: int = 201) -> tuple[list[str], list[tuple]]:
    """``(x, density)`` rows on an odd grid so ``x = 0`` is present."""
    if n % 2 == 0:
        n += 1
    eq = LineEquilibrium(params)
    if eq.bounded:
        A = eq.A
        x = A * np.linspace(-1.0, 1.0, n)[1:-1]
    else:
        x = np.linspace(-5.0, 5.0, n)
    x[len(x) // 2] = 0.0
    return ["x", "density"], list(zip(x.tolist(), eq.density(x).tolist()))


def export_rows(kind: str, args):
    if kind == "boundary":
        params = _params(args)
        s = build_droplet(params).boundary_sample(256 if args.grid_n is None else args.grid_n)
        rows = [(z.real, z.imag, *x) for z, x in zip(s.z, s.xyz)]
        return ["z_re", "z_im", "x1", "x2", "x3"], rows, {"b": params.b, "a": params.a}
    if kind == "density":
        params = _params(args)
        header, rows = density_table(params, 201 if args.grid_n is None else args.grid_n)
        return header, rows, {"b": params.b, "a": params.a}
    if kind == "dynamics":
        if args.b is None:
            raise UsageError("--b is required")
        if args.b <= 1.0:
            raise UsageError("the growth family needs b > 1")
        fam = dynamics.GrowthFamily.uniform(args.b, 20 if args.grid_n is None else args.grid_n)
        recs = fam.records()
        header = list(recs[0])
        return header, [tuple(r[k] for k in header) for r in recs], {"b": args.b}
    raise UsageError(f"unknown export kind {kind!r}")


def cmd_export(args) -> int:
    if args.kind == "oracle":
        params = _params(args)
        cfg = particles.minimize(args.n_particles, params, seed=args.seed, restarts=args.restarts)
        if args.format == "json":
            body = dumps(particles.config_record(cfg, params)) + "\n"
        else:
            body = _csv(["x1", "x2", "x3"], cfg.points.tolist())
        _emit(body, args.out)
        return EXIT_OK
    header, rows, meta = export_rows(args.kind, args)
    body = _records(header, rows, meta) if args.format == "json" else _csv(header, rows)
    _emit(body, args.out)
    return EXIT_OK


def cmd_params(args) -> int:
    table = params_table(_params(args))
    body = dumps(table) + "\n" if args.format == "json" else _text_table(table)
    _emit(body, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(p):
    p.add_argument("--b", type=float, help="charge position on the imaginary axis, b >= 1")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--a", type=float, help="charge strength a > 0")
    g.add_argument("--t", type=float, help="time parameter t = 1/(1+2a) in (0, 1)")
    p.add_argument("--grid-n", type=int, default=None, help="grid or sample size")
    p.add_argument("--tol", type=float, default=None, help="override the verification tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-particles", type=int, default=400)
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="droplet-lab", description="Two-charge equilibrium problem on the sphere.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("params", help="print regime constants and masses")
    _common(p)
    p.set_defaults(func=cmd_params)
    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    _common(p)
    p.set_defaults(func=cmd_verify, format_default="json")
    p = sub.add_parser("export", help="write plot data")
    p.add_argument("--kind", choices=EXPORT_KINDS, required=True)
    _common(p)
    p.set_defaults(func=cmd_export, format_default="csv")
    return parser


def _thread_limit():
    raw = os.environ.get(particles.THREADS_ENV)
    if not raw:
        return contextlib.nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=particles.thread_count())


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "format_default", "text")
    try:
        if args.grid_n is not None and args.grid_n < 3:
            raise UsageError("--grid-n must be at least 3")
        if args.n_particles < 2 or args.restarts < 1:
            raise UsageError("--n-particles must be >= 2 and --restarts >= 1")
        if args.tol is not None and not (args.tol >= 0 and math.isfinite(args.tol)):
            raise UsageError("--tol must be a finite non-negative number")
        with _thread_limit():
            return args.func(args)
    except UsageError as exc:
        print(f"droplet-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"droplet-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run(argv: list[str]) -> tuple[int, str, str]:
    """Run :func:`main` capturing stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            code = main(argv)
        except SystemExit as exc:
            code = int(exc.code) if exc.code is not None else 0
    return code, out.getvalue(), err.getvalue()


if __name__ == "__main__":
    raise SystemExit(main())
