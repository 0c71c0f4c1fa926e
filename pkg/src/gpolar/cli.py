"""``gpd`` command-line entry point.

Exit codes: 0 converged / success, 2 iteration did not converge or a
back-end step failed, 1 bad input.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from typing import Sequence

from . import bench
from .errors import DomainError, GPDError
from .io import parse_signature_spec, read_matrix, write_matrix, write_signature
from .polar import VARIANTS, IterConfig, sigma_dwh
from .sigspaces import Signature
from .testgen import gen_example1, gen_example2

EXIT_OK, EXIT_INPUT, EXIT_NOCONV = 0, 1, 2
TRACE_HEADER = ("k", "a", "b", "c", "ell", "ell_next", "step_norm", "mu", "wall_ms")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; those are input errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _positive_float(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gpd", description="Generalized polar decomposition with respect to "
                "signature matrices.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pol = sub.add_parser("polar", help="decompose a matrix read from a Matrix Market file")
    pol.add_argument("--matrix", required=True, help="dense Matrix Market input A (m x n)")
    pol.add_argument("--sigma-m", help="row signature: file or 'p,q' (default identity)")
    pol.add_argument("--sigma-n", help="column signature: file or 'p,q' (default identity)")
    pol.add_argument("--variant", default="ldliqr2",
                     help=f"one of {', '.join(VARIANTS)}, optionally prefixed 'sigma_dwh-'; "
                          "'dn' and 'son' run the Newton baselines (square, Σm = Σn)")
    pol.add_argument("--tau", type=_positive_float, default=4.0)
    pol.add_argument("--max-iter", type=int, default=100)
    pol.add_argument("--out-w", help="write W here")
    pol.add_argument("--out-s", help="write S here")
    pol.add_argument("--trace", help="write the per-step trace CSV here")

    be = sub.add_parser("bench", help="run an experiment sweep and write CSV")
    be.add_argument("--experiment", required=True, choices=tuple(bench.EXPERIMENTS))
    be.add_argument("--n", type=int, default=100, help="half-size; matrices are 2n x 2n")
    be.add_argument("--reps", type=int, help="runs per (variant, kappa) cell")
    be.add_argument("--seed-base", type=_nonneg_int, default=0)
    be.add_argument("--variants", help="comma-separated methods (default per experiment)")
    be.add_argument("--kappas", help="comma-separated kappa values (default per experiment)")
    be.add_argument("--max-iter", type=int, default=100)
    be.add_argument("--threads", type=_nonneg_int, default=1, help="worker threads, 0 = auto")
    be.add_argument("--out", required=True, help="per-run CSV; means go to <out>.summary.csv")

    ge = sub.add_parser("gen", help="write a generated test instance")
    ge.add_argument("--example", type=int, choices=(1, 2), required=True)
    ge.add_argument("--definite", action="store_true", help="example 1 with positive D")
    ge.add_argument("--n", type=int, default=100, help="half-size; matrix is 2n x 2n")
    ge.add_argument("--cond", type=float, default=1e5, help="target kappa (>= 1)")
    ge.add_argument("--seed", type=_nonneg_int, default=0)
    ge.add_argument("--out", required=True)
    ge.add_argument("--out-sigma", help="signature file")
    ge.add_argument("--out-w", help="ground-truth W (example 2)")
    ge.add_argument("--out-s", help="ground-truth S (example 2)")
    return p


def _fail(msg: str, code: int) -> int:
    print(f"gpd: {msg}", file=sys.stderr)
    return code


def _cmd_polar(args) -> int:
    try:
        A = read_matrix(args.matrix)
        m, n = A.shape
        sm = parse_signature_spec(args.sigma_m) if args.sigma_m else Signature.identity(m)
        sn = parse_signature_spec(args.sigma_n) if args.sigma_n else Signature.identity(n)
        if len(sm) != m or len(sn) != n:
            raise DomainError(f"signature sizes ({len(sm)}, {len(sn)}) do not match A {A.shape}")
        method = bench.normalize_method(args.variant)
        if method in ("dn", "son") and (m != n or sm != sn):
            raise DomainError("Newton baselines need a square A and Σm = Σn")
        cfg = IterConfig(variant="ldliqr2" if method in ("dn", "son") else method.split("-", 1)[1],
                         tau=args.tau, max_iter=args.max_iter)
    except (GPDError, OSError, ValueError) as err:
        return _fail(str(err), EXIT_INPUT)

    try:
        if method in ("dn", "son"):
            res = bench.run_method(method, A, sm, cfg)
        else:
            res = sigma_dwh(A, sm, sn, cfg)
    except (GPDError, ArithmeticError) as err:
        # GPDError messages raised inside the loop already carry "step k:"
        return _fail(f"{method} failed: {err}", EXIT_NOCONV)

    if args.out_w:
        write_matrix(args.out_w, res.W)
    if args.out_s:
        write_matrix(args.out_s, res.S)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRACE_HEADER)
            for st in res.trace.steps:
                w.writerow([st.k] + [repr(float(getattr(st, h))) for h in TRACE_HEADER[1:]])
    status = "converged" if res.converged else "did not converge"
    print(f"{method}: {status} after {res.iterations} steps; residual {res.residual:.3e}, "
          f"orthogonality defect {res.orth_defect:.3e}")
    return EXIT_OK if res.converged else EXIT_NOCONV


def _cmd_bench(args) -> int:
    try:
        methods = args.variants.split(",") if args.variants else None
        if methods:
            methods = [bench.normalize_method(m) for m in methods]
        exps = None
        if args.kappas:
            kappas = [float(t) for t in args.kappas.split(",")]
            if any(not (k >= 1 and math.isfinite(k)) for k in kappas):
                raise DomainError("kappa values must be finite and >= 1")
            exps = [math.log10(k) for k in kappas]
        records = bench.sweep(args.experiment, n=args.n, reps=args.reps,
                              seed_base=args.seed_base, methods=methods, exponents=exps,
                              threads=args.threads, max_iter=args.max_iter)
    except (GPDError, ValueError) as err:
        return _fail(str(err), EXIT_INPUT)
    bench.write_records(args.out, records)
    rows = bench.summarize(records)
    bench.write_summary(bench.summary_path(args.out), rows)
    for r in rows:
        it = "nan" if r["iterations"] is None else f"{r['iterations']:.2f}"
        res = "nan" if r["residual"] is None else f"{r['residual']:.2e}"
        print(f"{r['variant']:>26}  kappa={r['kappa']:.0e}  iters={it}  residual={res}  "
              f"failed={r['n_failed']}/{r['runs']}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        if args.n < 1:
            raise DomainError("--n must be positive")
        if not (args.cond >= 1 and math.isfinite(args.cond)):
            raise DomainError("--cond must be finite and >= 1")
        if args.example == 2 and args.definite:
            raise DomainError("--definite applies to example 1 only")
        k = math.log10(args.cond)
        inst = (gen_example1(args.n, k, args.seed, definite=args.definite)
                if args.example == 1 else gen_example2(args.n, k, args.seed))
        write_matrix(args.out, inst.A)
        if args.out_sigma:
            write_signature(args.out_sigma, inst.sigma)
        if args.out_w or args.out_s:
            if inst.W_true is None:
                raise DomainError("ground-truth factors exist for example 2 only")
            if args.out_w:
                write_matrix(args.out_w, inst.W_true)
            if args.out_s:
                write_matrix(args.out_s, inst.S_true)
    except (GPDError, OSError, ValueError) as err:
        return _fail(str(err), EXIT_INPUT)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"polar": _cmd_polar, "bench": _cmd_bench, "gen": _cmd_gen}[args.command]
    return handler(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
