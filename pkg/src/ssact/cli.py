"""Command-line interface.

Exit codes: 0 success, 2 invalid input (graph, action, discount or element),
3 non-convergence, failed cross-check or uncertified bound.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from ssact import diagnostics, kms, trace
from ssact.action import ActionError, ClosureBoundError, lint_faithful
from ssact.graph import GraphError, adjacency_matrix, is_strongly_connected
from ssact.instance import load_instance
from ssact.spectral import (
    DiscountError,
    SpectralError,
    check_discount,
    discount_from_beta,
    parse_discount,
    perron_frobenius,
    to_csv,
    von_neumann_radius,
)
from ssact.trace import fmt

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_UNCERTIFIED = 3
CROSSCHECK_TOL = 1e-8


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _discount(args, inst, exact: bool):
    if getattr(args, "beta", None) is not None:
        if exact:
            raise CliError("--beta is float-only; use --discount p/q with --exact")
        return discount_from_beta(args.beta)
    text = args.discount if args.discount is not None else inst.defaults.get("discount")
    if text is None:
        raise CliError("a discount is required (--discount or --beta)")
    d = parse_discount(str(text))
    return d if exact else float(d)


def _setup(args, extra_words=()):
    inst = load_instance(args.instance)
    exact = getattr(args, "exact", False)
    words = [inst.table.parse_word(w) for w in extra_words if w]
    cl = inst.closure(words)
    spectral = perron_frobenius(adjacency_matrix(inst.graph), exact=exact)
    return inst, cl, spectral, exact


def _init_trace(cl, path, exact):
    if not path:
        return trace.trace_from_mapping(cl, {}, exact)
    with open(path, encoding="utf-8") as f:
        raw = json.load(f)
    mapping = {}
    for key, val in raw.items():
        if isinstance(val, dict):
            val = complex(val.get("re", 0), val.get("im", 0))
        elif isinstance(val, str):
            val = Fraction(val) if exact else (complex(val.replace(" ", "")) if "j" in val else float(Fraction(val)))
        mapping[key] = val
    return trace.trace_from_mapping(cl, mapping, exact)


def _print_trace(name, tv, out):
    for key, val in zip(tv.closure.keys, tv.values):
        print(f"{name}[{key}] = {fmt(val)}", file=out)


def cmd_validate(args, out):
    inst = load_instance(args.instance, depth=args.depth)
    print(f"graph: {inst.graph.num_vertices} vertices, {inst.graph.num_edges} edges", file=out)
    print(f"strongly connected: {is_strongly_connected(inst.graph)}", file=out)
    print(f"generators: {', '.join(inst.table.generators) or '(none)'}", file=out)
    for warning in lint_faithful(inst.table, args.depth):
        print(f"lint: {warning}", file=out)
    print("valid", file=out)
    return EXIT_OK


def cmd_closure(args, out):
    inst, cl, _, _ = _setup(args, args.words)
    print("class,domain,terminus,inverse,unit", file=out)
    for i, key in enumerate(cl.keys):
        print(f"{key},{cl.domain[i]},{cl.terminus[i]},{cl.keys[cl.inverse[i]]},{int(cl.is_unit(i))}", file=out)
    print("M," + ",".join(cl.keys), file=out)
    for key, row in zip(cl.keys, cl.M):
        print(key + "," + ",".join(str(int(v)) for v in row), file=out)
    return EXIT_OK


def cmd_spectral(args, out):
    inst = load_instance(args.instance)
    A = adjacency_matrix(inst.graph)
    sp = perron_frobenius(A, tol=args.tol, exact=args.exact)
    print(f"rho = {fmt(sp.rho)}", file=out)
    for v, mv, wv in zip(inst.graph.vertices, sp.m, sp.m_tilde):
        print(f"m[{v}] = {fmt(mv)}  m_tilde[{v}] = {fmt(wv)}", file=out)
    if args.csv:
        out.write(to_csv(A))
    return EXIT_OK


def cmd_trace(args, out):
    inst, cl, sp, exact = _setup(args)
    d = _discount(args, inst, exact)
    check_discount(d, sp.rho)
    theta = trace.fixed_point_eigen(sp, cl)
    tau0 = _init_trace(cl, args.init, exact)
    try:
        report = trace.iterate_chi(sp, cl, d, tau0, tol=args.tol, max_iter=args.max_iter, theta=theta)
    except trace.ConvergenceError as exc:
        raise CliError(str(exc), EXIT_UNCERTIFIED) from exc
    limit = report.traces[-1]
    gap = max(float(abs(a - b)) for a, b in zip(limit.values, theta.values))
    _print_trace("theta", theta, out)
    Z = trace.compute_Z(sp, cl, d, theta)
    print(f"N = {fmt(trace.compute_N(d, Z))}", file=out)
    print(f"Z = {fmt(Z)}", file=out)
    print(f"rho = {fmt(sp.rho)}", file=out)
    print(f"iterations = {report.steps}", file=out)
    print(f"iteration_gap = {fmt(gap)}", file=out)
    if gap > CROSSCHECK_TOL:
        raise CliError(f"eigen and iteration fixed points differ by {gap}", EXIT_UNCERTIFIED)
    return EXIT_OK


def cmd_iterate(args, out):
    inst, cl, sp, exact = _setup(args)
    d = _discount(args, inst, exact)
    check_discount(d, sp.rho)
    tau0 = _init_trace(cl, args.init, exact)
    report = trace.iterate_chi(sp, cl, d, tau0, steps=args.steps)
    text = report.to_csv()
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_kms(args, out):
    inst, cl, sp, exact = _setup(args, [args.g])
    d = _discount(args, inst, exact)
    elem = kms.spanning_element(cl, args.mu, args.g, args.nu)
    tau = _init_trace(cl, args.init, exact)
    print(fmt(kms.psi_eval(sp, cl, d, tau, elem)), file=out)
    return EXIT_OK


def cmd_critical(args, out):
    inst, cl, sp, _ = _setup(args, [args.g])
    elem = kms.spanning_element(cl, args.mu, args.g, args.nu)
    value = kms.critical_psi_eval(sp, cl, elem, depth=args.depth)
    print(fmt(value), file=out)
    if args.census:
        census = kms.critical_psi_eval(sp, cl, elem, depth=args.depth, source="census")
        print(f"census = {fmt(census)}", file=out)
    return EXIT_OK


def cmd_diagnose(args, out):
    inst, cl, sp, exact = _setup(args, [args.g])
    d = _discount(args, inst, exact)
    g = cl.class_of(args.g)
    ab = diagnostics.alpha_bound(cl, sp, d, g, args.K)
    alpha, all_ok = diagnostics.uniform_alpha(cl, sp, d, args.K)
    print(f"alpha[{cl.keys[g]}] = {fmt(ab.value)}", file=out)
    print(f"certified = {ab.certified}", file=out)
    print(f"uniform_alpha = {fmt(alpha)}", file=out)
    print(f"k_witness = {diagnostics.k_witness(cl, sp, g, args.K)}", file=out)
    print(f"rho_vN = {fmt(von_neumann_radius(d, sp.rho))}", file=out)
    if cl.domain[g] == cl.terminus[g]:
        text = diagnostics.census_csv(cl, g, min(args.K, args.census_depth), sp)
        if args.census_csv:
            with open(args.census_csv, "w", encoding="utf-8") as f:
                f.write(text)
        else:
            out.write(text)
    if args.convergence_csv:
        tau0 = _init_trace(cl, args.init, exact)
        report = trace.iterate_chi(sp, cl, d, tau0, steps=args.steps)
        summary = diagnostics.convergence_report(report, sp)
        with open(args.convergence_csv, "w", encoding="utf-8") as f:
            f.write(summary.csv)
        for key, r in summary.ratios.items():
            print(f"fitted_ratio[{key}] = {fmt(r)}", file=out)
    if not (ab.certified and all_ok):
        return EXIT_UNCERTIFIED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssact", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("instance", help="instance JSON file or bundled corpus name")
        p.set_defaults(func=func)
        return p

    def discount_flags(p):
        p.add_argument("--discount", help="d = e^{-beta} as p/q or decimal")
        p.add_argument("--beta", type=float, help="inverse temperature (float mode only)")
        p.add_argument("--exact", action="store_true", help="exact rational arithmetic")
        p.add_argument("--init", help="JSON file mapping class keys to initial trace values")

    p = add("validate", cmd_validate, "check graph and action axioms")
    p.add_argument("--depth", type=int, default=4)
    p = add("closure", cmd_closure, "print closure classes and the restriction matrix")
    p.add_argument("words", nargs="*", help="extra seed words, e.g. 'a b^-1'")
    p = add("spectral", cmd_spectral, "Perron-Frobenius data of the adjacency matrix")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--csv", action="store_true", help="also print the adjacency matrix as CSV")
    p = add("trace", cmd_trace, "fixed point by eigen solve and by iteration")
    discount_flags(p)
    p.add_argument("--tol", type=float, default=trace.DEFAULT_TOL)
    p.add_argument("--max-iter", type=int, default=trace.DEFAULT_MAX_ITER)
    p = add("iterate", cmd_iterate, "iterate the trace map and emit CSV")
    discount_flags(p)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p = add("kms", cmd_kms, "evaluate the supercritical KMS state on s_mu u_g s_nu^*")
    discount_flags(p)
    p.add_argument("--mu", default="")
    p.add_argument("--g", required=True)
    p.add_argument("--nu", default="")
    p = add("critical", cmd_critical, "evaluate the critical KMS state on s_mu u_g s_nu^*")
    p.add_argument("--mu", default="")
    p.add_argument("--g", required=True)
    p.add_argument("--nu", default="")
    p.add_argument("--depth", type=int, default=kms.DEFAULT_CENSUS_DEPTH)
    p.add_argument("--census", action="store_true", help="also print the path-census value")
    p = add("diagnose", cmd_diagnose, "census, contraction bound and convergence rates")
    discount_flags(p)
    p.add_argument("--g", required=True)
    p.add_argument("--K", type=int, default=diagnostics.DEFAULT_K)
    p.add_argument("--census-depth", type=int, default=6)
    p.add_argument("--census-csv")
    p.add_argument("--convergence-csv")
    p.add_argument("--steps", type=int, default=30)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (GraphError, ActionError) as exc:
        print("error: invalid instance", file=sys.stderr)
        for item in exc.errors:
            print(f"  - {item}", file=sys.stderr)
        return EXIT_INVALID
    except (ClosureBoundError, SpectralError, trace.FixedPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCERTIFIED
    except (DiscountError, kms.ElementError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
