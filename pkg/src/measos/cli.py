"""Command line front end.

Exit codes: 0 success; 1 certificate residual above tolerance; 2 every order
failed in the SDP solver; 3 input error (parse, semantics, order range).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import replace

from . import certify, hierarchy
from .polyalg import PolySyntaxError, format_poly
from .problem import ProblemError, ProblemFile, parse_orders, parse_problem
from .quadmod import GridSpec, make_archimedean, sample_positivity_set
from .sdpa import to_sdpa

EXIT_OK, EXIT_RESIDUAL, EXIT_SOLVER, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    pass


def _g(v: float | None):
    """Fixed 12-significant-digit float for machine-readable output."""
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return float(f"{float(v):.12g}")


def _load(path: str, args) -> ProblemFile:
    try:
        with open(path) as fh:
            prob = parse_problem(fh.read())
    except OSError as exc:
        raise InputError(str(exc)) from None
    except ProblemError as exc:
        raise InputError(f"{path}: {exc}") from None
    eps = getattr(args, "eps", None)
    if eps is not None:
        if not eps > 0:
            raise InputError("--eps must be positive")
        prob = replace(prob, epsilon=eps,
                       module=make_archimedean(prob.space, prob.relations, prob.generators, eps))
    return prob


def _orders(prob: ProblemFile, args) -> tuple[int, int]:
    if args.orders:
        try:
            a, b = parse_orders(args.orders)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    elif prob.orders:
        a, b = prob.orders
    else:
        a = hierarchy.min_order(prob.objective, prob.module)
        b = a + 2
    need = hierarchy.min_order(prob.objective, prob.module)
    if a < need:
        raise InputError(f"order {a} is below the minimum order {need} for these degrees")
    return a, b


def _options(prob: ProblemFile, args) -> hierarchy.HierarchyOptions:
    tol = dict(prob.tolerances)
    for key in ("tol_gap", "tol_feas", "tol_flat"):
        v = getattr(args, key, None)
        if v is not None:
            tol[key] = v
    opts = hierarchy.HierarchyOptions(parallel=getattr(args, "parallel", False))
    if "tol_feas" in tol:
        opts.sdp.feas_tol = tol["tol_feas"]
    if "tol_gap" in tol:
        opts.gap_tol = tol["tol_gap"]
    if "tol_flat" in tol:
        opts.flat_tol = tol["tol_flat"]
    return opts


def solve_problem(prob: ProblemFile, t_min: int, t_max: int, opts: hierarchy.HierarchyOptions,
                  seed: int = 0, progress=None) -> dict:
    """Run the hierarchy and collect everything the reports need."""
    start = time.perf_counter()
    rep = hierarchy.run(prob.objective, prob.module, t_min, t_max, opts, progress)
    out = {"report": rep, "certificate": None, "certificate_order": None, "atoms": None,
           "atoms_order": None}
    last = rep.last_optimal
    if last is not None:
        try:
            out["certificate"] = certify.extract_certificate(last)
            out["certificate_order"] = last.t
        except certify.CertificateQualityError:
            pass
        if last.flat:
            try:
                ops = certify.gns_operators(last.moments, last.t, opts.flat_tol)
                out["atoms"] = certify.extract_atoms(ops, prob.module, seed=seed)
                out["atoms_order"] = last.t
            except (certify.ExtractionError, certify.DegenerateFunctionalError):
                pass
    out["seconds"] = time.perf_counter() - start
    return out


def report_document(prob: ProblemFile, res: dict) -> dict:
    rep = res["report"]
    doc = {
        "schema": "measos-report/1",
        "problem": {
            "d": prob.space.d,
            "m": prob.space.m,
            "names": list(prob.space.names),
            "objective": format_poly(prob.objective, 12),
            "generators": [format_poly(g, 12) for g in prob.generators],
            "epsilon": _g(prob.epsilon),
        },
        "orders": [
            {"t": r.t, "status": str(r.status), "bound": _g(r.lower_bound), "flat": r.flat,
             "rank": r.ranks[0], "rank_prev": r.ranks[1]}
            for r in rep.results
        ],
        "best_bound": _g(rep.best_bound),
        "stop_reason": str(rep.stop_reason),
        "certificate": None,
        "atoms": None,
    }
    cert = res["certificate"]
    if cert is not None:
        doc["certificate"] = {
            "order": res["certificate_order"],
            "lambda": _g(cert.lam),
            "residual_norm": _g(cert.residual_norm),
            "squares": [
                {"weight": k, "index": j + 1, "poly": format_poly(g, 12)}
                for k, gs in enumerate(cert.squares) for j, g in enumerate(gs)
            ],
        }
    atoms = res["atoms"]
    if atoms is not None:
        doc["atoms"] = {
            "order": res["atoms_order"],
            "reliable": bool(atoms.reliable),
            "points": [[_g(v) for v in p] for p in atoms.points],
            "weights": [_g(w) for w in atoms.weights],
        }
    return doc


def report_text(prob: ProblemFile, res: dict) -> str:
    rep = res["report"]
    lines = [f"objective: {format_poly(prob.objective, 12)}",
             f"best_bound: {rep.best_bound:.12g}",
             f"stop_reason: {rep.stop_reason}"]
    cert = res["certificate"]
    if cert is not None:
        lines.append(f"certificate (t={res['certificate_order']}): lambda={cert.lam:.12g} "
                     f"residual_norm={cert.residual_norm:.3g}")
    atoms = res["atoms"]
    if atoms is not None:
        lines.append(f"atoms (t={res['atoms_order']}, reliable={str(atoms.reliable).lower()}):")
        for p, w in zip(atoms.points, atoms.weights):
            coords = ", ".join(f"{n}={v:.8g}" for n, v in zip(prob.space.names, p))
            lines.append(f"  weight={w:.8g}  {coords}")
    lines.append(f"time: {res['seconds']:.3f}s")
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    prob = _load(args.problem, args)
    t_min, t_max = _orders(prob, args)
    opts = _options(prob, args)
    progress_stream = sys.stderr if args.json else sys.stdout
    res = solve_problem(prob, t_min, t_max, opts, seed=args.seed,
                        progress=lambda s: print(s, file=progress_stream))
    if args.cert_out and res["certificate"] is not None:
        with open(args.cert_out, "w") as fh:
            fh.write(certify.format_certificate(res["certificate"]))
    if args.json:
        sys.stdout.write(json.dumps(report_document(prob, res), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(report_text(prob, res))
    rep = res["report"]
    return EXIT_SOLVER if rep.stop_reason == hierarchy.StopReason.SOLVER_FAILURE else EXIT_OK


def cmd_check_cert(args) -> int:
    prob = _load(args.problem, args)
    try:
        with open(args.certificate) as fh:
            cert = certify.parse_certificate(fh.read(), prob.space)
    except OSError as exc:
        raise InputError(str(exc)) from None
    except PolySyntaxError as exc:
        raise InputError(f"{args.certificate}: {exc}") from None
    try:
        norm = certify.verify_certificate(prob.objective, cert, prob.module)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    print(f"residual_norm {norm:.12g}")
    return EXIT_OK if norm <= args.tol else EXIT_RESIDUAL


def cmd_sample(args) -> int:
    prob = _load(args.problem, args)
    ev = prob.evaluator()
    if ev is None and prob.space.m:
        raise InputError("sampling needs an evaluator for every h-variable")
    radius = math.sqrt(prob.module.radius_sq)
    S = sample_positivity_set(prob.module, ev, GridSpec(radius / args.grid))
    print(" ".join(prob.space.names))
    for p in S.points:
        print(" ".join(f"{v:.12g}" for v in p))
    if S.skipped:
        print(f"# skipped {S.skipped} points where an evaluator failed", file=sys.stderr)
    return EXIT_OK


def cmd_export_sdp(args) -> int:
    prob = _load(args.problem, args)
    t, _ = _orders(prob, args)
    rel = hierarchy.build_relaxation(prob.objective, prob.module, t)
    text = to_sdpa(rel.problem, comment=f"moment relaxation order {t}")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="measos", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("problem", help="problem file")
        p.add_argument("--eps", type=float, default=None, help="override archimedean epsilon")

    def orders(p):
        p.add_argument("--orders", default=None, help="relaxation orders 'A..B'")

    p = sub.add_parser("solve", help="run the moment/SOS hierarchy")
    common(p)
    orders(p)
    p.add_argument("--tol-gap", dest="tol_gap", type=float, default=None)
    p.add_argument("--tol-feas", dest="tol_feas", type=float, default=None)
    p.add_argument("--tol-flat", dest="tol_flat", type=float, default=None)
    p.add_argument("--seed", type=int, default=0, help="seed for atom extraction")
    p.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    p.add_argument("--cert-out", default=None, help="write the certificate to this file")
    p.add_argument("--parallel", action="store_true", help="solve orders concurrently")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check-cert", help="verify a certificate against a problem")
    common(p)
    p.add_argument("certificate")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_check_cert)

    p = sub.add_parser("sample", help="print a grid sample of the positivity set")
    common(p)
    p.add_argument("--grid", type=int, default=20, help="grid intervals per ball radius")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("export-sdp", help="write the relaxation in SDPA sparse format")
    common(p)
    orders(p)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_export_sdp)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, hierarchy.OrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
