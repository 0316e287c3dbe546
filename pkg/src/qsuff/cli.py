"""Command-line interface: ``qsuff <command> ...``.

Every check prints a JSON verdict report on standard output.  Exit codes:
0 when the checked statement holds, 1 for usage, I/O or schema errors,
2 when a margin falls below its tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path


from . import campaigns
from .divergences import alpha_divergence, classical_kl, rel_entropy, von_neumann_entropy
from .golden_thompson import fs_scan, gt_gap
from .io import InstanceError, jsonable, load, to_document, verdict_report
from .measurements import (
    aposteriori_gap,
    example1,
    example1_entropy,
    holevo_bound_check,
    induced_dist,
    lemma1_diagnostics,
    support_class_diagnostics,
)
from .modular import check_operator_chain, replay_monotonicity
from .ssa import (
    check_theorem3,
    markov_from_hamiltonians,
    petz_recovery,
    random_markov_classical,
    random_markov_hamiltonians,
    rss_check,
    ssa_gap,
)
from .states import PSD_TOL, channel_validate, is_invertible, regularize
from .sufficiency import DEFAULT_T_SAMPLES, GAP_TOL, RESIDUAL_TOL, check_theorem2

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path, kind):
    obj, doc = load(path)
    if doc["kind"] != kind:
        raise InstanceError(f"{path}: expected a {kind!r} instance, got {doc['kind']!r}")
    return obj, doc


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _dims3(text: str) -> tuple:
    try:
        dims = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected d1,d2,d3, got {text!r}")
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError("expected three positive dimensions d1,d2,d3")
    return dims


def _dim_range(text: str) -> tuple:
    try:
        lo, hi = (int(v) for v in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a range lo..hi, got {text!r}")
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("expected 1 <= lo <= hi")
    return lo, hi


class _Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.start) * 1e3


def _emit(report: dict) -> int:
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_VIOLATION if report.get("verdict") == "violation" else EXIT_OK


def _report(args, check, docs, quantities, thresholds, verdict, timer, seed=None):
    ms = None if args.no_runtime else round(timer.ms, 3)
    return verdict_report(check, docs, quantities, thresholds, verdict, ms, seed)


# -- entropy -----------------------------------------------------------------

def cmd_entropy(args):
    with _Timer() as tm:
        if args.kind == "vn":
            if len(args.files) != 1:
                raise UsageError("entropy vn takes one density file")
            D, doc = _load(args.files[0], "density")
            docs = [doc]
            q = {"entropy": von_neumann_entropy(D)}
        else:
            if len(args.files) != 2:
                raise UsageError(f"entropy {args.kind} takes two density files")
            (D1, d1), (D2, d2) = (_load(f, "density") for f in args.files)
            if D1.shape != D2.shape:
                raise UsageError("density matrices have different dimensions")
            docs = [d1, d2]
            if args.kind == "rel":
                q = {"relative_entropy": rel_entropy(D1, D2)}
            else:
                if args.alpha is None:
                    raise UsageError("entropy alpha needs --alpha")
                q = {"alpha": args.alpha, "alpha_divergence": alpha_divergence(D1, D2, args.alpha)}
    value = next(v for k, v in q.items() if k != "alpha")
    verdict = "violation" if (not math.isinf(value) and value < -args.tol) else "holds"
    return _emit(_report(args, f"entropy.{args.kind}", docs, q, {"nonnegativity": args.tol},
                         verdict, tm))


# -- channels ----------------------------------------------------------------

def cmd_channel(args):
    if args.action == "validate":
        with _Timer() as tm:
            T, doc = _load(args.files[0], "channel")
            rep = channel_validate(T)
        q = {"trace_preserving": rep.trace_preserving, "completely_positive": rep.completely_positive,
             "trace_residual": rep.tp_residual, "choi_min_eigenvalue": rep.choi_min_eigenvalue}
        out = _report(args, "channel.validate", [doc], q, {"psd": PSD_TOL, "trace": PSD_TOL},
                      "holds" if rep.valid else "violation", tm)
        print(json.dumps(out, indent=2, sort_keys=True))
        # an invalid channel is an input error, not a failed theorem
        return EXIT_OK if rep.valid else EXIT_ERROR
    if len(args.files) != 2:
        raise UsageError("channel apply takes a channel file and a density file")
    T, _ = _load(args.files[0], "channel")
    D, _ = _load(args.files[1], "density")
    if D.shape[0] != T.in_dim:
        raise UsageError(f"state dimension {D.shape[0]} != channel input dimension {T.in_dim}")
    out = T(D)
    out = 0.5 * (out + out.conj().T)
    print(json.dumps(to_document(out), sort_keys=True))
    return EXIT_OK


# -- monotonicity and equality -------------------------------------------------

def _pair_and_channel(args):
    (D1, d1), (D2, d2) = _load(args.D1, "density"), _load(args.D2, "density")
    T, dc = _load(args.chan, "channel")
    if D1.shape != D2.shape or D1.shape[0] != T.in_dim:
        raise UsageError("states and channel input dimension disagree")
    return D1, D2, T, [d1, d2, dc]


def cmd_monotonicity(args):
    with _Timer() as tm:
        D1, D2, T, docs = _pair_and_channel(args)
        regularized = False
        if args.regularize is not None:
            if not 0 < args.regularize < 1:
                raise UsageError("--regularize needs 0 < eps < 1")
            D1, D2 = regularize(D1, args.regularize), regularize(D2, args.regularize)
            regularized = True
        s_in = rel_entropy(D1, D2)
        s_out = rel_entropy(T(D1), T(D2))
        margin = math.inf if math.isinf(s_in) else s_in - s_out
        q = {"S_input": s_in, "S_output": s_out, "margin": margin,
             "regularized": regularized, "regularize_eps": args.regularize}
        worst = margin
        if args.replay:
            TD1, TD2 = T(D1), T(D2)
            for name, M in (("D1", D1), ("D2", D2), ("T(D1)", TD1), ("T(D2)", TD2)):
                if not is_invertible(0.5 * (M + M.conj().T)):
                    raise UsageError(f"--replay needs invertible states; {name} is singular "
                                     "(use --regularize EPS)")
            chain = check_operator_chain(D1, D2, T, tol=args.tol)
            rep = replay_monotonicity(D1, D2, T, quad_tol=args.quad_tol)
            q["replay"] = {
                "quadrature_S_input": rep.lhs, "quadrature_S_output": rep.rhs,
                "quadrature_error": rep.quadrature_error,
                "worst_integrand_margin": rep.worst_integrand_margin,
                "contraction_norm": chain.v_norm,
                "worst_operator_margin": chain.worst_margin,
                "worst_uncorrected_operator_margin": float(chain.literal_margins.min()),
            }
            worst = min(worst, rep.worst_integrand_margin, chain.worst_margin,
                        1 + args.tol - chain.v_norm)
    verdict = "violation" if worst < -args.tol else "holds"
    return _emit(_report(args, "monotonicity", docs, q,
                         {"violation": args.tol, "quadrature": args.quad_tol}, verdict, tm))


def _verdict_dict(v):
    return {"entropy_gap": v.entropy_gap, "condition1_residual": v.condition1_residual,
            "condition2_residual": v.condition2_residual, "equal": v.equal,
            "conditions_hold": v.conditions_hold, "consistent": v.consistent,
            "condition1_by_t": {repr(t): r for t, r in v.condition1_by_t.items()}}


def _equality_verdict(v, tol):
    if v.entropy_gap < -tol or not v.consistent:
        return "violation"
    return "equality" if v.equal else "holds"


def cmd_equality(args):
    with _Timer() as tm:
        D1, D2, T, docs = _pair_and_channel(args)
        v = check_theorem2(D1, D2, T, t_samples=args.t, tau=args.gap_tol, tau_res=args.res_tol)
    return _emit(_report(args, "equality.theorem2", docs, _verdict_dict(v),
                         {"gap": args.gap_tol, "residual": args.res_tol, "violation": args.tol},
                         _equality_verdict(v, args.tol), tm))


# -- tripartite states ---------------------------------------------------------

def cmd_ssa(args):
    with _Timer() as tm:
        state, doc = _load(args.file, "tripartite")
        thresholds = {"violation": args.tol, "gap": args.gap_tol}
        if args.action == "check":
            rss = rss_check(state, replay=args.replay, quad_tol=args.quad_tol)
            q = {"ssa_gap": rss.ssa_gap, "relative_entropy_upper": rss.upper,
                 "relative_entropy_lower": rss.lower, "identity_residual": rss.identity_residual}
            worst = rss.ssa_gap
            if rss.replay is not None:
                q["replay_quadrature_error"] = rss.replay.quadrature_error
                q["replay_worst_integrand_margin"] = rss.replay.worst_integrand_margin
                worst = min(worst, rss.replay.worst_integrand_margin)
            if rss.identity_residual > args.identity_tol:
                worst = -math.inf
            thresholds["identity"] = args.identity_tol
            verdict = ("violation" if worst < -args.tol
                       else "equality" if rss.ssa_gap <= args.gap_tol else "holds")
        elif args.action == "theorem3":
            if not state.invertible:
                raise UsageError("ssa theorem3 needs an invertible state")
            v = check_theorem3(state, tau=args.gap_tol, tau_res=args.res_tol)
            q = _verdict_dict(v)
            thresholds["residual"] = args.res_tol
            verdict = _equality_verdict(v, args.tol)
        else:
            if not state.invertible:
                raise UsageError("ssa recover needs an invertible state")
            g = petz_recovery(state, literal_E=args.literal_E)
            gap = ssa_gap(state)
            q = {"literal_E": args.literal_E, "ssa_gap": gap,
                 "choi_min_eigenvalue": g.choi_min_eigenvalue(),
                 "unital_residual": g.unital_residual(),
                 "restriction_residual_H2": g.restriction_residual("2"),
                 "restriction_residual_H3": g.restriction_residual("3"),
                 "dual_residual": g.dual_residual(),
                 "dual_marginal_residual": g.dual_marginal_residual()}
            # complete positivity always holds; unitality and the dual
            # identity hold for the unnormalized map only
            bad = q["choi_min_eigenvalue"] < -args.tol
            if not args.literal_E:
                bad |= q["unital_residual"] > args.identity_tol
                bad |= q["dual_residual"] > args.identity_tol
            thresholds["identity"] = args.identity_tol
            verdict = ("violation" if bad
                       else "equality" if gap <= args.gap_tol else "holds")
    return _emit(_report(args, f"ssa.{args.action}", [doc], q, thresholds, verdict, tm))


def cmd_markov(args):
    if args.hamiltonian:
        H = random_markov_hamiltonians(args.dims, args.seed, scale=args.scale)
        state = markov_from_hamiltonians(*H)
    else:
        state = random_markov_classical(args.dims, args.seed)
    print(json.dumps(to_document(state), sort_keys=True))
    return EXIT_OK


# -- measurements ------------------------------------------------------------

def cmd_povm(args):
    with _Timer() as tm:
        (D1, d1), (D2, d2) = _load(args.D1, "density"), _load(args.D2, "density")
        E, de = _load(args.povm, "povm")
        if not D1.shape == D2.shape == (E.dim, E.dim):
            raise UsageError("states and POVM dimensions disagree")
        gap = aposteriori_gap(D1, D2, E)
        q = {"S_quantum": rel_entropy(D1, D2),
             "S_measured": classical_kl(induced_dist(D1, E), induced_dist(D2, E)),
             "gap": gap}
        equal = gap <= args.gap_tol
        if args.diagnose:
            q["diagnostics"] = _diagnose(D1, D2, E, equal, args.gap_tol)
    if math.isnan(gap):
        verdict = "holds"
    else:
        verdict = "violation" if gap < -args.tol else "equality" if equal else "holds"
    return _emit(_report(args, "povm.posteriori", [d1, d2, de], q,
                         {"violation": args.tol, "gap": args.gap_tol}, verdict, tm))


def _diagnose(D1, D2, E, equal, tau):
    if not equal:
        return {"applicable": False, "reason": "no equality"}
    if not is_invertible(D2):
        return {"applicable": False, "reason": "D2 is singular"}
    lem = lemma1_diagnostics(D1, D2, E, tau=tau)
    out = {"applicable": True, "states_commutator": lem.states_commutator,
           "effects_commutator": lem.effects_commutator, "lambdas": lem.lambdas,
           "fit_residuals": lem.fit_residuals, "fidelity_residual": lem.fidelity_residual}
    if lem.commutes():
        sc = support_class_diagnostics(D1, D2, E)
        out["classes"] = sc.classes
        out["class_ratios"] = sc.ratios
        out["max_projection_residual"] = sc.max_projection_residual
        out["max_ratio_spread"] = sc.max_ratio_spread
    return out


def cmd_example1(args):
    with _Timer() as tm:
        try:
            D1, D2, E = example1(args.mu, args.x, complex(args.z, args.z_imag))
        except ValueError as exc:
            raise UsageError(str(exc))
        gap = aposteriori_gap(D1, D2, E)
        s = rel_entropy(D1, D2)
        q = {"mu": args.mu, "x": args.x, "z": [args.z, args.z_imag], "gap": gap,
             "S_quantum": s, "S_closed_form": example1_entropy(args.mu),
             "diagnostics": _diagnose(D1, D2, E, gap <= args.gap_tol, args.gap_tol)}
    docs = [to_document(D1), to_document(D2), to_document(E)]
    verdict = "violation" if gap < -args.tol else "equality" if gap <= args.gap_tol else "holds"
    return _emit(_report(args, "example1", docs, q, {"violation": args.tol, "gap": args.gap_tol},
                         verdict, tm))


def cmd_holevo(args):
    with _Timer() as tm:
        e, de = _load(args.ensemble, "ensemble")
        T, dc = _load(args.chan, "channel")
        E, dp = _load(args.povm, "povm")
        if T.in_dim != e.dim or T.out_dim != E.dim:
            raise UsageError("ensemble, channel and POVM dimensions are incompatible")
        rep = holevo_bound_check(e, T, E, tau=args.gap_tol)
        q = {"accessible": rep.lhs, "holevo": rep.rhs, "gap": rep.gap,
             "form_residual": rep.form_residual, "lemma1_applicable": rep.lemma1_applicable}
    verdict = ("violation" if rep.gap < -args.tol
               else "equality" if rep.gap <= args.gap_tol else "holds")
    return _emit(_report(args, "holevo", [de, dc, dp], q,
                         {"violation": args.tol, "gap": args.gap_tol}, verdict, tm))


# -- Golden-Thompson ---------------------------------------------------------

def cmd_gt(args):
    with _Timer() as tm:
        (A, B), doc = _load(args.file, "hermitian_pair")
        gap = gt_gap(A, B)
        scan = fs_scan(A, B, p_grid=args.grid)
        q = {"gap": gap, "p_grid": scan.p_grid, "values": scan.values,
             "min_increment": scan.min_increment, "limit_estimate": scan.limit_estimate,
             "trace_exp_sum": scan.exact_limit, "limit_error": scan.limit_error,
             "commutator": scan.commutator, "classification": scan.classification}
    if args.csv:
        Path(args.csv).write_text(scan.to_csv())
    worst = min(gap, scan.min_increment)
    verdict = ("violation" if worst < -args.tol
               else "equality" if scan.commutator <= args.gap_tol else "holds")
    return _emit(_report(args, "gt", [doc], q, {"violation": args.tol, "commutator": args.gap_tol},
                         verdict, tm))


# -- campaigns ---------------------------------------------------------------

def cmd_campaign(args):
    start = time.perf_counter()
    res = campaigns.run_campaign(args.check, args.n, dims=args.dims, seed=args.seed,
                                 alpha=args.alpha, threads=args.threads)
    report = res.report()
    print(json.dumps(jsonable(report), indent=2, sort_keys=True))
    # timing goes to stderr so that reports stay byte-identical
    print(f"runtime_ms {(time.perf_counter() - start) * 1e3:.1f}", file=sys.stderr)
    return EXIT_VIOLATION if res.violations else EXIT_OK


# -- parser ------------------------------------------------------------------

def _no_runtime(p):
    p.add_argument("--no-runtime", action="store_true",
                   help="omit runtime_ms from the report so that it is reproducible")


def _common(p, gap=True, res=False, quad=False, identity=False):
    _no_runtime(p)
    p.add_argument("--tol", type=float, default=campaigns.VIOLATION_TOL,
                   help="a margin below -TOL is a violation (default %(default)g)")
    if gap:
        p.add_argument("--gap-tol", type=float, default=GAP_TOL,
                       help="gap at or below this counts as equality (default %(default)g)")
    if res:
        p.add_argument("--res-tol", type=float, default=RESIDUAL_TOL,
                       help="residual bound for the equality conditions (default %(default)g)")
    if quad:
        p.add_argument("--quad-tol", type=float, default=1e-8,
                       help="quadrature error tolerance (default %(default)g)")
    if identity:
        p.add_argument("--identity-tol", type=float, default=1e-8,
                       help="tolerance for exact identities (default %(default)g)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsuff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("entropy", help="entropy and divergences of density files")
    p.add_argument("kind", choices=["rel", "vn", "alpha"])
    p.add_argument("files", nargs="+")
    p.add_argument("--alpha", type=float)
    _common(p, gap=False)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("channel", help="validate or apply a channel")
    p.add_argument("action", choices=["validate", "apply"])
    p.add_argument("files", nargs="+")
    _no_runtime(p)
    p.set_defaults(func=cmd_channel)

    p = sub.add_parser("monotonicity", help="relative entropy under a channel")
    p.add_argument("action", choices=["check"])
    p.add_argument("D1")
    p.add_argument("D2")
    p.add_argument("chan")
    p.add_argument("--replay", action="store_true", help="also run the operator chain and quadrature")
    p.add_argument("--regularize", type=float, metavar="EPS")
    _common(p, gap=False, quad=True)
    p.set_defaults(func=cmd_monotonicity)

    p = sub.add_parser("equality", help="equality conditions for a channel")
    p.add_argument("action", choices=["theorem2"])
    p.add_argument("D1")
    p.add_argument("D2")
    p.add_argument("chan")
    p.add_argument("--t", type=_floats, default=list(DEFAULT_T_SAMPLES),
                   help="comma-separated sample times")
    _common(p, res=True)
    p.set_defaults(func=cmd_equality)

    p = sub.add_parser("ssa", help="strong subadditivity and recovery")
    p.add_argument("action", choices=["check", "theorem3", "recover"])
    p.add_argument("file")
    p.add_argument("--literal-E", action="store_true", dest="literal_E",
                   help="use the normalized partial trace in the recovery map")
    p.add_argument("--replay", action="store_true", help="replay the quadrature in ssa check")
    _common(p, res=True, quad=True, identity=True)
    p.set_defaults(func=cmd_ssa)

    p = sub.add_parser("markov", help="generate Markov states")
    p.add_argument("action", choices=["gen"])
    p.add_argument("--dims", type=_dims3, required=True)
    p.add_argument("--seed", type=int, default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--classical", action="store_true")
    g.add_argument("--hamiltonian", action="store_true")
    p.add_argument("--scale", type=float, default=1.0)
    p.set_defaults(func=cmd_markov)

    p = sub.add_parser("povm", help="measured relative entropy")
    p.add_argument("action", choices=["posteriori"])
    p.add_argument("D1")
    p.add_argument("D2")
    p.add_argument("povm")
    p.add_argument("--diagnose", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_povm)

    p = sub.add_parser("example1", help="the qutrit measurement that keeps all relative entropy")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--z", type=float, required=True, help="real part of z")
    p.add_argument("--z-imag", type=float, default=0.0)
    _common(p)
    p.set_defaults(func=cmd_example1)

    p = sub.add_parser("holevo", help="Holevo bound for an ensemble, channel and POVM")
    p.add_argument("ensemble")
    p.add_argument("chan")
    p.add_argument("povm")
    _common(p)
    p.set_defaults(func=cmd_holevo)

    p = sub.add_parser("gt", help="Golden-Thompson gap and the interpolating scan")
    p.add_argument("action", choices=["check"])
    p.add_argument("file")
    p.add_argument("--grid", type=_floats, default=[0.25, 0.5, 1.0, 2.0, 4.0])
    p.add_argument("--csv", metavar="PATH", help="write the scan as CSV")
    _common(p)
    p.set_defaults(func=cmd_gt)

    p = sub.add_parser("campaign", help="seeded batch of random checks")
    p.add_argument("--check", required=True, choices=sorted(campaigns.CHECKS))
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--dims", type=_dim_range, default=(2, 6), help="dimension range lo..hi")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float)
    p.add_argument("--threads", type=int, help="worker threads (default QSUFF_THREADS or 1)")
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InstanceError, UsageError) as exc:
        print(f"qsuff: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"qsuff: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
