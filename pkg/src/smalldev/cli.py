"""Command-line entry point.

Exit codes: 0 success, 1 a margin or equality check failed, 2 bad usage or input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from smalldev import phi as ph
from smalldev.bounds import implication_margin, proof_chain, samuels_term
from smalldev.exact import BudgetExceeded, DEFAULT_BUDGET, exact_prob_below, monte_carlo_below
from smalldev.explorer import (
    CONCAVITY_TOL,
    MARGIN_TOL,
    SAMPLERS,
    LemmaGrid,
    SearchConfig,
    SweepConfig,
    search_counterexample,
    sweep_implication,
    sweep_lemmas,
)
from smalldev.extremal import (
    feige_extremal,
    iid_closed_form,
    iid_extremal,
    samuels_extremal,
    verify_extremal_equality,
)
from smalldev.model import (
    RATIONAL,
    ModelError,
    delta_from_dict,
    encode_number,
    instance_from_dict,
    instance_to_dict,
    make_delta,
    make_weight_vector,
)

SEARCH_TOL = 1e-9


class UsageError(Exception):
    pass


def parse_weights(text: str) -> list:
    """Comma/whitespace separated list, or ``@path`` to read one (JSON list also accepted)."""
    if text.startswith("@"):
        content = Path(text[1:]).read_text().strip()
        if content.startswith("["):
            return [str(x) for x in json.loads(content)]
        text = content
    parts = [p for p in text.replace("\n", ",").replace(" ", ",").split(",") if p]
    if not parts:
        raise UsageError("empty weight list")
    return parts


def _weights(args):
    return make_weight_vector(parse_weights(args.weights), normalize=args.normalize, mode=args.mode)


def _load_instance(args):
    try:
        data = json.loads(Path(args.file).read_text())
    except json.JSONDecodeError as exc:
        raise ModelError("bad-json", str(exc)) from exc
    if isinstance(data, dict) and "instance" in data:
        data = data["instance"]
    inst = instance_from_dict(data)
    d = make_delta(args.delta, inst.mode) if args.delta is not None else delta_from_dict(data)
    if d is None:
        raise UsageError("no delta given on the command line or in the instance file")
    return inst, d


# --- subcommands: each returns (payload, csv_rows, ok) ----------------------


def cmd_bounds(args):
    w = _weights(args)
    d = make_delta(args.delta, args.mode)
    rep = implication_margin(w, d)
    rows = [{"index": i, "term": encode_number(t)} for i, t in enumerate(rep.per_index_terms, start=1)]
    return rep.to_dict(), rows, rep.implication_margin >= -args.tolerance


def cmd_chain(args):
    w = _weights(args)
    d = make_delta(args.delta, args.mode)
    chains = proof_chain(w, d, all_indices=args.all_indices)
    if not isinstance(chains, list):
        chains = [chains]
    rows, ok = [], True
    for ch in chains:
        for k, step in enumerate(ch.steps):
            rows.append({"index": ch.index, "label": step.label, "lhs": step.lhs, "rhs": step.rhs, "margin": step.margin})
            if k == 0:
                ok &= abs(step.margin) <= max(args.tolerance, 1e-10)
            else:
                ok &= step.margin >= -args.tolerance
    payload = chains[0].to_dict() if len(chains) == 1 else {"chains": [c.to_dict() for c in chains]}
    return payload, rows, ok


def _floats(text):
    return [float(x) for x in text.split(",") if x]


def cmd_phi(args):
    rows = []
    if args.mu is not None:
        for mu in _floats(args.mu):
            for rho in _floats(args.rho):
                row = {"mu": mu, "rho": rho, "phi": ph.phi(mu, rho), "lemma3_margin": ph.check_lemma3(mu, rho)}
                if 0 < mu < 1:
                    row["g_prime"] = ph.g_prime_lemma3(mu, rho)
                    row["partial2_phi"] = ph.partial2_phi(mu, rho)
                rows.append(row)
    if args.alpha is not None:
        for a in _floats(args.alpha):
            for t in _floats(args.t):
                row = {"alpha": a, "t": t, "h_alpha": ph.h_alpha(a, t)}
                if 0 < t < 1:
                    row["eta"] = ph.eta(a, t)
                    row["eta_prime"] = ph.eta_prime(a, t)
                rows.append(row)
    if args.mu is None and args.alpha is None:
        raise UsageError("phi needs --mu/--rho or --alpha/--t")
    return {"points": rows}, rows, True


def cmd_lemmas(args):
    tol = args.tolerance
    rep = sweep_lemmas(LemmaGrid(), tolerance=tol, concavity_tolerance=args.concavity_tolerance)
    rows = rep.to_dict()["checks"]
    return rep.to_dict(), rows, rep.passed


def cmd_exact(args):
    inst, d = _load_instance(args)
    res = exact_prob_below(inst, d, budget=args.budget, prune=not args.no_prune)
    out = res.to_dict()
    return out, [out], True


def cmd_mc(args):
    inst, d = _load_instance(args)
    res = monte_carlo_below(inst, d, args.samples, args.seed)
    out = res.to_dict()
    return out, [out], True


def cmd_extremal(args):
    d = make_delta(args.delta, args.mode)
    if args.iid:
        if args.n is None:
            raise UsageError("--iid needs --n")
        inst = iid_extremal(args.n, d)
        expected = iid_closed_form(args.n, d.delta)
        kind = "iid"
    else:
        if args.weights is None:
            raise UsageError("--feige/--samuels need --weights")
        w = _weights(args)
        if args.samuels is not None:
            inst = samuels_extremal(w, d, args.samuels)
            expected = samuels_term(w, d, args.samuels)
            kind = f"samuels-{args.samuels}"
        else:
            inst = feige_extremal(w, d)
            expected = d.delta / (d.delta + w.max_weight)
            kind = "feige"
    payload = {"construction": kind, "instance": instance_to_dict(inst, d)}
    rows = []
    ok = True
    if args.verify:
        res = exact_prob_below(inst, d)
        prob = res.prob_below
        if args.mode == RATIONAL:
            passed = prob == expected
        else:
            passed = abs(prob - expected) <= max(args.tolerance, 1e-12)
        payload["verify"] = {
            "prob_below": encode_number(prob),
            "atoms_at_threshold": encode_number(res.atoms_at_threshold),
            "expected": encode_number(expected),
            "passed": passed,
        }
        rows.append({"construction": kind, **payload["verify"]})
        ok = passed
    if args.verify_all:
        if args.weights is None:
            raise UsageError("--verify-all needs --weights")
        rep = verify_extremal_equality(_weights(args), d)
        payload["verify_all"] = rep.to_dict()
        rows.extend(r.to_dict() for r in rep.rows)
        ok &= rep.passed
    return payload, rows, ok


def cmd_sweep(args):
    samplers = SAMPLERS if args.sampler in (None, "all") else (args.sampler,)
    cfg = SweepConfig(
        instance_count=args.count,
        n_range=(args.n_min, args.n_max),
        delta_range=(args.delta_min, args.delta_max),
        seed=args.seed,
        weight_sampler=samplers,
        tolerance=args.tolerance,
    )
    rep = sweep_implication(cfg)
    return rep, None, not rep.failures


def cmd_search(args):
    if args.mode == RATIONAL:
        raise UsageError("search runs in float mode")
    w = _weights(args)
    d = make_delta(args.delta)
    cfg = SearchConfig(
        restarts=args.restarts,
        max_evals=args.max_evals,
        reflection=args.reflection,
        expansion=args.expansion,
        contraction=args.contraction,
        shrink=args.shrink,
        seed=args.seed,
    )
    rep = search_counterexample(w, d, cfg)
    tol = args.tolerance if args.tolerance_given else SEARCH_TOL
    out = rep.to_dict()
    return out, out["runs"], rep.gap_vs_samuels >= -tol


COMMANDS = {
    "bounds": cmd_bounds,
    "chain": cmd_chain,
    "phi": cmd_phi,
    "lemmas": cmd_lemmas,
    "exact": cmd_exact,
    "mc": cmd_mc,
    "extremal": cmd_extremal,
    "sweep": cmd_sweep,
    "search": cmd_search,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["rational", "float"], default="float")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--tolerance", type=float, default=None,
                        help=f"margin tolerance (default {MARGIN_TOL:g})")

    parser = argparse.ArgumentParser(prog="smalldev", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def weights_args(p, required=True):
        p.add_argument("--weights", required=required, help="comma list, rationals as p/q, or @file")
        p.add_argument("--normalize", action="store_true", help="divide weights by their sum")

    p = sub.add_parser("bounds", parents=[common], help="Samuels and Feige bounds")
    weights_args(p)
    p.add_argument("--delta", required=True)

    p = sub.add_parser("chain", parents=[common], help="inequality chain between the bounds")
    weights_args(p)
    p.add_argument("--delta", required=True)
    p.add_argument("--all-indices", action="store_true")

    p = sub.add_parser("phi", parents=[common], help="evaluate Phi, h_alpha, eta")
    p.add_argument("--mu")
    p.add_argument("--rho", default="1")
    p.add_argument("--alpha")
    p.add_argument("--t", default="0.5")

    p = sub.add_parser("lemmas", parents=[common], help="grid checks of the Phi lemmas")
    p.add_argument("--concavity-tolerance", type=float, default=CONCAVITY_TOL)

    for name, helptext in (("exact", "exact P(Z < T)"), ("mc", "Monte Carlo P(Z < T)")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("file", help="instance JSON")
        p.add_argument("--delta")
        if name == "exact":
            p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
            p.add_argument("--no-prune", action="store_true")
        else:
            p.add_argument("--samples", type=int, default=10**6)

    p = sub.add_parser("extremal", parents=[common], help="equality constructions")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--feige", action="store_true")
    which.add_argument("--samuels", type=int, metavar="INDEX")
    which.add_argument("--iid", action="store_true")
    weights_args(p, required=False)
    p.add_argument("--n", type=int)
    p.add_argument("--delta", required=True)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--verify-all", action="store_true", help="check every Samuels index and the Feige case")

    p = sub.add_parser("sweep", parents=[common], help="random check that Samuels dominates Feige")
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--delta-min", type=float, default=1e-4)
    p.add_argument("--delta-max", type=float, default=10.0)
    p.add_argument("--sampler", choices=list(SAMPLERS) + ["all"], default="all")
    p.add_argument("--records", action="store_true", help="include every instance in JSON output")

    p = sub.add_parser("search", parents=[common], help="two-point counterexample search")
    weights_args(p)
    p.add_argument("--delta", required=True)
    p.add_argument("--restarts", type=int, default=50)
    p.add_argument("--max-evals", type=int, default=1500)
    p.add_argument("--reflection", type=float, default=1.0)
    p.add_argument("--expansion", type=float, default=2.0)
    p.add_argument("--contraction", type=float, default=0.5)
    p.add_argument("--shrink", type=float, default=0.5)
    return parser


def _to_csv(rows) -> str:
    buf = io.StringIO()
    if rows:
        fields = []
        for r in rows:
            fields.extend(k for k in r if k not in fields)
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        for r in rows:
            writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def _json_default(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return encode_number(x)


def render(args, payload, rows) -> str:
    if args.command == "sweep":
        if args.format == "csv":
            return payload.to_csv()
        payload = payload.to_dict(include_records=args.records)
    if args.format == "csv":
        return _to_csv(rows)
    return json.dumps(payload, indent=2, default=_json_default) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.tolerance_given = args.tolerance is not None
    if args.tolerance is None:
        args.tolerance = MARGIN_TOL
    try:
        payload, rows, ok = COMMANDS[args.command](args)
        text = render(args, payload, rows)
    except (ModelError, UsageError, ValueError, IndexError, BudgetExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
