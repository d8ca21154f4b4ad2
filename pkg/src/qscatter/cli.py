"""Command-line front end.  Every command writes one JSON artifact.

Exit codes: 0 success, 1 verification failure, 2 input error,
3 budget or genericity failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from itertools import product as iproduct

from . import __version__
from .broken_lines import broken_lines, generic_point, structure_constant, theta, theta_product, window
from .cluster import (ChamberError, NotQuantizable, Seed, chamber_cluster_check, laurent_json, mid_theta,
                      principal_seed)
from .coeff_ring import ClassicalRing, PoleError, QuantumRing, ScaleError
from .frobenius import classical_frobenius_check, quantum_frobenius_check, tree_divisibility_check
from .lattice import GradedLattice, as_fraction, frac_str
from .scattering import GenericityError, check_consistency, scatter
from .torus import coeff_str
from .tropical import ntrop_invariance, scat_disks_check, tropfrob_coefficient, weight_vectors

OK, FAILED, INPUT_ERROR, BUDGET_ERROR = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _int_vec(text):
    try:
        return tuple(int(x) for x in text.split(",")) if text.strip() else ()
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad integer vector {text!r}") from e


def _frac_vec(text):
    try:
        return tuple(as_fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"bad rational vector {text!r}") from e


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read seed file {path}: {e}") from e


def _lattice(args):
    lat = GradedLattice.from_json(_load_json(args.seed))
    for v in (args.p or []) + ([args.n] if args.n else []):
        if len(v) != lat.rank:
            raise InputError(f"vector {v} does not have rank {lat.rank}")
    return lat


def _ring(lat, args):
    return ClassicalRing() if args.classical else QuantumRing(lat.scale)


def _diagram(lat, args, order=None):
    return scatter(lat, args.order if order is None else order, rng=args.rng, ring=_ring(lat, args))


def _point(diag, args):
    if args.Q is not None:
        if len(args.Q) != diag.dim:
            raise InputError(f"Q needs {diag.dim} active coordinates")
        return args.Q
    return generic_point(diag, args.rng)


def _series_json(s):
    return [{"exponent": list(n), "coeff": coeff_str(c)} for n, c in sorted(s.terms.items())]


def _need(value, flag):
    if value is None or value == []:
        raise InputError(f"{flag} is required for this command")
    return value


# commands; each returns (exit status, result dict)


def cmd_scatter(args):
    lat = _lattice(args)
    diag = _diagram(lat, args)
    rep = check_consistency(diag, rng=args.rng)
    out = diag.to_json()
    out["consistency"] = rep
    out["num_walls"] = len(diag.walls)
    return (OK if rep["pass"] else FAILED), out


def cmd_theta(args):
    lat = _lattice(args)
    p = _need(args.p, "--p")[0]
    diag = _diagram(lat, args)
    Q = _point(diag, args)
    th = theta(diag, p, Q, args.order)
    lines = [] if not any(lat.active_pi1(p)) else broken_lines(diag, p, Q, args.order)
    return OK, {"p": list(p), "Q": [frac_str(x) for x in Q], "theta": _series_json(th),
                "broken_lines": [b.to_json() for b in lines]}


def cmd_product(args):
    lat = _lattice(args)
    ps = _need(args.p, "--p")
    diag = _diagram(lat, args)
    Q = _point(diag, args)
    prod = theta_product(diag, ps, Q, args.order)
    return OK, {"factors": [list(p) for p in ps], "Q": [frac_str(x) for x in Q], "product": _series_json(prod)}


def cmd_alpha(args):
    lat = _lattice(args)
    ps = _need(args.p, "--p")
    if len(ps) != 2:
        raise InputError("alpha takes exactly two --p vectors")
    n = _need(args.n, "--n")
    diag = _diagram(lat, args)
    val, cert = structure_constant(diag, ps[0], ps[1], n, rng=args.rng)
    return OK, {"p1": list(ps[0]), "p2": list(ps[1]), "p": list(n), "alpha": coeff_str(val), "certificate": cert}


def cmd_trop_count(args):
    lat = _lattice(args)
    ps = _need(args.p, "--p")
    n = _need(args.n, "--n")
    ring = _ring(lat, args)
    Q = args.Q
    if Q is None:
        Q = generic_point(_diagram(lat, args), args.rng)
    total, rows = tropfrob_coefficient(lat, ps, n, Q, args.order, ring=ring, rng=args.rng, details=True)
    return OK, {"p": [list(p) for p in ps], "n": list(n), "Q": [frac_str(x) for x in Q],
                "value": coeff_str(total),
                "weight_vectors": [{"w": r["w"].to_json(), "ntrop": coeff_str(r["ntrop"]), "trees": r["trees"],
                                    "consistent": r["consistent"],
                                    "tree_data": [t.to_json(lat) for t in r["result"].trees]} for r in rows]}


def _tropfrob_combos(lat, order, limit):
    units = [v for v in iproduct((-1, 0, 1), repeat=lat.rank) if any(lat.active_pi1(v))]
    lists = [[p] for p in units] + [[p1, p2] for p1 in units for p2 in units]
    combos = []
    for pl in lists:
        base = tuple(map(sum, zip(*pl)))
        for n in window(lat, base, min(order, 2)):
            combos.append((pl, n))
    return combos[:limit]


def cmd_verify_tropfrob(args):
    lat = _lattice(args)
    ring = _ring(lat, args)
    diag = _diagram(lat, args)
    Q = _point(diag, args)
    ok = True
    rows = []
    for pl, n in _tropfrob_combos(lat, args.order, args.limit):
        trop, details = tropfrob_coefficient(lat, pl, n, Q, args.order, ring=ring, rng=args.rng, details=True)
        broken = theta_product(diag, pl, Q, args.order).coefficient(n)
        good = trop == broken and all(r["consistent"] for r in details)
        ok = ok and good
        rows.append({"p": [list(p) for p in pl], "n": list(n), "tropical": coeff_str(trop),
                     "broken_lines": coeff_str(broken), "pass": good})
    return (OK if ok else FAILED), {"Q": [frac_str(x) for x in Q], "combos": rows, "pass": ok}


def cmd_verify_tropinv(args):
    lat = _lattice(args)
    ring = _ring(lat, args)
    diag = _diagram(lat, args)
    ps = args.p or [next(v for v in iproduct((-1, 0, 1), repeat=lat.rank) if any(lat.active_pi1(v)))]
    Qs = [args.Q] if args.Q else [generic_point(diag, args.rng + i) for i in range(3)]
    ok = True
    rows = []
    for p in ps:
        for d in range(1, min(args.order, 3) + 1):
            for n in window(lat, tuple(0 for _ in p), d):
                if sum(n) != d:
                    continue
                for ww in weight_vectors(lat, n):
                    for Q in Qs:
                        agree, vals = ntrop_invariance(lat, [p], ww, Q, samples=3, ring=ring, rng=args.rng)
                        ok = ok and agree
                        rows.append({"p": list(p), "w": ww.to_json(), "Q": [frac_str(x) for x in Q],
                                     "ntrop": [coeff_str(v) for v in vals], "pass": agree})
    return (OK if ok else FAILED), {"rows": rows, "pass": ok}


def cmd_verify_scatdisks(args):
    lat = _lattice(args)
    diag = _diagram(lat, args)
    ok, rows = scat_disks_check(diag, rng=args.rng)
    return (OK if ok else FAILED), {"walls": rows, "pass": ok}


def cmd_verify_frobenius_classical(args):
    lat = _lattice(args)
    u = _need(args.p, "--p")[0]
    p = _need(args.prime, "--prime")
    diag = scatter(lat, args.order, rng=args.rng, ring=ClassicalRing())
    rep = classical_frobenius_check(diag, u, p, args.order, Q=args.Q, rng=args.rng)
    return (OK if rep.verdict else FAILED), rep.to_json()


def cmd_verify_frobenius_quantum(args):
    lat = _lattice(args)
    u = _need(args.p, "--p")[0]
    k = _need(args.root_order, "--root-order")
    if k % 2 == 0 or k < 1:
        raise InputError("--root-order must be a positive odd integer")
    diag = scatter(lat, args.order, rng=args.rng, ring=QuantumRing(lat.scale))
    cdiag = scatter(lat, args.order, rng=args.rng, ring=ClassicalRing())
    rep = quantum_frobenius_check(diag, u, k, args.order, Q=args.Q, rng=args.rng, cdiag=cdiag)
    out = rep.to_json()
    trees = []
    ok = rep.verdict
    if args.trees:
        for row in rep.rows:
            n = tuple(row["exponent"])
            if sum(n) - k * sum(u) > args.tree_budget:
                continue
            good, surviving, info = tree_divisibility_check(lat, u, k, n, rep.Q, rng=args.rng)
            ok = ok and good
            trees.append({"exponent": list(n), "surviving": sum(surviving.values()),
                          "vanishing": info["vanishing"], "bad": info["bad"], "pass": good})
    out["tree_divisibility"] = trees
    out["pass"] = ok
    return (OK if ok else FAILED), out


def cmd_verify_chamber(args):
    seed = Seed.from_json(_load_json(args.seed))
    if args.principal:
        seed = principal_seed(seed).seed
    word = args.word if args.word is not None else ()
    rep = chamber_cluster_check(seed, word, args.order, side=args.side, classical=args.classical)
    return (OK if rep["pass"] else FAILED), rep


def cmd_mid_theta(args):
    seed = Seed.from_json(_load_json(args.seed))
    m = _need(args.p, "--p")[0]
    if len(m) != seed.rank:
        raise InputError(f"vector {m} does not have rank {seed.rank}")
    Q = args.Q
    if Q is None:
        Q = tuple(Fraction(1000 + 13 * (i + 1), 1000) for i in range(seed.rank))
    f, meta = mid_theta(seed, m, Q, args.order, rng=args.rng)
    return OK, {"m": list(m), "Q": [frac_str(x) for x in Q], "laurent": laurent_json(f), "meta": meta}


VERIFY = {
    "tropfrob": cmd_verify_tropfrob,
    "tropinv": cmd_verify_tropinv,
    "scatdisks": cmd_verify_scatdisks,
    "frobenius-classical": cmd_verify_frobenius_classical,
    "frobenius-quantum": cmd_verify_frobenius_quantum,
    "chamber": cmd_verify_chamber,
}

COMMANDS = {
    "scatter": cmd_scatter,
    "theta": cmd_theta,
    "product": cmd_product,
    "alpha": cmd_alpha,
    "trop-count": cmd_trop_count,
    "mid-theta": cmd_mid_theta,
}


def _common(p):
    p.add_argument("--seed", required=True, help="seed / lattice JSON file")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--rng", type=int, default=0, help="randomness seed")
    p.add_argument("--out", help="write the artifact here instead of stdout")
    p.add_argument("--classical", action="store_true", help="work at q = 1")
    p.add_argument("--p", type=_int_vec, action="append", help="exponent vector, e.g. 1,0 (repeatable)")
    p.add_argument("--n", type=_int_vec)
    p.add_argument("--Q", type=_frac_vec, help="base point as rationals, e.g. 1/3,-2/7")


def build_parser():
    parser = argparse.ArgumentParser(prog="qscatter", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _common(sub.add_parser(name))
    v = sub.add_parser("verify")
    vsub = v.add_subparsers(dest="check", required=True)
    for name in VERIFY:
        q = vsub.add_parser(name)
        _common(q)
        q.add_argument("--prime", type=int)
        q.add_argument("--root-order", type=int)
        q.add_argument("--word", type=_int_vec)
        q.add_argument("--side", choices=("X", "A"), default="X")
        q.add_argument("--principal", action="store_true", help="use the seed with principal coefficients")
        q.add_argument("--limit", type=int, default=12, help="tropfrob combinations to test")
        q.add_argument("--trees", action="store_true", help="also run the per-tree divisibility check")
        q.add_argument("--tree-budget", type=int, default=4, help="d-budget up to which trees are checked")
    return parser


def _provenance(args):
    inputs = {k: v for k, v in sorted(vars(args).items()) if k not in ("out",)}
    for k, v in list(inputs.items()):
        if isinstance(v, tuple):
            inputs[k] = [frac_str(x) if isinstance(x, Fraction) else x for x in v]
        elif isinstance(v, list):
            inputs[k] = [list(x) for x in v]
    try:
        inputs["seed_data"] = _load_json(args.seed)
    except InputError:
        pass
    return {"tool": "qscatter", "version": __version__, "inputs": inputs}


def run(argv=None):
    """Parse argv, run the command; returns (exit status, artifact dict)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return (OK if e.code == 0 else INPUT_ERROR), None
    fn = VERIFY[args.check] if args.command == "verify" else COMMANDS[args.command]
    artifact = {"provenance": _provenance(args), "command": args.command}
    if args.command == "verify":
        artifact["check"] = args.check
    try:
        status, result = fn(args)
        artifact["result"] = result
    except (InputError, NotQuantizable, ChamberError, KeyError, ValueError, IndexError) as e:
        status = INPUT_ERROR
        artifact["error"] = {"code": INPUT_ERROR, "type": type(e).__name__, "message": str(e)}
    except (GenericityError, ScaleError, PoleError) as e:
        status = BUDGET_ERROR
        artifact["error"] = {"code": BUDGET_ERROR, "type": type(e).__name__, "message": str(e)}
    artifact["status"] = status
    text = json.dumps(artifact, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return status, artifact


def main(argv=None):
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
