"""Command-line entry point.

Exit codes: 0 success, 2 input or validation error, 3 internal invariant
violation.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io as lio
from .analysis import Barcode, barcode, bottleneck, distance_bracket, stability_harness
from .hodge import hodge_decompose, retract_residuals
from .laptree import build_tree
from .linalg import (
    ContractError,
    InvariantViolation,
    NumericPolicy,
    ValidationError,
    block_diag,
    get_policy,
    max_abs,
    policy_context,
)
from .perslap import check_equivalences, is_split, persistent_laplacian

EXIT_OK, EXIT_INPUT, EXIT_INVARIANT = 0, 2, 3


def _basis_rows(sub):
    return sub.basis.T.tolist()


def _load(args, path=None):
    return lio.load_input(path or args.input, p_max=args.pmax, base_level=not args.no_base,
                          fill=args.fill)


def _persistence(args, path=None):
    ld = _load(args, path)
    if ld.persistence is None:
        raise lio.InputError("this command needs a filtration or persistence input")
    return ld


def _labels(S, p):
    return list(S.label(p))


def cmd_hodge(args) -> dict:
    ld = _load(args)
    if ld.space is not None:
        S, where = ld.space, None
    else:
        P = ld.persistence
        a = P.value(len(P) - 1) if args.a is None else args.a
        i = P.index(a)
        if i < 0:
            raise ContractError(f"a={a} lies below the first critical value")
        S, where = P.space(i), P.value(i)
    hd = hodge_decompose(S)
    degrees = []
    worst_orth = 0.0
    for p in range(S.max_degree + 1):
        dh = hd[p]
        G = S.space(p).gram
        parts = [dh.im_d.basis, dh.im_dstar.basis, dh.harmonic.basis]
        for x in range(3):
            for y in range(x + 1, 3):
                if parts[x].size and parts[y].size:
                    worst_orth = max(worst_orth, max_abs(parts[x].T @ G @ parts[y]))
        degrees.append({
            "degree": p,
            "labels": _labels(S, p),
            "im_d": _basis_rows(dh.im_d),
            "im_dstar": _basis_rows(dh.im_dstar),
            "harmonic": _basis_rows(dh.harmonic),
            "harmonic_dim": dh.harmonic.dim,
            "dims": [dh.im_d.dim, dh.im_dstar.dim, dh.harmonic.dim],
        })
    return {"command": "hodge", "a": where, "degrees": degrees,
            "residuals": {"orthogonality": worst_orth, **retract_residuals(S, hd)}}


def cmd_perslap(args) -> dict:
    P = _persistence(args).persistence
    a = args.a if args.a is not None else P.value(0)
    b = args.b if args.b is not None else a
    L = persistent_laplacian(P, a, b)
    S = P.space(P.index(a))
    degs = [args.dim] if args.dim is not None else list(range(L.max_degree + 1))
    for p in degs:
        if not 0 <= p <= L.max_degree:
            raise ContractError(f"degree {p} out of range 0..{L.max_degree}")
    per = []
    for p in degs:
        per.append({"degree": p, "labels": _labels(S, p), "matrix": L.matrix(p).tolist(),
                    "spectrum": L.spectrum(p).tolist(), "nullity": L.nullity(p)})
    if args.dim is None:
        mats = [L.matrix(p) for p in degs]
        full = block_diag(*mats).tolist() if any(m.size for m in mats) else []
        labels = [lab for p in degs for lab in _labels(S, p)]
    else:
        full, labels = per[0]["matrix"], per[0]["labels"]
    return {"command": "perslap", "provenance": {"a": P.value(P.index(a)), "b": P.value(P.index(b))},
            "labels": labels, "matrix": full, "degrees": per,
            "nullity": [d["nullity"] for d in per]}


def cmd_tree(args) -> dict:
    P = _persistence(args).persistence
    T = build_tree(P)
    return {"command": "tree", "critical_values": P.values.tolist(), "counts": T.counts(),
            "nodes": T.dump(full=args.full)}


def _barcode_of(args, path):
    doc = lio.read_document(path)
    if isinstance(doc, dict) and "barcode" in doc:
        return Barcode.from_json(doc["barcode"])
    ld = lio.load_document(doc, p_max=args.pmax, base_level=not args.no_base, fill=args.fill)
    if ld.persistence is None:
        raise lio.InputError(f"{path}: need a filtration or a barcode document")
    return barcode(ld.persistence)


def cmd_barcode(args) -> dict:
    P = _persistence(args).persistence
    B = barcode(P)
    if args.svg:
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(lio.barcode_svg(B))
    return {"command": "barcode", "critical_values": P.values.tolist(), "barcode": B.to_json()}


def cmd_bottleneck(args) -> dict:
    B1, B2 = _barcode_of(args, args.input), _barcode_of(args, args.input2)
    return {"command": "bottleneck", "bottleneck": bottleneck(B1, B2)}


def cmd_distance(args) -> dict:
    S = _persistence(args, args.input).persistence
    T = _persistence(args, args.input2).persistence
    br = distance_bracket(S, T)
    return {"command": "distance", **br}


def cmd_check_equivalences(args) -> dict:
    P = _persistence(args).persistence
    b = args.b if args.b is not None else P.value(0)
    c = args.c if args.c is not None else b
    rep = check_equivalences(P, b, c)
    return {"command": "check-equivalences", **rep}


def cmd_split(args) -> dict:
    P = _persistence(args).persistence
    a = args.a if args.a is not None else P.value(0)
    b = args.b if args.b is not None else a
    return {"command": "split", "a": a, "b": b, "split": is_split(P.morphism_at(a, b))}


def cmd_stability(args) -> dict:
    ld = _persistence(args)
    if ld.structure is None:
        raise lio.InputError("stability needs a complex or digraph input")
    pmax = args.pmax if ld.kind == "digraph" else ld.persistence.max_degree
    rep = stability_harness(ld.structure, trials=args.trials, seed=args.seed, eps=args.eps,
                            p_max=pmax, corrupt=args.corrupt)
    if rep["violations"]:
        raise InvariantViolation(lio.dumps(rep))
    return {"command": "stability", **rep}


COMMANDS = {
    "hodge": cmd_hodge,
    "perslap": cmd_perslap,
    "tree": cmd_tree,
    "barcode": cmd_barcode,
    "bottleneck": cmd_bottleneck,
    "distance": cmd_distance,
    "check-equivalences": cmd_check_equivalences,
    "split": cmd_split,
    "stability": cmd_stability,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="relative rank tolerance")
    common.add_argument("--abs-tol", type=float, default=None, help="absolute rank tolerance")
    common.add_argument("--pmax", type=int, default=3, help="top path degree for digraphs")
    common.add_argument("--out", default=None, help="write JSON here instead of stdout")
    common.add_argument("--no-base", action="store_true",
                        help="digraphs: omit the edgeless level below the first weight")
    common.add_argument("--fill", action="store_true",
                        help="complexes: add missing faces and lower-star values")

    ap = argparse.ArgumentParser(prog="lapstab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, two=False):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("input")
        if two:
            sp.add_argument("input2")
        return sp

    sp = add("hodge", "Hodge decomposition")
    sp.add_argument("--a", type=float, default=None)
    sp = add("perslap", "persistent Laplacian")
    sp.add_argument("--a", type=float, default=None)
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--dim", type=int, default=None)
    sp = add("tree", "Laplacian tree dump")
    sp.add_argument("--full", action="store_true", help="include full matrices")
    sp = add("barcode", "barcode of the persistent harmonic module")
    sp.add_argument("--svg", default=None)
    add("bottleneck", "bottleneck distance of two barcodes", two=True)
    add("distance", "interleaving-distance bracket", two=True)
    sp = add("check-equivalences", "evaluate the six Laplacian/homology conditions")
    sp.add_argument("--b", type=float, default=None)
    sp.add_argument("--c", type=float, default=None)
    sp = add("split", "is the step a -> b split")
    sp.add_argument("--a", type=float, default=None)
    sp.add_argument("--b", type=float, default=None)
    sp = add("stability", "random stability harness")
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--eps", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--corrupt", action="store_true",
                    help="also check that a corrupted candidate fails")
    return ap


def run(argv=None):
    """Parse ``argv`` and run; returns ``(exit_code, report_or_message, args)``."""
    ap = build_parser()
    args = ap.parse_args(argv)
    base = get_policy()
    try:
        policy = NumericPolicy(
            rel_tol=args.tol if args.tol is not None else base.rel_tol,
            abs_tol=args.abs_tol if args.abs_tol is not None else base.abs_tol,
            check_tol=base.check_tol,
            grid_tol=base.grid_tol,
        )
        if args.pmax < 0:
            raise ValueError("--pmax must be nonnegative")
    except ValueError as exc:
        return EXIT_INPUT, f"error: {exc}", args
    try:
        with policy_context(policy):
            report = COMMANDS[args.command](args)
    except InvariantViolation as exc:
        return EXIT_INVARIANT, f"invariant violation: {exc}", args
    except (ValidationError, ContractError, lio.InputError, ValueError, np.linalg.LinAlgError) as exc:
        return EXIT_INPUT, f"error: {exc}", args
    report["policy"] = policy.to_dict()
    report["p_max"] = args.pmax
    return EXIT_OK, report, args


def main(argv=None) -> int:
    code, out, args = run(sys.argv[1:] if argv is None else argv)
    if code != EXIT_OK:
        print(out, file=sys.stderr)
        return code
    text = lio.dumps(out) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
