"""Command line front end.

Reports go to stdout (or --output) as JSON with every number written as a
rational string; a short human readable table goes to stderr unless
--quiet is given. Exit codes: 0 ok, 1 violation detected, 2 usage or parse
error, 3 infeasible or unknown.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from .chains import Chain1, Chain2, parse_chain
from .commutators import cl_upper_search, parse_budget
from .lp import FillProblem, LpSolution, build_support, solve_min_l1, verify_solution
from .pairs import GroupPair, QuotientSpec, membership_status
from .qm import (CircleLift, CountingQm, defect_counting, eval_raw,
                 homogenize_counting, make_certificate, restrict_to_N, translation_number)
from .scl import Params, compare_plain_mixed, formula_harness, sandwich
from .surfaces import LabelledSurface, build_from_decomposition, invariants, validate
from .words import Alphabet

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_UNKNOWN = 0, 1, 2, 3

BUNDLED_EXAMPLE = {"rank": 2, "chain": [[1, "[a,b]"]]}

log = logging.getLogger("mixscl")


class UsageError(ValueError):
    pass


# ---- input files -------------------------------------------------------------

def _load_data(path: str):
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    if p.suffix == ".toml":
        try:
            import tomllib  # type: ignore[import-not-found]
        except ModuleNotFoundError:  # Python 3.10
            import tomli as tomllib
        try:
            return tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"{path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def pair_from_config(cfg: dict) -> GroupPair:
    if "rank" not in cfg:
        raise UsageError("pair config needs 'rank'")
    rank = int(cfg["rank"])
    alpha = Alphabet(rank)
    kind = cfg.get("quotient", "trivial")
    if kind == "trivial":
        q = QuotientSpec.trivial(rank)
    elif kind == "cyclic":
        q = QuotientSpec.cyclic(int(cfg["order"]), cfg["images"])
    elif kind in ("integers", "free-abelian"):
        q = QuotientSpec.free_abelian([[v] if isinstance(v, int) else v for v in cfg["images"]])
    elif kind == "permutations":
        q = QuotientSpec.permutations(cfg["perms"])
    elif kind == "table":
        q = QuotientSpec.table(cfg["table"], cfg["images"])
    else:
        raise UsageError(f"unknown quotient kind {kind!r}")
    return GroupPair(alpha, q, section=cfg.get("section"), reps=cfg.get("reps"))


def _pair(args) -> tuple:
    if getattr(args, "pair", None):
        cfg = _load_data(args.pair)
    else:
        cfg = {"rank": getattr(args, "rank", None) or 2, "quotient": "trivial"}
    try:
        return pair_from_config(cfg), cfg
    except (KeyError, TypeError) as exc:
        raise UsageError(f"bad pair config: {exc}") from exc


def _chain(args, alpha: Alphabet, allow_example: bool = False) -> Chain1:
    if getattr(args, "word", None):
        return Chain1([(alpha.parse(args.word), 1)], alpha.rank)
    if getattr(args, "chain", None):
        data = _load_data(args.chain)
        body = data.get("chain", []) if isinstance(data, dict) else data
        if isinstance(data, dict) and "rank" in data and int(data["rank"]) != alpha.rank:
            raise UsageError(f"chain rank {data['rank']} does not match the pair rank {alpha.rank}")
        c = parse_chain(alpha, body)
    elif allow_example:
        c = parse_chain(alpha, BUNDLED_EXAMPLE["chain"])
    else:
        raise UsageError("give --word or --chain")
    if not c:
        raise UsageError("empty chain")
    return c


# ---- output ----------------------------------------------------------------------

def _emit(args, report: dict) -> None:
    text = json.dumps(report, indent=2)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if not args.quiet:
        for k, v in report.items():
            if isinstance(v, (str, int, bool)) or v is None:
                sys.stderr.write(f"{k:>24}  {v}\n")


# ---- commands ------------------------------------------------------------------

def cmd_pair_check(args) -> int:
    pair, _ = _pair(args)
    report = {"pair": pair.describe()}
    if args.word or args.chain:
        c = _chain(args, pair.alphabet)
        m = membership_status(pair, c, search_budget=parse_budget(args.budget))
        report["membership"] = m.status
        report["reason"] = m.reason
        if m.obstruction:
            report["obstruction"] = m.obstruction
        _emit(args, report)
        return EXIT_OK if m.status == "yes" else (EXIT_VIOLATION if m.status == "no" else EXIT_UNKNOWN)
    _emit(args, report)
    return EXIT_OK


def cmd_qm_defect(args) -> int:
    alpha = Alphabet(args.rank)
    w = alpha.parse(args.word)
    q = CountingQm.single(w.letters, args.rank)
    d, kind = defect_counting(q)
    cert = make_certificate(q)
    _emit(args, {"word": str(w), "raw_defect": str(d), "kind": kind,
                 "defect_upper": str(cert.defect_upper), "defect_kind": cert.defect_kind})
    return EXIT_OK


def cmd_qm_eval(args) -> int:
    alpha = Alphabet(args.rank)
    w = alpha.parse(args.word)
    g = alpha.parse(args.on)
    q = CountingQm.single(w.letters, args.rank)
    cert = make_certificate(q)
    _emit(args, {"word": str(w), "on": str(g), "raw": str(eval_raw(q, g)),
                 "homogeneous": str(homogenize_counting(q, g)),
                 "defect_upper": str(cert.defect_upper)})
    return EXIT_OK


def cmd_qm_rot(args) -> int:
    try:
        h = CircleLift.from_json(_load_data(args.lift))
    except (KeyError, TypeError, IndexError) as exc:
        raise UsageError(f"bad lift file: {exc}") from exc
    lo, hi, exact = translation_number(h, args.n)
    _emit(args, {"lower": str(lo), "upper": str(hi), "exact": exact, "n": args.n})
    return EXIT_OK


def _lp_problem(args):
    pair, cfg = _pair(args)
    c = _chain(args, pair.alphabet)
    from .chains import normalize_signs
    from .scl import _pool_pairs
    terms = normalize_signs(c)
    target = Chain1([], c.rank)
    for t in terms:
        target = target + Chain1([(t ** args.power, 1)], c.rank)
    extra = _pool_pairs(pair, list(target.keys()), c.rank) if args.pool else []
    support = build_support(pair, args.radius, extra, c.rank)
    return pair, cfg, FillProblem(target, support, pair), len(terms)


def cmd_lp_solve(args) -> int:
    pair, cfg, problem, m = _lp_problem(args)
    sol = solve_min_l1(problem)
    report = {"target": str(problem.target), "power": args.power, "radius": args.radius,
              "support_size": len(problem.support), "rows": len(problem.rows),
              "status": sol.status}
    if sol.status == "optimal":
        report["value"] = str(sol.value)
        report["verified"] = verify_solution(problem, sol)
        report["fl_bound"] = str((sol.value + m) / args.power)
        report["scl_bound"] = str((sol.value + m) / args.power / 4)
    else:
        report["notes"] = sol.notes
    if args.emit_certs:
        cert = {"pair": cfg, "target": [[str(q), str(w)] for w, q in problem.target.items()],
                "support": [[str(g1), str(g2)] for g1, g2 in problem.support],
                "solution": sol.to_json()}
        Path(args.emit_certs).write_text(json.dumps(cert, indent=1) + "\n")
        report["certificate_file"] = args.emit_certs
    _emit(args, report)
    return EXIT_OK if sol.status == "optimal" else EXIT_UNKNOWN


def cmd_lp_verify(args) -> int:
    data = _load_data(args.certs)
    try:
        pair = pair_from_config(data["pair"])
        alpha = pair.alphabet
        target = parse_chain(alpha, [[q, w] for q, w in data["target"]])
        support = [(alpha.parse(g1), alpha.parse(g2)) for g1, g2 in data["support"]]
        s = data["solution"]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad certificate file: {exc}") from exc
    problem = FillProblem(target, support, pair)
    if s.get("status") != "optimal":
        _emit(args, {"verified": False, "reason": "certificate does not claim optimality"})
        return EXIT_VIOLATION
    primal = Chain2([((alpha.parse(g1), alpha.parse(g2)), Fraction(q)) for g1, g2, q in s["primal"]],
                    alpha.rank)
    dual = {alpha.parse(w): Fraction(v) for w, v in s["dual"].items()}
    sol = LpSolution("optimal", Fraction(s["value"]), primal, dual)
    ok = verify_solution(problem, sol)
    _emit(args, {"verified": ok, "value": s["value"]})
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_cl_search(args) -> int:
    pair, _ = _pair(args)
    y = pair.alphabet.parse(args.word)
    dec = cl_upper_search(pair, y, parse_budget(args.budget))
    if dec is None:
        _emit(args, {"word": str(y), "status": "unknown", "budget": args.budget})
        return EXIT_UNKNOWN
    report = {"word": str(y), "status": "found", "cl_upper": dec.k}
    report.update(dec.to_json())
    _emit(args, report)
    return EXIT_OK


def _surface(args) -> LabelledSurface:
    try:
        return LabelledSurface.from_json(_load_data(args.surface))
    except (KeyError, TypeError) as exc:
        raise UsageError(f"bad surface file: {exc}") from exc


def _inv_json(inv: dict) -> dict:
    out = dict(inv)
    out["boundary_words"] = [str(w) for w in inv["boundary_words"]]
    return out


def cmd_surface_validate(args) -> int:
    pair = _pair(args)[0] if args.pair else None
    S = _surface(args)
    diags = validate(pair, S)
    _emit(args, {"valid": not diags, "diagnostics": diags})
    return EXIT_OK if not diags else EXIT_VIOLATION


def cmd_surface_invariants(args) -> int:
    S = _surface(args)
    diags = validate(None, S)
    if diags:
        _emit(args, {"valid": False, "diagnostics": diags})
        return EXIT_VIOLATION
    _emit(args, _inv_json(invariants(S)))
    return EXIT_OK


def cmd_surface_build(args) -> int:
    data = _load_data(args.decomp)
    if "pair" in data:
        pair = pair_from_config(data["pair"])
    elif args.pair:
        pair = _pair(args)[0]
    else:
        pair = GroupPair.trivial(int(data.get("rank", 2)))
    alpha = pair.alphabet
    try:
        pairs = [(alpha.parse(g), alpha.parse(x)) for g, x in data["commutators"]]
    except (KeyError, TypeError) as exc:
        raise UsageError(f"bad decomposition file: {exc}") from exc
    S = build_from_decomposition(pair, pairs)
    inv = invariants(S, pair)
    report = {"surface": S.to_json(), "invariants": _inv_json(inv)}
    _emit(args, report)
    return EXIT_OK


def _params(args) -> Params:
    powers = tuple(int(v) for v in args.powers.split(",") if v.strip())
    if not powers or min(powers) < 1:
        raise UsageError("--powers must list positive integers")
    return Params(n_list=powers, radius=args.radius, budget=parse_budget(args.budget),
                  threads=args.threads, pool=not args.no_pool)


def _certificates(args, pair):
    if args.certs == "auto":
        return None
    data = _load_data(args.certs)
    out = []
    for entry in data:
        terms = {pair.alphabet.parse(w).letters: Fraction(q) for w, q in entry["terms"].items()}
        cert = make_certificate(CountingQm(terms, pair.alphabet.rank, name=entry.get("name", "")))
        if cert.defect_upper <= 0:
            raise UsageError(f"certificate {cert.name!r} is a homomorphism (zero defect)")
        out.append(cert if pair.is_plain else restrict_to_N(pair, cert))
    return out


def cmd_scl_sandwich(args) -> int:
    pair, _ = _pair(args)
    c = _chain(args, pair.alphabet, allow_example=True)
    b = sandwich(pair, c, _params(args), _certificates(args, pair))
    report = {"chain": str(c)}
    report.update(b.to_json())
    _emit(args, report)
    if b.infinite:
        return EXIT_OK
    return EXIT_OK if b.upper is not None else EXIT_UNKNOWN


def cmd_scl_compare(args) -> int:
    pair, _ = _pair(args)
    y = pair.alphabet.parse(args.word)
    rep = compare_plain_mixed(pair, y, _params(args))
    _emit(args, rep)
    ok = rep["lower_G_le_upper_GN"] and rep["lower_GN_le_2_upper_G"]
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_scl_harness(args) -> int:
    params = _params(args)
    if args.kind == "finite-index-chain":
        pair, _ = _pair(args)
        rep = formula_harness(args.kind, {"pair": pair, "x": pair.alphabet.parse(args.word)}, params)
    else:
        alpha = Alphabet(args.rank)
        rep = formula_harness(args.kind, {"g1": alpha.parse(args.g1), "g2": alpha.parse(args.g2)}, params)
    _emit(args, rep)
    return EXIT_OK if rep["consistent"] else EXIT_VIOLATION


# ---- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="no table on stderr")
    common.add_argument("--threads", type=int, default=1, help="LP worker threads")
    common.add_argument("--seed", type=int, default=0, help="seed for any sampling")
    common.add_argument("-o", "--output", help="write the JSON report here")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mixscl", description="Bounds for (mixed) scl in free groups.")
    sub = p.add_subparsers(dest="group", required=True)

    def add(group, name, func, *opts):
        sp = group.add_parser(name, parents=[common])
        for o in opts:
            o(sp)
        sp.set_defaults(func=func)
        return sp

    def o_pair(sp):
        sp.add_argument("--pair", help="pair config (.toml or .json)")
        sp.add_argument("--rank", type=int, default=None, help="rank for the plain pair")

    def o_chain(sp):
        sp.add_argument("--chain", help="chain file (JSON list of [coeff, word])")
        sp.add_argument("--word", help="single word, used as a one-term chain")

    def o_budget(sp):
        sp.add_argument("--budget", default="2:5:2", help="search budget K:L[:C]")

    def o_scl(sp):
        sp.add_argument("--radius", type=int, default=None)
        sp.add_argument("--powers", default="1,2,3")
        sp.add_argument("--no-pool", action="store_true", help="drop the subword pool from LP supports")

    g = sub.add_parser("pair").add_subparsers(dest="cmd", required=True)
    add(g, "check", cmd_pair_check, o_pair, o_chain, o_budget)

    g = sub.add_parser("qm").add_subparsers(dest="cmd", required=True)
    add(g, "defect", cmd_qm_defect, lambda s: s.add_argument("--word", required=True),
        lambda s: s.add_argument("--rank", type=int, default=2))
    add(g, "eval", cmd_qm_eval, lambda s: s.add_argument("--word", required=True),
        lambda s: s.add_argument("--on", required=True), lambda s: s.add_argument("--rank", type=int, default=2))
    add(g, "rot", cmd_qm_rot, lambda s: s.add_argument("--lift", required=True),
        lambda s: s.add_argument("--n", type=int, default=1000))

    g = sub.add_parser("lp").add_subparsers(dest="cmd", required=True)
    add(g, "solve", cmd_lp_solve, o_pair, o_chain,
        lambda s: s.add_argument("--radius", type=int, default=2),
        lambda s: s.add_argument("--power", type=int, default=1),
        lambda s: s.add_argument("--no-pool", dest="pool", action="store_false"),
        lambda s: s.add_argument("--emit-certs", help="write primal/dual certificate file"))
    add(g, "verify", cmd_lp_verify, lambda s: s.add_argument("--certs", required=True))

    g = sub.add_parser("cl").add_subparsers(dest="cmd", required=True)
    add(g, "search", cmd_cl_search, o_pair, o_budget, lambda s: s.add_argument("--word", required=True))

    g = sub.add_parser("surface").add_subparsers(dest="cmd", required=True)
    add(g, "validate", cmd_surface_validate, o_pair, lambda s: s.add_argument("--surface", required=True))
    add(g, "invariants", cmd_surface_invariants, lambda s: s.add_argument("--surface", required=True))
    add(g, "build", cmd_surface_build, o_pair, lambda s: s.add_argument("--decomp", required=True))

    g = sub.add_parser("scl").add_subparsers(dest="cmd", required=True)
    add(g, "sandwich", cmd_scl_sandwich, o_pair, o_chain, o_budget, o_scl,
        lambda s: s.add_argument("--certs", default="auto", help="'auto' or a JSON list of counting combinations"))
    add(g, "compare", cmd_scl_compare, o_pair, o_budget, o_scl, lambda s: s.add_argument("--word", required=True))

    def o_harness(s):
        s.add_argument("--kind", required=True, choices=["finite-index-chain", "hnn-like"])
        s.add_argument("--word", help="x in [N,N] for finite-index-chain")
        s.add_argument("--g1")
        s.add_argument("--g2")

    add(g, "harness", cmd_scl_harness, o_pair, o_budget, o_scl, o_harness)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "rank", None) is None and args.func in (cmd_qm_defect, cmd_qm_eval):
        args.rank = 2
    if args.func is cmd_scl_harness and args.kind == "hnn-like":
        if not (args.g1 and args.g2):
            sys.stderr.write("error: hnn-like needs --g1 and --g2\n")
            return EXIT_USAGE
        args.rank = args.rank or 1
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
