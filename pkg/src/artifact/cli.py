"""Command-line interface.

Exit codes: 0 pass, 1 validation failure, 2 property counterexample,
64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence

from .backforth import BackForth, ExtentMismatch, SearchBudgetExceeded, scott_rank
from .dsl import DSLError, UnknownName, Workspace
from .fuzz import FuzzConfig
from .fuzz import run as run_fuzz
from .games import ConfigInvalid, GameConfig, play
from .heyting import AlgebraError
from .invariants import (
    CapExceeded,
    InvariantEngine,
    IncomparableDomains,
    Portmanteau,
    SentenceBuilder,
    StrictModeRequired,
    compare_invariants,
    materialize,
)
from .presheaf import Structure, validate_structure
from .semantics import MUTATIONS, Evaluator
from .syntax import ParseError, classify, mrank, parse_formula, qdegree, show
from .transform import unnest

EXIT_OK, EXIT_INVALID, EXIT_COUNTEREXAMPLE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Result:
    code: int
    text: list[str]
    data: dict


def _emit(res: Result, fmt: str) -> int:
    if fmt == "json":
        print(json.dumps(res.data, indent=2, sort_keys=True))
    else:
        for line in res.text:
            print(line)
    return res.code


# -- helpers -----------------------------------------------------------------


def _workspace(args) -> Workspace:
    ws = Workspace(lax_constants=args.lax_constants)
    for path in args.file or []:
        ws.load_file(path)
    return ws


def _valid(m: Structure) -> Structure:
    errs = validate_structure(m)
    if errs:
        raise DSLError(f"structure {m.name} is invalid: {errs[0]}")
    return m


def _pair(ws: Workspace, args) -> tuple[Structure, tuple, Structure, tuple]:
    m, n = _valid(ws.structure(args.M)), _valid(ws.structure(args.N))
    if m.algebra is not n.algebra:
        raise UsageError(f"{m.name} and {n.name} live over different algebras")
    if m.signature != n.signature:
        raise UsageError(f"{m.name} and {n.name} have different signatures")
    ts = args.tuples or ["empty"]
    if len(ts) == 1 and ts[0] == "empty":
        ts = ["empty", "empty"]
    if len(ts) != 2:
        raise UsageError("--tuples takes two tuples or the single word empty")
    a, b = m.parse_tuple(ts[0]), n.parse_tuple(ts[1])
    if len(a) != len(b):
        raise UsageError(f"tuples have lengths {len(a)} and {len(b)}")
    pa, pb = m.tuple_extent(a), n.tuple_extent(b)
    if pa != pb:
        names = m.algebra.names
        raise ExtentMismatch(f"E(a) = {names[pa]} but E(b) = {names[pb]}")
    return m, a, n, b


def _strict(*ms: Structure) -> None:
    for m in ms:
        if not m.is_strict():
            raise StrictModeRequired(f"{m.name} has a constant with extent below top; this command needs strict constants")


def _probes(ws: Workspace, args, default: list[Structure]) -> list[Structure]:
    if not args.probes:
        return default
    return [_valid(ws.structure(x.strip())) for x in args.probes.split(",") if x.strip()]


# -- commands ----------------------------------------------------------------


def cmd_check(args) -> Result:
    text, data, code = [], {"files": []}, EXIT_OK
    for path in args.paths:
        ws = Workspace(lax_constants=args.lax_constants)
        entry = {"file": path, "ok": True, "items": []}
        try:
            names = ws.load_file(path)
        except (DSLError, OSError) as e:
            entry["ok"] = False
            entry["error"] = str(e)
            text.append(f"{path}: FAIL {e}")
            code = EXIT_INVALID
            data["files"].append(entry)
            continue
        for nm in names:
            if nm in ws.structures:
                m = ws.structures[nm]
                errs = validate_structure(m)
                entry["items"].append({"structure": nm, "sections": len(m.sections), "violations": errs})
                if errs:
                    entry["ok"] = False
                    code = EXIT_INVALID
                    text.append(f"{path}: structure {nm}: FAIL")
                    text.extend(f"  {e}" for e in errs)
                else:
                    text.append(f"{path}: structure {nm}: ok ({len(m.sections)} sections over {m.algebra.name})")
            elif nm in ws.algebras:
                alg = ws.algebras[nm]
                entry["items"].append({"algebra": nm, "elements": alg.size, "boolean": alg.is_boolean()})
                text.append(f"{path}: algebra {nm}: ok ({alg.size} elements{', boolean' if alg.is_boolean() else ''})")
            else:
                entry["items"].append({"signature": nm})
                text.append(f"{path}: signature {nm}: ok")
        data["files"].append(entry)
    data["ok"] = code == EXIT_OK
    return Result(code, text, data)


def cmd_eval(args) -> Result:
    ws = _workspace(args)
    m = _valid(ws.structure(args.structure))
    f = parse_formula(args.formula, m.signature, m.algebra.names)
    a = m.parse_tuple(args.tuple or "empty")
    ev = Evaluator(m)
    v = ev(f, a)
    forced = ev.forces(f, a)
    name = m.algebra.names[v]
    return Result(
        EXIT_OK,
        [f"[{show(f)}]{m.fmt(a)} = {name}" + (" (forced)" if forced else "")],
        {"formula": show(f), "structure": m.name, "tuple": [m.names[x] for x in a], "value": name, "forced": forced},
    )


def cmd_unnest(args) -> Result:
    ws = _workspace(args)
    sig = ws.signature(args.signature)
    f = parse_formula(args.formula, sig)
    g = unnest(f)
    return Result(
        EXIT_OK,
        [show(g), f"mrank {mrank(f)}, qdegree of unnesting {qdegree(g)}"],
        {"formula": show(f), "unnested": show(g), "mrank": mrank(f), "qdegree": qdegree(g)},
    )


def cmd_rank(args) -> Result:
    ws = _workspace(args)
    sig = ws.signature(args.signature)
    f = parse_formula(args.formula, sig)
    c = classify(f)
    data = {"formula": show(f), "qdegree": qdegree(f), "mrank": mrank(f), **vars(c)}
    return Result(EXIT_OK, [f"{k}: {v}" for k, v in data.items()], data)


def cmd_qtable(args) -> Result:
    ws = _workspace(args)
    m, n = _valid(ws.structure(args.M)), _valid(ws.structure(args.N))
    if m.algebra is not n.algebra:
        raise UsageError(f"{m.name} and {n.name} live over different algebras")
    table = BackForth(m, n, args.move_cap).table(args.alpha)
    rep = table.report()
    text = [f"Q table for {m.name} / {n.name}: {len(rep['isos'])} partial isomorphisms"]
    for a, lv in rep["levels"].items():
        sizes = ", ".join(f"{p}: {len(ids)}" for p, ids in lv.items())
        text.append(f"  alpha {a}: {sizes}")
    st = rep["stable_at"]
    text.append(f"  stable at alpha {st}" if st is not None else f"  not stable by alpha {args.alpha}")
    return Result(EXIT_OK, text, rep)


def cmd_equiv(args) -> Result:
    ws = _workspace(args)
    m, a, n, b = _pair(ws, args)
    _strict(m, n)
    pm = Portmanteau(m, a, n, b, args.move_cap, args.tuple_cap)
    rows = [pm.row(al) for al in range(args.alpha + 1)]
    ok = all(r.agree for r in rows)
    text = [f"{m.name}{m.fmt(a)} vs {n.name}{n.fmt(b)}, move cap {args.move_cap}"]
    text.append("  alpha  invariants  Q-witness  winner  forcing  agree")
    for r in rows:
        text.append(
            f"  {r.alpha:5d}  {str(r.invariants_equal):10s}  {str(r.q_witness):9s}  {r.game_winner:6s}  {str(r.mutual_forcing):7s}  {r.agree}"
        )
    data = {
        "M": m.name,
        "N": n.name,
        "a": [m.names[x] for x in a],
        "b": [n.names[x] for x in b],
        "move_cap": args.move_cap,
        "rows": [
            {
                "alpha": r.alpha,
                "invariants_equal": r.invariants_equal,
                "q_witness": r.q_witness,
                "game_winner": r.game_winner,
                "mutual_forcing": r.mutual_forcing,
                "agree": r.agree,
            }
            for r in rows
        ],
        "agree": ok,
    }
    return Result(EXIT_OK if ok else EXIT_COUNTEREXAMPLE, text, data)


def cmd_game(args) -> Result:
    ws = _workspace(args)
    m, a, n, b = _pair(ws, args)
    cfg = GameConfig(m, n, a, b, args.alpha, args.move_cap)
    human = None if args.auto else args.human
    quiet = args.format == "json" or human is None
    tr = play(cfg, human=human, say=(lambda s: None) if quiet else print)
    text = tr.lines + [f"winner: {tr.winner}"] if human is None else [f"winner: {tr.winner}"]
    return Result(EXIT_OK, text, {"transcript": tr.lines, "winner": tr.winner})


def cmd_scott_rank(args) -> Result:
    ws = _workspace(args)
    m = _valid(ws.structure(args.structure))
    sr = scott_rank(m, args.length, args.move_cap, args.extra_levels)
    text = [f"Scott rank of {m.name}: {sr.rank}", f"  |Gamma_alpha| by level: {sr.gamma_sizes}"]
    return Result(EXIT_OK, text, {"structure": m.name, "rank": sr.rank, "gamma_sizes": sr.gamma_sizes, "tuple_length": args.length})


def cmd_invariants(args) -> Result:
    ws = _workspace(args)
    m, a, n, b = _pair(ws, args)
    _strict(m, n)
    probes = _probes(ws, args, [m, n])
    eng = InvariantEngine(probes, args.move_cap, args.tuple_cap)
    x = materialize(eng, m, a, args.alpha)
    y = materialize(eng, n, b, args.alpha)
    cmp = compare_invariants(x, y)
    kind = "G" if not args.probes else "H"
    text = [
        f"{kind}^{args.alpha} over {{{', '.join(sorted(k.name for k in probes))}}}: "
        + ("equal" if cmp.equal else f"differ, first at level {cmp.first_divergence[0]}, key {cmp.first_divergence[1]}"),
        f"  {m.name}{m.fmt(a)}: {len(x.base)} base entries, level sizes {[len(lv) for lv in x.levels]}",
        f"  {n.name}{n.fmt(b)}: {len(y.base)} base entries, level sizes {[len(lv) for lv in y.levels]}",
    ]
    data = {
        "kind": kind,
        "equal": cmp.equal,
        "first_divergence": None if cmp.first_divergence is None else [cmp.first_divergence[0], list(map(str, cmp.first_divergence[1]))],
        "left": x.to_json(),
        "right": y.to_json(),
    }
    return Result(EXIT_OK, text, data)


def cmd_scott_sentence(args) -> Result:
    ws = _workspace(args)
    m = _valid(ws.structure(args.structure))
    _strict(m)
    probes = _probes(ws, args, [m])
    _strict(*probes)
    a = m.parse_tuple(args.tuple or "empty")
    sb = SentenceBuilder(probes, args.move_cap, args.tuple_cap)
    phi = sb.phi(args.alpha, m, a)
    self_value = sb.evaluator(m)(phi, m.homogeneous(a))
    names = m.algebra.names
    text = [show(phi), f"qdegree {qdegree(phi)}, self value {names[self_value]} (E(a) = {names[m.tuple_extent(a)]})"]
    return Result(
        EXIT_OK,
        text,
        {"sentence": show(phi), "qdegree": qdegree(phi), "self_value": names[self_value], "alpha": args.alpha},
    )


def cmd_fuzz(args) -> Result:
    rep = run_fuzz(FuzzConfig(args.seed, args.count, args.start, args.alpha, mutation=args.mutate))
    return Result(EXIT_OK if rep.ok else EXIT_COUNTEREXAMPLE, rep.lines(), rep.to_json())


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-f", "--file", action="append", help="workspace file to load (repeatable)")
    common.add_argument("--format", choices=["text", "json"], default="text")
    common.add_argument("--lax-constants", action="store_true", help="allow constants with extent below top")
    common.add_argument("--alpha", type=int, default=2)
    common.add_argument("--move-cap", "--mu", dest="move_cap", type=int, default=1, help="largest move tuple (mu)")
    common.add_argument("--tuple-cap", type=int, default=8, help="longest tuple the invariant recursion may build")
    common.add_argument("--probes", help="comma-separated probe structures")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="artifact", description="Back-and-forth workbench for presheaf models over finite Heyting algebras.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    s = sub.add_parser("check", parents=[common], help="validate workspace files")
    s.add_argument("paths", nargs="+")
    s.set_defaults(run=cmd_check)

    s = sub.add_parser("eval", parents=[common], help="evaluate a formula")
    s.add_argument("structure")
    s.add_argument("formula")
    s.add_argument("--tuple", help="assignment v0, v1, ... as a,b|m")
    s.set_defaults(run=cmd_eval)

    for name, fn, hlp in (("unnest", cmd_unnest, "unnest a formula"), ("rank", cmd_rank, "ranks and classification")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("signature")
        s.add_argument("formula")
        s.set_defaults(run=fn)

    s = sub.add_parser("qtable", parents=[common], help="Q_alpha(p) levels")
    s.add_argument("M")
    s.add_argument("N")
    s.set_defaults(run=cmd_qtable)

    for name, fn, hlp in (
        ("equiv", cmd_equiv, "four-way equivalence report"),
        ("game", cmd_game, "play the back-and-forth game"),
        ("invariants", cmd_invariants, "compare G (or H with --probes) invariants"),
    ):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("M")
        s.add_argument("N")
        s.add_argument("--tuples", nargs="+", metavar="TUPLE", help="a b, or the word empty")
        if name == "game":
            s.add_argument("--human", choices=["I", "II"], help="play one side interactively")
            s.add_argument("--auto", action="store_true", help="machine against machine")
        s.set_defaults(run=fn)

    s = sub.add_parser("scott-rank", parents=[common], help="Scott rank of one structure")
    s.add_argument("structure")
    s.add_argument("--length", type=int, default=1, help="longest tuple in the pairs compared")
    s.add_argument("--extra-levels", type=int, default=0)
    s.set_defaults(run=cmd_scott_rank)

    s = sub.add_parser("scott-sentence", parents=[common], help="build phi^alpha")
    s.add_argument("structure")
    s.add_argument("--tuple")
    s.set_defaults(run=cmd_scott_sentence)

    s = sub.add_parser("fuzz", parents=[common], help="random property checks")
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--start", type=int, default=0)
    s.add_argument("--mutate", choices=MUTATIONS, help="inject a known evaluator bug")
    s.set_defaults(run=cmd_fuzz)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _emit(args.run(args), args.format)
    except (DSLError, AlgebraError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (
        UsageError,
        UnknownName,
        ParseError,
        ExtentMismatch,
        ConfigInvalid,
        CapExceeded,
        StrictModeRequired,
        IncomparableDomains,
        SearchBudgetExceeded,
        KeyError,
    ) as e:
        print(f"error: {e.args[0] if isinstance(e, KeyError) and e.args else e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
