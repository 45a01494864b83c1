"""Property fuzzing over random algebras, structures and formulae.

Instance ``i`` of a run with seed ``s`` draws from ``Random(f"{s}:{i}")``,
so any single instance can be replayed on its own.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import properties as P
from .backforth import BackForth
from .gen import SIGNATURES, FormulaParams, StructureParams, random_algebra, random_formula, random_structure, small_algebra
from .invariants import InvariantEngine
from .semantics import Evaluator

PROPERTIES = (
    "unnest-value",
    "rank-law",
    "bookkeeping",
    "box-identities",
    "invariance",
    "portmanteau",
    "restriction-lemmas",
)


@dataclass
class FuzzConfig:
    seed: int = 0
    count: int = 100
    start: int = 0
    max_alpha: int = 2
    max_points: int = 5
    mutation: str | None = None


@dataclass
class FuzzReport:
    config: FuzzConfig
    passed: dict[str, int] = field(default_factory=lambda: {p: 0 for p in PROPERTIES})
    run: dict[str, int] = field(default_factory=lambda: {p: 0 for p in PROPERTIES})
    first_failure: dict[str, tuple[int, str]] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.first_failure

    def lines(self) -> list[str]:
        c = self.config
        out = [f"fuzz seed {c.seed}, instances {c.start}..{c.start + c.count - 1}" + (f", mutation {c.mutation}" if c.mutation else "")]
        for p in PROPERTIES:
            out.append(f"  {p}: {self.passed[p]}/{self.run[p]} passed")
        for p, (i, msg) in sorted(self.first_failure.items()):
            out.append(f"  FAIL {p} at instance {i}: {msg}")
            out.append(f"    replay: fuzz --seed {c.seed} --start {i} --count 1")
        return out

    def to_json(self) -> dict:
        return {
            "seed": self.config.seed,
            "start": self.config.start,
            "count": self.config.count,
            "mutation": self.config.mutation,
            "passed": self.passed,
            "run": self.run,
            "failures": {p: {"instance": i, "message": m} for p, (i, m) in sorted(self.first_failure.items())},
            "ok": self.ok,
        }


def _instance(cfg: FuzzConfig, i: int) -> dict[str, str | None]:
    rng = random.Random(f"{cfg.seed}:{i}")
    out: dict[str, str | None] = {}
    mut = cfg.mutation

    alg = random_algebra(rng, cfg.max_points, max_elements=8)
    sig = SIGNATURES[rng.choice(sorted(SIGNATURES))]
    m = random_structure(rng, alg, sig, "M", StructureParams(max_generators=rng.randint(1, 3)))
    ev = Evaluator(m, memo=True, mutation=mut)
    f = random_formula(rng, sig, list(alg.names), FormulaParams(max_rank=3, max_depth=3, n_free=2, var_pool=3, max_members=2))
    out["unnest-value"] = P.unnest_preserves_value(m, f, ev)
    out["rank-law"] = P.rank_law(f)
    out["bookkeeping"] = P.bookkeeping(m)
    out["box-identities"] = P.box_identities(m, f, ev)

    salg = small_algebra(rng)
    ssig = SIGNATURES[rng.choice(["empty", "unary", "binary", "const", "fun", "mixed"])]
    a_m = random_structure(rng, salg, ssig, "M")
    a_n = random_structure(rng, salg, ssig, "N")
    alpha = rng.randint(0, cfg.max_alpha)
    bf = BackForth(a_m, a_n)
    p = rng.choice(list(salg.elements))
    level = bf.level(alpha, p)
    if level:
        h = rng.choice(level)
        g = random_formula(
            rng, ssig, list(salg.names),
            FormulaParams(max_rank=alpha, max_depth=3, n_free=2, var_pool=3, unnested_only=True, nested_terms=False, max_qdegree=alpha, max_members=2, max_block=1),
        )
        out["invariance"] = P.invariance(bf, h, p, g, Evaluator(a_m, memo=True, mutation=mut), Evaluator(a_n, memo=True, mutation=mut))

    n = rng.choice([0, 0, 1])
    pairs = [(x, y) for x in a_m.tuples(n) for y in a_n.tuples(n) if a_m.tuple_extent(x) == a_n.tuple_extent(y)]
    x, y = rng.choice(pairs)
    out["portmanteau"] = P.portmanteau_agrees(a_m, x, a_n, y, cfg.max_alpha, mutation=mut)
    out["restriction-lemmas"] = P.invariant_laws(InvariantEngine([a_m, a_n]), a_m, x, min(alpha, 2))
    return out


def run(cfg: FuzzConfig) -> FuzzReport:
    rep = FuzzReport(cfg)
    for i in range(cfg.start, cfg.start + cfg.count):
        for prop, res in _instance(cfg, i).items():
            rep.run[prop] += 1
            if res is None:
                rep.passed[prop] += 1
            elif prop not in rep.first_failure:
                rep.first_failure[prop] = (i, res)
    return rep
