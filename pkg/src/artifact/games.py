"""The back-and-forth game: legality, solving, strategies and text-mode play.

Player I picks a budget below the current one and a move tuple from either
structure; player II answers with a family of partial isomorphisms whose
extents join to the tuple's extent; player I then picks one family member
to continue from. A player who cannot make a legal move loses.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

from .backforth import BackForth, Iso, SearchBudgetExceeded, max_search
from .heyting import Elem
from .presheaf import Section, Structure


class ConfigInvalid(ValueError):
    pass


@dataclass(frozen=True)
class GameConfig:
    m: Structure
    n: Structure
    a: tuple[Section, ...]
    b: tuple[Section, ...]
    alpha: int
    move_cap: int = 1
    h: Iso | None = None

    def iso(self, bf: BackForth) -> Iso:
        if self.h is not None:
            return self.h
        p = self.m.tuple_extent(self.a)
        h = bf.gen(zip(self.m.res_tuple(self.a, p), self.n.res_tuple(self.b, p)))
        if h is None:
            raise ConfigInvalid("the positional map is not an extent-preserving bijection")
        return h


@dataclass(frozen=True)
class MoveI:
    alpha: int
    side: int  # 0 plays in M, 1 plays in N
    s: tuple[Section, ...]
    j: int | None = None  # index into II's previous response


@dataclass(frozen=True)
class Triple:
    h: Iso
    q: Elem
    t: tuple[Section, ...]


MoveII = tuple[Triple, ...]


@dataclass
class GameState:
    """Current iso h*, current extent q*, remaining budget, and history."""

    n: int
    iso: Iso
    q: Elem
    alpha: int
    last: MoveII | None = None
    history: list = field(default_factory=list)

    def key(self) -> tuple:
        return (self.iso, self.q, self.alpha)


class Game:
    def __init__(self, cfg: GameConfig, bf: BackForth | None = None):
        m, n = cfg.m, cfg.n
        if len(cfg.a) != len(cfg.b):
            raise ConfigInvalid("tuples of different length")
        if m.tuple_extent(cfg.a) != n.tuple_extent(cfg.b):
            raise ConfigInvalid("tuples of different extent")
        self.cfg = cfg
        self.bf = bf or BackForth(m, n, cfg.move_cap)
        self.alg = m.algebra
        self.h0 = cfg.iso(self.bf)
        self.p0 = m.tuple_extent(cfg.a)

    def start(self) -> GameState:
        return GameState(0, self.h0, self.p0, self.cfg.alpha)

    def struct(self, side: int) -> Structure:
        return self.cfg.m if side == 0 else self.cfg.n

    # -- legality ----------------------------------------------------------

    def anchors(self, state: GameState) -> list[tuple[int | None, Iso, Elem]]:
        """(j, iso, extent) pairs player I may continue from."""
        if state.last is None:
            return [(None, state.iso, state.q)]
        return [(j, tr.h, tr.q) for j, tr in enumerate(state.last)]

    def legal_moves_i(self, state: GameState) -> Iterator[MoveI]:
        for j, _, q in self.anchors(state):
            for beta in range(state.alpha):
                for side in (0, 1):
                    for t, _ in self.bf.moves(side, q):
                        yield MoveI(beta, side, t, j)

    def check_i(self, state: GameState, mv: MoveI) -> str | None:
        """None if legal, otherwise the violated rule."""
        if not 0 <= mv.alpha < state.alpha:
            return "budget rule: the new ordinal must be below the current one"
        anchors = {j: q for j, _, q in self.anchors(state)}
        if mv.j not in anchors:
            return "choice rule: pick an index from II's last response"
        if not 1 <= len(mv.s) <= self.cfg.move_cap:
            return f"move cap: tuples have length 1..{self.cfg.move_cap}"
        s = self.struct(mv.side)
        if any(not 0 <= x < len(s) for x in mv.s):
            return "tuple rule: sections must come from the chosen structure"
        if not self.alg.leq(s.tuple_extent(mv.s), anchors[mv.j]):
            return "extent rule: E(s) must lie below the current extent"
        return None

    def after_i(self, state: GameState, mv: MoveI) -> GameState:
        _, iso, q = next(x for x in self.anchors(state) if x[0] == mv.j)
        return GameState(state.n, iso, q, mv.alpha, None, state.history + [("I", mv)])

    def check_ii(self, state: GameState, mv: MoveI, resp: MoveII) -> str | None:
        """``state`` is the state after I's move (see ``after_i``)."""
        bf, alg = self.bf, self.alg
        src, dst = self.struct(mv.side), self.struct(1 - mv.side)
        es = src.tuple_extent(mv.s)
        for tr in resp:
            if len(tr.t) != len(mv.s) or any(not 0 <= y < len(dst) for y in tr.t):
                return "tuple rule: each t_j lies on the other side with the move's length"
            if dst.tuple_extent(tr.t) != tr.q or any(dst.extent[y] != tr.q for y in tr.t):
                return "extent rule: E(t_j) = q_j"
            if not alg.leq(tr.q, es):
                return "extent rule: q_j below E(s)"
            if bf.gen(tr.h) != tr.h or not bf.is_partial_iso(tr.h):
                return "iso rule: h_j must be a partial isomorphism"
            base = {pr for pr in state.iso if self.cfg.m.extent[pr[0]] == tr.q}
            if not base <= tr.h:
                return "extension rule: h_j extends h* on sections of extent q_j"
            sq = tuple(src.restrict[x][tr.q] for x in mv.s)
            pairs = zip(sq, tr.t) if mv.side == 0 else zip(tr.t, sq)
            if not set(pairs) <= tr.h:
                return "mapping rule: h_j maps s|q_j to t_j pointwise"
        if alg.big_join(tr.q for tr in resp) != es:
            return "cover rule: the q_j must join to E(s)"
        return None

    def legal_moves_ii(self, state: GameState, mv: MoveI) -> Iterator[MoveII]:
        """All legal responses with minimal h_j, smallest families first."""
        src = self.struct(mv.side)
        es = src.tuple_extent(mv.s)
        cands = []
        for q in self.alg.below(es):
            for hj, u in self._candidates(state.iso, mv.side, mv.s, q):
                cands.append(Triple(hj, q, u))
        for k in range(len(cands) + 1):
            for combo in itertools.combinations(cands, k):
                if self.alg.big_join(tr.q for tr in combo) == es:
                    yield combo

    def _candidates(self, h: Iso, side: int, s, q) -> Iterator[tuple[Iso, tuple]]:
        m = self.cfg.m
        src, dst = self.struct(side), self.struct(1 - side)
        base = [pr for pr in h if m.extent[pr[0]] == q]
        sq = tuple(src.restrict[x][q] for x in s)
        pool = [y for y in dst.sections if dst.extent[y] == q]
        for u in itertools.product(pool, repeat=len(s)):
            extra = zip(sq, u) if side == 0 else zip(u, sq)
            hj = self.bf.gen(itertools.chain(base, extra))
            if hj is not None and self.bf.is_partial_iso(hj):
                yield hj, u

    # -- solving -----------------------------------------------------------

    def ii_wins(self) -> bool:
        return self.bf.in_q(self.h0, self.cfg.alpha, self.p0)

    def ii_respond(self, state: GameState, mv: MoveI) -> MoveII | None:
        """II's certified answer: forth/back witnesses at level mv.alpha."""
        es = self.struct(mv.side).tuple_extent(mv.s)
        cover = self.bf.cover(state.iso, mv.alpha, mv.side, mv.s, es)
        resp = tuple(Triple(h, q, u) for h, q, u in cover)
        if self.alg.big_join(tr.q for tr in resp) != es:
            return None
        return resp

    def i_move(self, state: GameState) -> MoveI | None:
        """I's certified move from a position where II's invariant fails."""
        for j, iso, q in self.anchors(state):
            if self.bf.in_q(iso, state.alpha, q):
                continue
            beta = next(b for b in range(state.alpha + 1) if not self.bf.in_q(iso, b, q)) - 1
            if beta < 0:
                continue
            side, s = self.bf.failing_move(iso, beta, q)
            return MoveI(beta, side, s, j)
        return None

    def any_move_i(self, state: GameState) -> MoveI | None:
        return next(self.legal_moves_i(state), None)


@dataclass
class StrategyCert:
    """Winning strategy for one player, as a function on game positions."""

    winner: str
    game: Game

    def respond(self, state: GameState, mv: MoveI | None = None):
        if self.winner == "II":
            return self.game.ii_respond(state, mv)
        return self.game.i_move(state)


@dataclass
class Solution:
    winner: str
    strategy: StrategyCert


def solve(cfg: GameConfig, bf: BackForth | None = None) -> Solution:
    """Winner from the Q hierarchy; the certificate replays its witnesses."""
    g = Game(cfg, bf)
    if not g.bf.is_partial_iso(g.h0):
        winner = "I"
    else:
        winner = "II" if g.ii_wins() else "I"
    return Solution(winner, StrategyCert(winner, g))


# -- independent search ----------------------------------------------------


class GameSearch:
    """Exhaustive minimax over game positions, independent of the Q tables."""

    def __init__(self, m: Structure, n: Structure, move_cap: int = 1):
        self.m, self.n = m, n
        self.alg = m.algebra
        self.cap = move_cap
        self.bf = BackForth(m, n, move_cap)  # used only for iso checks
        self.memo: dict = {}

    def ii_wins(self, h: Iso, q: Elem, budget: int) -> bool:
        key = (h, q, budget)
        if key in self.memo:
            return self.memo[key]
        if len(self.memo) > max_search():
            raise SearchBudgetExceeded("game search exceeds WORKBENCH_MAX_SEARCH")
        ok = self.bf.is_partial_iso(h) and all(
            self._answerable(h, beta, side, s)
            for beta in range(budget)
            for side in (0, 1)
            for s in self._tuples(side, q)
        )
        self.memo[key] = ok
        return ok

    def _tuples(self, side, q):
        st = self.m if side == 0 else self.n
        le = self.alg.le
        pool = [x for x in st.sections if le[st.extent[x]][q]]
        for k in range(1, self.cap + 1):
            yield from itertools.product(pool, repeat=k)

    def _answerable(self, h: Iso, beta: int, side: int, s) -> bool:
        m, alg = self.m, self.alg
        src = self.m if side == 0 else self.n
        dst = self.n if side == 0 else self.m
        es = src.tuple_extent(s)
        got = alg.bot
        for q in alg.below(es):
            base = [pr for pr in h if m.extent[pr[0]] == q]
            sq = tuple(src.restrict[x][q] for x in s)
            pool = [y for y in dst.sections if dst.extent[y] == q]
            for u in itertools.product(pool, repeat=len(s)):
                pairs = list(zip(sq, u)) if side == 0 else list(zip(u, sq))
                hj = self.bf.gen(base + pairs)
                if hj is not None and self.ii_wins(hj, q, beta):
                    got = alg.join(got, q)
                    break
        return got == es


def search_winner(cfg: GameConfig) -> str:
    gs = GameSearch(cfg.m, cfg.n, cfg.move_cap)
    h = cfg.iso(gs.bf)
    return "II" if gs.ii_wins(h, cfg.m.tuple_extent(cfg.a), cfg.alpha) else "I"


# -- play --------------------------------------------------------------------


@dataclass
class Transcript:
    lines: list[str]
    winner: str


def _fmt_iso(g: Game, h: Iso) -> str:
    m, n = g.cfg.m, g.cfg.n
    return "{" + ", ".join(f"{m.names[a]}->{n.names[b]}" for a, b in sorted(h)) + "}"


def play(
    cfg: GameConfig,
    human: str | None = None,
    ask: Callable[[str], str] = input,
    say: Callable[[str], None] = print,
    bf: BackForth | None = None,
) -> Transcript:
    """Play a game; ``human`` is "I", "II" or None for machine against machine.

    Player I enters ``alpha side tuple [j]`` (side M or N, tuple as a,b|m);
    player II enters ``q:tuple; q:tuple`` listing one answer per extent.
    """
    sol = solve(cfg, bf)
    g = sol.strategy.game
    alg = g.alg
    lines: list[str] = []

    def log(s: str) -> None:
        lines.append(s)
        say(s)

    state = g.start()
    log(f"start: h = {_fmt_iso(g, state.iso)}, extent {alg.names[state.q]}, budget {state.alpha}")
    if not g.bf.is_partial_iso(state.iso):
        log("the starting map is not a partial isomorphism; II loses")
        return Transcript(lines, "I")
    while True:
        if human == "I":
            while True:
                if next(g.legal_moves_i(state), None) is None:
                    mv = None
                    break
                raw = ask("I> ").split()
                try:
                    beta, side_s, tup = int(raw[0]), raw[1], raw[2]
                    side = {"M": 0, "N": 1}[side_s]
                    if state.last is None:
                        j = None
                    else:
                        j = int(raw[3]) if len(raw) > 3 else 0
                    s = g.struct(side).parse_tuple(tup)
                    mv = MoveI(beta, side, s, j)
                except (IndexError, ValueError, KeyError) as exc:
                    say(f"could not read move: {exc}")
                    continue
                err = g.check_i(state, mv)
                if err is None:
                    break
                say(f"illegal: {err}")
        else:
            mv = sol.strategy.respond(state) if sol.winner == "I" else None
            if mv is None:
                mv = g.any_move_i(state)
        if mv is None:
            log("I cannot move; II wins")
            return Transcript(lines, "II")
        src = g.struct(mv.side)
        log(f"I: budget {mv.alpha}, plays {src.name}{src.fmt(mv.s)}" + ("" if mv.j is None else f" from answer {mv.j}"))
        state = g.after_i(state, mv)
        if human == "II":
            while True:
                raw = ask("II> ")
                if raw.strip() in ("", "pass"):
                    resp: MoveII | None = ()
                else:
                    resp = _read_response(g, state, mv, raw, say)
                    if resp is None:
                        continue
                err = g.check_ii(state, mv, resp)
                if err is None:
                    break
                say(f"illegal: {err}")
                if not any(True for _ in itertools.islice(g.legal_moves_ii(state, mv), 1)):
                    resp = None
                    break
        else:
            resp = g.ii_respond(state, mv)
            if resp is None:
                resp = next(g.legal_moves_ii(state, mv), None)
        if resp is None:
            log("II has no legal answer; I wins")
            return Transcript(lines, "I")
        for k, tr in enumerate(resp):
            log(f"II[{k}]: q = {alg.names[tr.q]}, t = {g.struct(1 - mv.side).fmt(tr.t)}, h = {_fmt_iso(g, tr.h)}")
        state = GameState(state.n + 1, state.iso, state.q, state.alpha, resp, state.history + [("II", resp)])
        if not resp:
            log("II's answer is empty; I cannot choose; II wins")
            return Transcript(lines, "II")


def _read_response(g: Game, state: GameState, mv: MoveI, raw: str, say) -> MoveII | None:
    src, dst = g.struct(mv.side), g.struct(1 - mv.side)
    out = []
    try:
        for part in raw.split(";"):
            qs, _, tup = part.partition(":")
            q = g.alg.element(qs.strip())
            t = dst.parse_tuple(tup)
            base = [pr for pr in state.iso if g.cfg.m.extent[pr[0]] == q]
            sq = tuple(src.restrict[x][q] for x in mv.s)
            pairs = list(zip(sq, t)) if mv.side == 0 else list(zip(t, sq))
            h = g.bf.gen(base + pairs)
            if h is None:
                say("illegal: iso rule: the answer does not define a bijection")
                return None
            out.append(Triple(h, q, t))
    except (KeyError, ValueError) as exc:
        say(f"could not read answer: {exc}")
        return None
    return tuple(out)
