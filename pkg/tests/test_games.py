import random

import pytest
from hypothesis import given, settings, strategies as st

from artifact.backforth import sim_alpha
from artifact.games import ConfigInvalid, Game, GameConfig, GameState, MoveI, play, search_winner, solve
from artifact.gen import SIGNATURES, random_structure, small_algebra

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("alpha,winner", [(0, "II"), (1, "II"), (2, "II"), (3, "I")])
def test_pure_sets(s2, s3, alpha, winner):
    cfg = GameConfig(s2, s3, (), (), alpha)
    assert solve(cfg).winner == winner
    assert search_winner(cfg) == winner


def test_alpha_zero_depends_only_on_the_iso(c3):
    a, b = c3.section("a"), c3.section("b")
    bad = GameConfig(c3, c3, (a,), (b,), 0)
    good = GameConfig(c3, c3, (a,), (a,), 0)
    assert solve(bad).winner == "I"
    assert solve(good).winner == "II"
    g = Game(good)
    assert list(g.legal_moves_i(g.start())) == []


def test_invalid_configs(c3):
    a, am = c3.section("a"), c3.section("a|m")
    with pytest.raises(ConfigInvalid):
        Game(GameConfig(c3, c3, (a,), (), 1))
    with pytest.raises(ConfigInvalid):
        Game(GameConfig(c3, c3, (a,), (am,), 1))


def test_first_moves_cover_both_sides(s2, s3):
    g = Game(GameConfig(s2, s3, (), (), 2))
    moves = list(g.legal_moves_i(g.start()))
    assert len(moves) == 2 * (len(s2) + len(s3))
    assert {m.alpha for m in moves} == {0, 1}


def test_illegal_moves_name_the_rule(s2, s3):
    g = Game(GameConfig(s2, s3, (), (), 2))
    st0 = g.start()
    assert "budget rule" in g.check_i(st0, MoveI(2, 0, (0,)))
    assert "move cap" in g.check_i(st0, MoveI(1, 0, (0, 1)))
    assert g.check_i(st0, MoveI(1, 0, (0,))) is None


def test_echo_response_is_legal(c3):
    a = c3.section("a")
    g = Game(GameConfig(c3, c3, (a,), (a,), 2))
    mv = MoveI(1, 0, (a,))
    state = g.after_i(g.start(), mv)
    resp = g.ii_respond(state, mv)
    assert resp is not None and g.check_ii(state, mv, resp) is None


def _replay_ii(g, state):
    """Every I-move sequence against II's certificate; returns positions visited."""
    count = 0
    for mv in list(g.legal_moves_i(state)):
        after = g.after_i(state, mv)
        resp = g.ii_respond(after, mv)
        assert resp is not None, f"no reply to {mv}"
        assert g.check_ii(after, mv, resp) is None
        nxt = GameState(state.n + 1, after.iso, after.q, after.alpha, resp, after.history + [("II", resp)])
        assert nxt.alpha < state.alpha
        count += 1 + _replay_ii(g, nxt)
    return count


def test_ii_certificate_is_sound(s2, s3, c3, d4):
    cases = [GameConfig(s2, s3, (), (), 2), GameConfig(c3, c3, (), (), 2), GameConfig(d4, d4, (), (), 2)]
    for cfg in cases:
        sol = solve(cfg)
        assert sol.winner == "II"
        assert _replay_ii(sol.strategy.game, sol.strategy.game.start()) > 0


def test_auto_play_reaches_the_solved_winner(s2, s3):
    for alpha, winner in [(2, "II"), (3, "I")]:
        t = play(GameConfig(s2, s3, (), (), alpha), human=None, say=lambda s: None)
        assert t.winner == winner


def _scripted_i(rng, s2, s3, alpha):
    def ask(_prompt):
        side = rng.choice(["M", "N"])
        st_ = s2 if side == "M" else s3
        return f"{rng.randrange(alpha + 1)} {side} {rng.choice(st_.names)} {rng.randrange(2)}"

    return ask


@given(seeds)
@settings(max_examples=20)
def test_human_i_never_beats_a_ii_certificate(seed):
    from artifact.fixtures import pure_set

    s2, s3 = pure_set(2), pure_set(3)
    rng = random.Random(seed)
    t = play(GameConfig(s2, s3, (), (), 2), human="I", ask=_scripted_i(rng, s2, s3, 2), say=lambda s: None)
    assert t.winner == "II"
    assert sum(1 for line in t.lines if line.startswith("I: ")) <= 2


def test_human_ii_echo_terminates(c3):
    a = c3.section("a")
    answers = iter(["top:a", "m:a|m", "top:b", "pass"] * 10)
    t = play(GameConfig(c3, c3, (a,), (a,), 2), human="II", ask=lambda _: next(answers), say=lambda s: None)
    assert t.winner in ("I", "II")
    assert sum(1 for line in t.lines if line.startswith("I: ")) <= 2


@given(seeds)
@settings(max_examples=25)
def test_solver_matches_search_and_q(seed):
    rng = random.Random(seed)
    alg = small_algebra(rng)
    sig = SIGNATURES[rng.choice(["empty", "unary", "const", "fun"])]
    m = random_structure(rng, alg, sig, "M")
    n = random_structure(rng, alg, sig, "N")
    alpha = rng.randint(0, 2)
    for k in (0, 1):
        pairs = [(x, y) for x in m.tuples(k) for y in n.tuples(k) if m.tuple_extent(x) == n.tuple_extent(y)]
        x, y = rng.choice(pairs)
        cfg = GameConfig(m, n, m.homogeneous(x), n.homogeneous(y), alpha)
        w = solve(cfg).winner
        assert w == search_winner(cfg)
        assert (w == "II") == (sim_alpha(m, x, n, y, alpha) is not None)
