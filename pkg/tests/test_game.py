from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from helpers import loops
from wtsdist.game import (
    BlindStrategy1,
    BudgetExceeded,
    Configuration,
    MemoryStrategy2,
    StrategyViolation,
    bounded_blind_value,
    bounded_blind_value_bruteforce,
    bounded_blind_values,
    bounded_value,
    bounded_value_tree,
    first_choice,
    mimic_strategy,
    play_round,
    playout,
    weight_copier,
)
from wtsdist.generators import IneqSpec, build_inequivalence, random_wts
from wtsdist.metrics import (
    acc_discounted,
    acc_limavg,
    discrete,
    hamming_discounted,
    maxlead,
    pointwise,
)
from wtsdist.values import INF
from wtsdist.wts import Transition, W, enumerate_lassos, lasso, system

HALF = Fraction(1, 2)
ORACLE_METRICS = [discrete(), pointwise(), acc_discounted(HALF), hamming_discounted(Fraction(1, 3)),
                  acc_limavg(), maxlead()]
IDS = [m.descriptor for m in ORACLE_METRICS]


@pytest.fixture
def loop13():
    return loops(1, 3)


@pytest.fixture
def ineq_discrete():
    spec = IneqSpec(lasso([("a", 0)], [("b", 0)]), lasso([("a", 0)], [("c", 0)]), discrete())
    return build_inequivalence(spec)[0]


class TestRounds:
    def test_forced_moves(self, loop13):
        c = play_round(first_choice(loop13, 1), first_choice(loop13, 2), Configuration.initial("s", "t"), loop13)
        assert len(c.p1) == len(c.p2) == 1
        assert c.p1.last == "s" and c.p2.last == "t"

    def test_copier_matches_weight(self):
        sys = system(["s", "t"], [("s", 1, "s"), ("s", 2, "s"), ("t", 2, "t"), ("t", 1, "t")])
        theta1 = lambda c: sys.out("s")[1]  # noqa: E731
        c = play_round(theta1, weight_copier(sys), Configuration.initial("s", "t"), sys)
        assert c.p1.trace()[-1] == c.p2.trace()[-1]

    def test_wrong_source(self, loop13):
        bad = lambda c: Transition("t", W(3, "a"), "t")  # noqa: E731
        with pytest.raises(StrategyViolation):
            play_round(bad, first_choice(loop13, 2), Configuration.initial("s", "t"), loop13)

    def test_not_a_transition(self, loop13):
        bad = lambda c: Transition("s", W(9, "a"), "s")  # noqa: E731
        with pytest.raises(StrategyViolation):
            play_round(bad, first_choice(loop13, 2), Configuration.initial("s", "t"), loop13)

    def test_player2_sees_move(self):
        seen = []

        def theta2(c):
            seen.append((len(c.p1), len(c.p2)))
            return first_choice(sys, 2)(c)

        sys = loops(0, 0)
        playout(first_choice(sys, 1), theta2, "s", "t", 3, sys)
        assert seen == [(1, 0), (2, 1), (3, 2)]


class TestPlayout:
    def test_empty(self, loop13):
        p = playout(first_choice(loop13, 1), first_choice(loop13, 2), "s", "t", 0)
        assert len(p) == 0 and p.p1.start == "s" and p.p2.start == "t"

    def test_deterministic(self):
        sys = system(["a", "b", "c"], [("a", 1, "b"), ("b", 2, "c"), ("c", 3, "a")])
        p = playout(first_choice(sys, 1), first_choice(sys, 2), "a", "b", 3, sys)
        assert [w.weight for w in p.traces[0]] == [1, 2, 3]
        assert [w.weight for w in p.traces[1]] == [2, 3, 1]

    @pytest.mark.parametrize("seed", range(10))
    def test_mimic(self, seed):
        sys = random_wts(4, 3, 2, (0, 2), seed)
        # an arbitrary history-dependent player 1
        theta1 = lambda c: sys.out(c.p1.last)[len(c.p1) % len(sys.out(c.p1.last))]  # noqa: E731
        p = playout(theta1, mimic_strategy(sys), "q0", "q0", 6, sys)
        assert p.traces[0] == p.traces[1]

    def test_blind_strategy_walks_lasso(self):
        sys = system(["s", "u"], [("s", 1, "u"), ("u", 2, "u"), ("u", 3, "s")])
        path = sorted(enumerate_lassos(sys, "s", 1, 2), key=repr)[0]
        theta1 = BlindStrategy1(path, sys)
        p = playout(theta1, first_choice(sys, 2), "s", "s", 5, sys)
        assert p.p1.steps == tuple(path.transition(j) for j in range(5))

    def test_blind_strategy_checks_path(self):
        other = system(["s"], [("s", 7, "s")])
        path = next(iter(enumerate_lassos(other, "s", 0, 1)))
        with pytest.raises(StrategyViolation):
            BlindStrategy1(path, system(["s"], [("s", 1, "s")]))

    def test_memory_strategy(self):
        # player 2 alternates its two loops, counting rounds in memory
        sys = system(["s", "t"], [("s", 0, "s"), ("t", 0, "t"), ("t", 1, "t")])

        def choose(c, mem):
            return sys.out("t")[mem % 2], mem + 1

        p = playout(first_choice(sys, 1), MemoryStrategy2(0, choose), "s", "t", 4, sys)
        assert [w.weight for w in p.traces[1]] == [0, 1, 0, 1]


class TestBoundedValue:
    def test_pointwise_k1(self, loop13):
        assert bounded_value(loop13, "s", "t", pointwise(), 1) == 2

    def test_discounted_k3(self, loop13):
        assert bounded_value(loop13, "s", "t", acc_discounted(HALF), 3) == Fraction(7, 2)
        assert bounded_value_tree(loop13, "s", "t", acc_discounted(HALF), 3) == Fraction(7, 2)

    @pytest.mark.parametrize("m", ORACLE_METRICS, ids=IDS)
    @pytest.mark.parametrize("k", [0, 1, 3, 5])
    def test_same_state_is_zero(self, m, k):
        sys = random_wts(4, 3, 2, (0, 3), 11)
        assert bounded_value(sys, "q1", "q1", m, k) == 0
        assert bounded_blind_value(sys, "q1", "q1", m, k) == 0

    def test_budget(self):
        sys = random_wts(4, 3, 1, (0, 3), 2)
        with pytest.raises(BudgetExceeded):
            bounded_value_tree(sys, "q0", "q1", pointwise(), 8, max_nodes=50)
        with pytest.raises(BudgetExceeded):
            bounded_blind_value(sys, "q0", "q1", pointwise(), 8, max_nodes=5)

    def test_budget_from_env(self, monkeypatch):
        monkeypatch.setenv("WTSDIST_MAX_NODES", "3")
        sys = random_wts(4, 3, 1, (0, 3), 2)
        with pytest.raises(BudgetExceeded):
            bounded_value_tree(sys, "q0", "q1", pointwise(), 5)

    def test_information_matters(self):
        # s commits to a or b after a shared step; t must choose first.
        sys = system(["s", "m", "t", "ta", "tb", "x", "y"],
                     [("s", 0, "m"), ("m", 1, "x"), ("m", 2, "y"), ("x", 1, "x"), ("y", 2, "y"),
                      ("t", 0, "ta"), ("t", 0, "tb"), ("ta", 1, "x"), ("tb", 2, "y")])
        assert bounded_blind_value(sys, "s", "t", pointwise(), 3) == 0
        assert bounded_value(sys, "s", "t", pointwise(), 3) == 1


def small_systems(max_states=4, labels=2):
    return st.builds(
        lambda n, out, a, seed: random_wts(n, out, a, (0, 2), seed),
        st.integers(1, max_states), st.integers(1, 3), st.integers(0, labels), st.integers(0, 10**6),
    )


class TestOracleAgreement:
    @pytest.mark.parametrize("m", ORACLE_METRICS, ids=IDS)
    @settings(max_examples=25, deadline=None)
    @given(sys=small_systems(3), k=st.integers(0, 4))
    def test_memo_equals_tree(self, m, sys, k):
        s, t = sys.states[0], sys.states[-1]
        assert bounded_value(sys, s, t, m, k) == bounded_value_tree(sys, s, t, m, k)

    @pytest.mark.parametrize("m", ORACLE_METRICS, ids=IDS)
    @settings(max_examples=25, deadline=None)
    @given(sys=small_systems(3), k=st.integers(0, 4))
    def test_blind_dp_equals_bruteforce(self, m, sys, k):
        s, t = sys.states[0], sys.states[-1]
        assert bounded_blind_value(sys, s, t, m, k) == bounded_blind_value_bruteforce(sys, s, t, m, k)

    @pytest.mark.parametrize("m", ORACLE_METRICS, ids=IDS)
    @settings(max_examples=25, deadline=None)
    @given(sys=small_systems(4), kmax=st.integers(0, 5))
    def test_all_depths_match_single_depth(self, m, sys, kmax):
        s, t = sys.states[0], sys.states[-1]
        vals = bounded_blind_values(sys, s, t, m, kmax)
        assert vals == [bounded_blind_value_bruteforce(sys, s, t, m, k) for k in range(kmax + 1)]

    @pytest.mark.parametrize("m", ORACLE_METRICS, ids=IDS)
    @settings(max_examples=25, deadline=None)
    @given(sys=small_systems(4))
    def test_blind_below_full(self, m, sys):
        s, t = sys.states[0], sys.states[-1]
        for k in range(5):
            assert bounded_blind_value(sys, s, t, m, k) <= bounded_value(sys, s, t, m, k)

    @pytest.mark.parametrize("m", [discrete(), pointwise(), acc_discounted(HALF), maxlead()],
                             ids=lambda m: m.descriptor)
    @settings(max_examples=25, deadline=None)
    @given(sys=small_systems(4))
    def test_monotone_in_depth(self, m, sys):
        s, t = sys.states[0], sys.states[-1]
        full = [bounded_value(sys, s, t, m, k) for k in range(6)]
        blind = bounded_blind_values(sys, s, t, m, 5)
        assert all(a <= b for a, b in zip(full, full[1:]))
        assert all(a <= b for a, b in zip(blind, blind[1:]))


class TestEqualTraces:
    @pytest.mark.parametrize("k", [2, 3, 4, 6])
    def test_blind_zero(self, ineq_discrete, k):
        assert bounded_blind_value(ineq_discrete, "s", "t", discrete(), k) == 0

    def test_full_information_sees_difference(self, ineq_discrete):
        assert bounded_value(ineq_discrete, "s", "t", discrete(), 2) == INF
