from fractions import Fraction

import pytest

from src.cli.generate import generate_densities
from src.exceptions import InputError, ProtocolError
from src.geometry import CAKE, EMPTY, Piece, equals
from src.protocol import (
    Allocation,
    Certificate,
    ChoreDivision,
    Done,
    IASet,
    Objection,
    RunConfig,
    Transcript,
    run,
)
from src.valuation import StepDensity, evaluate
from src.verify import audit_transcript, check_envy_free, check_partition

F = Fraction


def P(*pairs):
    return Piece.from_pairs(pairs)


def assert_honest_run(densities, allocation, transcript):
    n = len(densities)
    assert check_partition(allocation)
    assert allocation.leftover.is_empty
    assert check_envy_free(allocation, densities).envy_free
    passes = transcript.of_kind("pass")
    assert len(passes) <= n * (n - 1) + 1
    assert len(transcript.of_kind("ia_insert")) == len(passes)
    report = audit_transcript(transcript, densities)
    assert report.ok, [str(f) for f in report.failures]


class TestState:
    def test_allocation_grant_accumulates(self):
        a = Allocation.empty(4)
        assert a.leftover == CAKE and a.n == 4
        a = a.grant({1: P((0, F(1, 4)))}, P((F(1, 4), 1)))
        a = a.grant({1: P((F(1, 4), F(1, 2)))}, P((F(1, 2), 1)))
        assert equals(a.shares[1], P((0, F(1, 2))))
        assert a.is_partition_of()

    def test_allocation_detects_overlap(self):
        a = Allocation({1: P((0, F(1, 2))), 2: P((F(1, 4), 1))}, EMPTY)
        assert not a.is_partition_of()

    def test_ia_insert(self):
        ia = IASet()
        ia.insert((1, 2), Certificate(F(1, 10), F(1, 10), F(1, 2)))
        assert (1, 2) in ia and (2, 1) not in ia
        assert ia.covers([1], [2]) and not ia.covers([1], [2, 3])
        with pytest.raises(ValueError):
            ia.insert((1, 2), Certificate(F(0), F(0), F(1)))
        with pytest.raises(ValueError):
            ia.insert((2, 1), Certificate(F(1, 2), F(0), F(1, 2)))

    def test_transcript_records_sequence(self):
        t = Transcript()
        assert t.record("1", "cut", 2, count=4) == 0
        assert t.record("1", "cut", 2, count=12) == 1
        assert t.cut_count() == 3 + 11
        assert [e.seq for e in t.of_kind("cut")] == [0, 1]


class TestInitialDivision:
    def test_identical_uniform_players_settle_at_step_3(self, uniform4):
        allocation, transcript = run(uniform4)
        assert [e.kind for e in transcript] == ["cut", "poll", "distribute", "allocate"]
        assert transcript.cut_count() == 3
        for i, share in enumerate(allocation.share_list()):
            assert equals(share, P((F(i, 4), F(i + 1, 4))))
        assert_honest_run(uniform4, allocation, transcript)

    def test_objection_names_lowest_envious_player(self, opposed4):
        engine = ChoreDivision(opposed4)
        outcome = engine.initial_division()
        assert isinstance(outcome, Objection)
        assert (outcome.objector, outcome.divider) == (1, 2)
        assert len(outcome.pieces) == 4

    def test_rejects_three_players(self):
        with pytest.raises(InputError):
            ChoreDivision([StepDensity.uniform()] * 3)

    def test_rejects_unknown_s_formula(self, uniform4):
        with pytest.raises(InputError):
            ChoreDivision(uniform4, RunConfig(s_formula="halving"))


class TestCoreRound:
    @pytest.fixture
    def skewed4(self):
        # player 1 sees player 2's quarters as (3/10, 3/10, 1/5, 1/5)
        first = StepDensity.normalized([0, F(1, 2), 1], [3, 2])
        return [first] + [StepDensity.uniform() for _ in range(3)]

    def test_named_r_and_roles(self, skewed4):
        engine = ChoreDivision(skewed4)
        objection = engine.initial_division()
        assert (objection.objector, objection.divider) == (1, 2)
        result = engine.core_round(objection)
        (name_r,) = engine.transcript.of_kind("name_r")
        assert name_r.data["r"] == result.r == 25
        (choose,) = engine.transcript.of_kind("choose")
        assert [agent for agent, _ in choose.data["picks"]] == [4, 3, 2, 1]
        labels = choose.data["labels"]
        picks = dict((agent, t) for agent, t in choose.data["picks"])
        assert labels[picks[1]] == "Y" and labels[picks[2]] == "Z"
        assert result.epsilon > 0

    def test_round_is_envy_free_and_conserves_cake(self, skewed4):
        engine = ChoreDivision(skewed4)
        result = engine.core_round(engine.initial_division())
        chosen = result.chosen
        for a, own in chosen.items():
            for other in chosen.values():
                assert evaluate(skewed4[a - 1], own) <= evaluate(skewed4[a - 1], other)
        assert engine.allocation.is_partition_of()
        assert equals(engine.allocation.leftover, result.leftover)

    def test_full_run(self, skewed4):
        allocation, transcript = run(skewed4)
        assert_honest_run(skewed4, allocation, transcript)


class TestShrinkPhase:
    def test_each_mini_round_takes_half_at_four_players(self, opposed4):
        allocation, transcript = run(opposed4)
        rounds = transcript.of_kind("mini_round")
        assert rounds
        for event in rounds:
            d = opposed4[event.actor - 1]
            chosen = sum(evaluate(d, p) for p in event.data["chosen"])
            assert chosen >= evaluate(d, event.data["leftover_before"]) / 2

    def test_ia_pair_inserted_once_per_pass(self, opposed4):
        _, transcript = run(opposed4)
        pairs = [tuple(e.data["pair"]) for e in transcript.of_kind("ia_insert")]
        assert len(pairs) == len(set(pairs)) == len(transcript.of_kind("pass"))
        for event in transcript.of_kind("ia_insert"):
            assert event.data["own"] + event.data["rest"] < event.data["other"]

    def test_literal_s_formula(self, opposed4):
        config = RunConfig(s_formula="literal")
        allocation, transcript = run(opposed4, config)
        assert all(e.data["formula"] == "literal" for e in transcript.of_kind("name_s"))
        assert_honest_run(opposed4, allocation, transcript)


class TestFinalPhase:
    def test_receivers_narrow_to_the_disagreeing_players(self):
        left = StepDensity.normalized([0, F(1, 2), 1], [1, 0])
        densities = [left, StepDensity.uniform(), StepDensity.uniform(), left]
        engine = ChoreDivision(densities, RunConfig(check_invariants=False))
        for pair in [(1, 2), (1, 3), (4, 2), (4, 3)]:
            engine.ia.insert(pair, Certificate(F(1, 10), F(1, 10), F(1, 2)))
        outcome = engine.final_phase()
        assert isinstance(outcome, Done)
        (narrow,) = engine.transcript.of_kind("narrow")
        assert narrow.data["receivers"] == [1, 4] and narrow.data["agree"] == [2, 3]
        (distribute,) = engine.transcript.of_kind("distribute")
        assert distribute.data["receivers"] == [1, 4]
        shares = outcome.allocation.shares
        assert equals(shares[2], EMPTY) and equals(shares[3], EMPTY)
        assert evaluate(left, shares[1]) == evaluate(left, shares[4]) == F(1, 2)

    def test_uncovered_disagreement_reenters_step_4(self):
        left = StepDensity.normalized([0, F(1, 2), 1], [1, 0])
        densities = [left, StepDensity.uniform(), StepDensity.uniform(), StepDensity.uniform()]
        engine = ChoreDivision(densities)
        outcome = engine.final_phase()
        assert outcome == Objection(1, 2, outcome.pieces, outcome.cut_ref)
        assert not engine.transcript.of_kind("narrow")


def segment(s):
    return P((F(s, 16), F(s + 1, 16)))


class TestSchedule:
    @pytest.fixture
    def tangled5(self):
        # segments 0-7 are on offer, 8-10, 11-12 and 13 are the reserves of players 2, 3 and 4
        heights = {
            2: [1, 1, 1, 1, 5, 5, 5, 5, 5, 5, 5, 1, 1, 1, 1, 1],
            3: [1, 2, 9, 9, 3, 9, 9, 9, 0, 0, 0, 9, 9, 0, 1, 1],
            4: [9, 9, 1, 9, 9, 2, 9, 9, 0, 0, 0, 0, 0, 9, 1, 1],
            5: [9, 9, 9, 1, 9, 9, 9, 9, 0, 0, 0, 0, 0, 0, 1, 1],
        }
        breakpoints = [F(s, 16) for s in range(17)]
        return [StepDensity.uniform()] + [StepDensity.normalized(breakpoints, heights[a]) for a in (2, 3, 4, 5)]

    def mini_round(self, engine):
        pieces = [segment(s) for s in range(8)]
        reserves = {2: [segment(8), segment(9), segment(10)], 3: [segment(11), segment(12)], 4: [segment(13)]}
        schedule = [("12", 2, 4), ("13", 3, 3), ("13", 4, 2)]
        return engine.augment_and_choose(
            "mini", "14", pieces, ["piece"] * 8, schedule, reserves, [5, 4, 3, 2, 1], 1, 2
        )

    def test_index_order_leaves_the_divider_envious(self, tangled5):
        # player 3 raises two of player 2's four tied pieces; 5 and 4 take the other two
        engine = ChoreDivision(tangled5, RunConfig(check_invariants=False))
        offered, picks = self.mini_round(engine)
        (event,) = engine.transcript.of_kind("schedule")
        assert event.data == {"order": [2, 3, 4], "rule": "required", "rejected": 0}
        assert picks == {5: 3, 4: 2, 3: 0, 2: 1, 1: 4}
        divider = tangled5[1]
        assert evaluate(divider, offered[picks[2]]) > evaluate(divider, offered[picks[5]])

    def test_envy_poll_falls_back_to_another_order(self, tangled5):
        engine = ChoreDivision(tangled5)
        offered, picks = self.mini_round(engine)
        (event,) = engine.transcript.of_kind("schedule")
        assert event.data == {"order": [3, 2, 4], "rule": "required", "rejected": 2}
        assert [e.actor for e in engine.transcript.of_kind("augment")] == [3, 2, 4]
        assert picks == {5: 3, 4: 2, 3: 0, 2: 1, 1: 4}
        for a, t in picks.items():
            for u in picks.values():
                assert evaluate(tangled5[a - 1], offered[t]) <= evaluate(tangled5[a - 1], offered[u])

    def test_four_players_never_need_a_fallback(self, generic4_run):
        _, transcript = generic4_run
        schedules = transcript.of_kind("schedule")
        assert schedules
        assert all(e.data["rule"] == "required" and e.data["rejected"] == 0 for e in schedules)

    def test_core_round_reserver_is_player_3(self, generic4_run):
        _, transcript = generic4_run
        current = None
        steps = []
        for event in transcript:
            if event.kind == "pass":
                current = event.data
            elif event.kind == "schedule" and event.step == "8":
                rest = [a for a in range(1, 5) if a not in (current["objector"], current["divider"])]
                assert event.data["order"] == [rest[0]]
                steps.append(event.seq)
        assert steps


class TestRun:
    def test_opposed_players(self, opposed4):
        allocation, transcript = run(opposed4)
        assert transcript.of_kind("pass")
        assert_honest_run(opposed4, allocation, transcript)

    def test_replay_matches_allocation(self, generic4_run):
        allocation, transcript = generic4_run
        replayed = transcript.replay_allocation(4)
        assert replayed.share_list() == allocation.share_list()
        assert equals(replayed.leftover, allocation.leftover)

    def test_deterministic(self, generic4):
        first = run(generic4)
        second = run(generic4)
        assert first[0].share_list() == second[0].share_list()
        assert first[1].events == second[1].events

    def test_pass_cap_raises_with_transcript(self, opposed4):
        with pytest.raises(ProtocolError) as err:
            run(opposed4, RunConfig(max_rounds=0))
        assert err.value.transcript is not None
        assert [e.kind for e in err.value.transcript][:2] == ["cut", "poll"]

    @pytest.mark.parametrize("seed", range(10))
    def test_seeded_four_players(self, seed):
        densities = generate_densities(4, seed, budget=4)
        allocation, transcript = run(densities)
        assert_honest_run(densities, allocation, transcript)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10, 200))
def test_four_player_corpus(seed):
    densities = generate_densities(4, seed, budget=6)
    allocation, transcript = run(densities)
    assert_honest_run(densities, allocation, transcript)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_five_player_corpus(seed):
    densities = generate_densities(5, seed, budget=6)
    allocation, transcript = run(densities)
    assert_honest_run(densities, allocation, transcript)
