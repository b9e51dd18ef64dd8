"""The chore division protocol: initial division, core rounds, shrinking, settlement.

Player numbering is 1-based. In every pass the objector plays the role of
"Player 1" and the divider that of "Player 2"; the remaining players fill
roles 3..n in increasing index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from src.agents import Agent, Augmentation
from src.config.settings import CHOOSE_RULES, DEFAULT_S_FORMULA, S_FORMULAS
from src.exceptions import ContractViolation, InputError, ProtocolError
from src.geometry import EMPTY, Piece, are_disjoint, difference, union, union_all
from src.utils.logger import get_logger
from src.valuation import StepDensity, cut_equal

from .params import Params, derive_params
from .state import Allocation, Certificate, IASet, Transcript

logger = get_logger(__name__)


@dataclass(frozen=True)
class RunConfig:
    s_formula: str = DEFAULT_S_FORMULA
    max_rounds: Optional[int] = None
    check_invariants: bool = True


@dataclass(frozen=True)
class Done:
    allocation: Allocation


@dataclass(frozen=True)
class Objection:
    """Step 4 entry: `objector` disagrees with `divider`'s equal pieces."""

    objector: int
    divider: int
    pieces: Tuple[Piece, ...]
    cut_ref: int


@dataclass(frozen=True)
class RoundResult:
    chosen: Dict[int, Piece]
    leftover: Piece
    epsilon: Fraction
    r: int


@dataclass
class _Offer:
    """Pieces on the table for a choosing round, with who augmented each."""

    pieces: List[Piece]
    labels: List[str]
    augmented_by: List[set] = field(default_factory=list)

    def __post_init__(self):
        if not self.augmented_by:
            self.augmented_by = [set() for _ in self.pieces]

    def copy(self) -> "_Offer":
        return _Offer(list(self.pieces), list(self.labels), [set(s) for s in self.augmented_by])


@dataclass(frozen=True)
class _Planned:
    """One player's augmentation, logged only once its schedule is adopted."""

    agent: int
    ways: int
    before: List[Piece]
    lots: List[Piece]
    augmentations: List[Augmentation]
    after: List[Piece]


class ChoreDivision:
    """One run of the protocol over fixed player densities."""

    def __init__(self, densities: Sequence[StepDensity], config: RunConfig = RunConfig()):
        if config.s_formula not in S_FORMULAS:
            raise InputError(f"unknown s formula {config.s_formula!r}")
        self.params: Params = derive_params(len(densities))
        self.n = self.params.n
        self.config = config
        self.agents = {i: Agent(i, d) for i, d in enumerate(densities, start=1)}
        self.transcript = Transcript()
        self.allocation = Allocation.empty(self.n)
        self.ia = IASet()
        self.receivers = list(range(1, self.n + 1))
        self.last_divider = 2
        self.passes = 0

    # -- helpers -----------------------------------------------------------

    def _fail(self, message: str):
        logger.error("protocol failure: %s", message)
        raise ProtocolError(message, self.transcript)

    def _roles(self, objector: int, divider: int) -> List[int]:
        """roles[rho - 1] is the player acting as Player rho."""
        rest = [a for a in range(1, self.n + 1) if a not in (objector, divider)]
        return [objector, divider] + rest

    def _cut(self, step: str, cutter: int, source: Piece, count: int, purpose: str) -> Tuple[List[Piece], int]:
        pieces = cut_equal(self.agents[cutter].density, source, count)
        seq = self.transcript.record(
            step, "cut", cutter, source=source, count=count, pieces=pieces, purpose=purpose
        )
        logger.debug("step %s: player %d cuts %s into %d", step, cutter, purpose, count)
        return pieces, seq

    def _take_reserves(self, step: str, agent: int, pool: List[Piece], count: int) -> List[Piece]:
        """Player sets aside the `count` largest pieces of `pool` (removed in place)."""
        taken = sorted(_largest(self.agents[agent], pool, count))
        self.transcript.record(step, "reserve", agent, pool=list(pool), taken=taken, count=count)
        lots = [pool[t] for t in taken]
        for t in reversed(taken):
            del pool[t]
        return lots

    def _plan_augment(self, agent: int, offer: _Offer, lots: List[Piece], ways: int) -> _Planned:
        """The agent's tie-creating augmentations applied to `offer` in place."""
        before = list(offer.pieces)
        augmentations: List[Augmentation] = self.agents[agent].augment_to_tie(before, lots, ways)
        for aug in augmentations:
            offer.pieces[aug.target_index] = union(offer.pieces[aug.target_index], aug.added)
            offer.augmented_by[aug.target_index].add(agent)
        return _Planned(agent, ways, before, list(lots), augmentations, list(offer.pieces))

    def _record_augment(self, step: str, plan: _Planned) -> List[Piece]:
        """Log an applied augmentation; returns the unused lots."""
        self.transcript.record(
            step, "augment", plan.agent,
            ways=plan.ways,
            before=plan.before,
            lots=plan.lots,
            targets=[aug.target_index for aug in plan.augmentations],
            added=[aug.added for aug in plan.augmentations],
            after=plan.after,
        )
        used = union_all(aug.added for aug in plan.augmentations)
        return [difference(lot, used) for lot in plan.lots]

    def _augment(self, step: str, agent: int, offer: _Offer, lots: List[Piece], ways: int) -> List[Piece]:
        return self._record_augment(step, self._plan_augment(agent, offer, lots, ways))

    def _picks(self, phase: str, offer: _Offer, order: Sequence[int], objector: int, divider: int,
               rule: str) -> Dict[int, int]:
        """Players pick in `order`; returns player -> index into the offer."""
        available = set(range(len(offer.pieces)))
        picks: Dict[int, int] = {}
        for agent in order:
            allowed = available
            if phase == "core" and agent == objector:
                allowed = {t for t in available if offer.labels[t] == "Y"}
            elif phase == "core" and agent == divider:
                allowed = {t for t in available if offer.labels[t] == "Z"}
            preferred = {t for t in allowed if agent in offer.augmented_by[t]}
            t = self.agents[agent].choose(offer.pieces, allowed, preferred, rule)
            picks[agent] = t
            available.discard(t)
        return picks

    def _envy_poll(self, offer: _Offer, picks: Dict[int, int]) -> Optional[Tuple[int, int]]:
        """First (a, b) with a envying b's piece among the picks, or None."""
        for a, t in picks.items():
            agent = self.agents[a]
            mine = agent.value(offer.pieces[t])
            for b, u in picks.items():
                if mine > agent.value(offer.pieces[u]):
                    return a, b
        return None

    def augment_and_choose(
        self,
        phase: str,
        step: str,
        pieces: Sequence[Piece],
        labels: Sequence[str],
        schedule: Sequence[Tuple[str, int, int]],
        reserves: Dict[int, List[Piece]],
        order: Sequence[int],
        objector: int,
        divider: int,
    ) -> Tuple[List[Piece], Dict[int, int]]:
        """Reserve augmentations (step, agent, ways) followed by choosing in `order`.

        Returns the augmented pieces and player -> index of the piece taken.

        The schedule as given under the "required" rule is tried first. A
        candidate the players' envy poll rejects is discarded unrecorded and the
        next is tried: every other augmentation order, then the "smallest" rule.
        """
        offer = _Offer(list(pieces), list(labels))
        candidates = [(rule, list(s)) for rule in CHOOSE_RULES for s in permutations(schedule)]
        first = None
        for rejected, (rule, candidate) in enumerate(candidates):
            trial = offer.copy()
            try:
                plans = [self._plan_augment(agent, trial, reserves[agent], ways) for _, agent, ways in candidate]
                picks = self._picks(phase, trial, order, objector, divider, rule)
            except ProtocolError as e:
                logger.debug("schedule %d: %s", rejected, e)
                first = first or (None, str(e))
                continue
            envy = self._envy_poll(trial, picks)
            adopted = (rule, candidate, plans, trial, picks, rejected)
            if first is None:
                first = (adopted, f"step {step}: player {envy[0]} envies player {envy[1]}" if envy else None)
            if envy is None or not self.config.check_invariants:
                return self._commit(phase, step, objector, divider, adopted)
            logger.debug("schedule %d (%s, %s) rejected: player %d envies player %d",
                         rejected, rule, [agent for _, agent, _ in candidate], *envy)
        adopted, message = first
        if adopted is not None:
            self._commit(phase, step, objector, divider, adopted)
        self._fail(message)

    def _commit(self, phase: str, step: str, objector: int, divider: int, adopted) -> Tuple[List[Piece], Dict[int, int]]:
        rule, candidate, plans, trial, picks, rejected = adopted
        if rejected:
            logger.info("Step %s: adopted schedule %s under the %s rule after %d rejections",
                        step, [agent for _, agent, _ in candidate], rule, rejected)
        self.transcript.record(
            candidate[0][0], "schedule", None,
            order=[agent for _, agent, _ in candidate], rule=rule, rejected=rejected,
        )
        for (aug_step, _, _), plan in zip(candidate, plans):
            self._record_augment(aug_step, plan)
        self.transcript.record(
            step, "choose", None,
            phase=phase,
            objector=objector,
            divider=divider,
            rule=rule,
            offered=list(trial.pieces),
            labels=list(trial.labels),
            augmented_by=[sorted(s) for s in trial.augmented_by],
            picks=[[agent, t] for agent, t in picks.items()],
        )
        return list(trial.pieces), picks

    def _allocate(self, step: str, grants: Dict[int, Piece], leftover: Piece) -> None:
        self.allocation = self.allocation.grant(grants, leftover)
        self.transcript.record(
            step, "allocate", None,
            grants=[grants.get(a, EMPTY) for a in range(1, self.n + 1)],
            leftover=leftover,
        )
        if self.config.check_invariants:
            if not self.allocation.is_partition_of():
                self._fail(f"step {step}: shares and leftover no longer partition the cake")
            self._check_ia()

    def _certificate(self, holder: int, other: int) -> Certificate:
        agent = self.agents[holder]
        return Certificate(
            own=agent.value(self.allocation.shares[holder]),
            rest=agent.value(self.allocation.leftover),
            other=agent.value(self.allocation.shares[other]),
        )

    def _check_ia(self) -> None:
        for holder, other in self.ia:
            if not self._certificate(holder, other).holds:
                self._fail(f"irrevocable advantage ({holder},{other}) was lost")

    # -- Steps 1-3 ---------------------------------------------------------

    def initial_division(self) -> Union[Done, Objection]:
        divider = 2
        pieces, seq = self._cut("1", divider, self.allocation.leftover, self.n, "cake")
        envious = [
            a for a in range(1, self.n + 1)
            if self.agents[a].is_envious(pieces[a - 1], pieces[:a - 1] + pieces[a:])
        ]
        self.transcript.record(
            "2", "poll", divider,
            question="envy",
            cut_ref=seq,
            polled=list(range(1, self.n + 1)),
            yes=envious,
        )
        if not envious:
            logger.info("No player is envious; settled at Step 3")
            self.transcript.record("3", "distribute", None, receivers=list(range(1, self.n + 1)),
                                   cut_ref=seq, blocks=[[a - 1] for a in range(1, self.n + 1)])
            self._allocate("3", {a: pieces[a - 1] for a in range(1, self.n + 1)}, EMPTY)
            return Done(self.allocation)
        logger.info("Player %d objects to player %d's division", envious[0], divider)
        return Objection(envious[0], divider, tuple(pieces), seq)

    # -- Steps 4-9 ---------------------------------------------------------

    def core_round(self, objection: Objection) -> RoundResult:
        i, j = objection.objector, objection.divider
        n, c, k = self.n, self.params.yz_count, self.params.k
        roles = self._roles(i, j)
        me = self.agents[i]
        cake = self.allocation.leftover

        # Step 4
        pieces = list(objection.pieces)
        try:
            larger, smaller = me.pick_unequal_pair(pieces)
        except ContractViolation as e:
            self._fail(str(e))
        self.transcript.record("4", "select_pair", i, cut_ref=objection.cut_ref, larger=larger, smaller=smaller)
        piece_a, piece_b = pieces[larger], pieces[smaller]

        # Step 5
        r = me.name_r(piece_a, piece_b, k)
        self.transcript.record("5", "name_r", i, k=k, larger_piece=piece_a, smaller_piece=piece_b, r=r)
        logger.info("Pass %d: player %d names r = %d", self.passes, i, r)

        # Step 6
        a_parts, _ = self._cut("6", j, piece_a, r, "A")
        b_parts, _ = self._cut("6", j, piece_b, r, "B")

        # Step 6.1: roles n-1 down to 3 set aside the 2(n - rho) largest of what remains in B
        pool = list(b_parts)
        reserves: Dict[int, List[Piece]] = {}
        for rho in range(n - 1, 2, -1):
            reserves[roles[rho - 1]] = self._take_reserves("6.1", roles[rho - 1], pool, 2 * (n - rho))

        # Step 7 / 7.1
        y_idx = sorted(_smallest(me, pool, c))
        ys = [pool[t] for t in y_idx]
        own_lots = [pool[t] for t in range(len(pool)) if t not in set(y_idx)]
        self.transcript.record("7", "designate", i, label="Y", members=ys, case="smallest")
        y_offer = _Offer(ys, ["Y"] * c)
        self._augment("7.1", i, y_offer, own_lots, c)
        ys = y_offer.pieces
        y_level = me.value(ys[0])

        # Step 7.2
        ranked = _largest(me, a_parts, len(a_parts))
        top = ranked[:c]
        if all(me.value(a_parts[t]) > y_level for t in top):
            case = "largest"
            zs = [a_parts[t] for t in sorted(top)]
            div_lots = [a_parts[t] for t in range(r) if t not in set(top)]
        else:
            case = "split"
            zs, _ = self._cut("7.2", i, a_parts[ranked[0]], c, "largest A piece")
            div_lots = [a_parts[t] for t in range(r) if t != ranked[0]]
            if not all(me.value(z) > y_level for z in zs):
                self._fail("step 7.2: neither case holds for the objector")
        self.transcript.record("7.2", "designate", i, label="Z", members=zs, case=case)

        # Step 7.3
        z_offer = _Offer(zs, ["Z"] * c)
        self._augment("7.3", j, z_offer, div_lots, c)
        zs = z_offer.pieces
        self.transcript.record("7.3", "yz", None, objector=i, divider=j, ys=ys, zs=zs)
        if min(me.values(zs)) <= y_level:
            self._fail("step 7.3: objector no longer sees every Z above every Y")

        # Step 8: roles n-1 down to 3 create (n - rho + 1)-way ties for smallest
        # Step 9: choose in role order n, ..., 1
        schedule = [("8", roles[rho - 1], n - rho + 1) for rho in range(n - 1, 2, -1)]
        offered, picks = self.augment_and_choose(
            "core", "9", ys + zs, ["Y"] * c + ["Z"] * c, schedule, reserves, list(reversed(roles)), i, j
        )
        chosen = {agent: offered[t] for agent, t in picks.items()}
        if self.config.check_invariants and not are_disjoint(list(chosen.values())):
            self._fail("step 9: chosen pieces overlap")
        leftover = difference(cake, union_all(chosen.values()))
        epsilon = me.value(chosen[j]) - me.value(chosen[i])
        self.transcript.record("9", "epsilon", i, divider=j, own_piece=chosen[i], other_piece=chosen[j], value=epsilon)
        if epsilon <= 0:
            self._fail(f"step 9: epsilon = {epsilon} is not positive")
        self._allocate("9", chosen, leftover)
        return RoundResult(chosen, leftover, epsilon, r)

    # -- Steps 10-15 -------------------------------------------------------

    def shrink_phase(self, objector: int, divider: int, epsilon: Fraction) -> int:
        """Run the mini-rounds, then insert (objector, divider) into IA. Returns s."""
        me = self.agents[objector]
        f = self.params.shrink_fraction
        start = me.value(self.allocation.leftover)
        s = me.name_s(start, epsilon, f, self.config.s_formula)
        self.transcript.record(
            "10", "name_s", objector,
            leftover_value=start, epsilon=epsilon, shrink=f, formula=self.config.s_formula, s=s,
        )
        logger.info("Player %d names s = %d (epsilon = %s)", objector, s, epsilon)
        rounds = 0
        while rounds < s or me.value(self.allocation.leftover) >= epsilon:
            if rounds >= s:
                logger.warning("Leftover still %s >= epsilon after %d mini-rounds; continuing",
                               me.value(self.allocation.leftover), rounds)
            self._mini_round(objector, divider, rounds)
            rounds += 1

        certificate = self._certificate(objector, divider)
        self.transcript.record(
            "15", "ia_insert", objector,
            pair=[objector, divider], own=certificate.own, rest=certificate.rest, other=certificate.other,
        )
        try:
            self.ia.insert((objector, divider), certificate)
        except ValueError as e:
            self._fail(f"step 15: {e}")
        logger.info("IA gains (%d,%d); %d pairs", objector, divider, len(self.ia))
        return s

    def _mini_round(self, objector: int, divider: int, index: int) -> None:
        n, f = self.n, self.params.shrink_fraction
        roles = self._roles(objector, divider)
        me = self.agents[objector]
        leftover = self.allocation.leftover

        # Step 11: objector cuts; roles 2..n-1 set aside n - rho largest pieces
        pool, _ = self._cut("11", objector, leftover, self.params.mini_pieces, "leftover")
        pool = list(pool)
        reserves = {}
        for rho in range(2, n):
            reserves[roles[rho - 1]] = self._take_reserves("11", roles[rho - 1], pool, n - rho)

        # Steps 12-13: roles 2..n-1 create (n - rho + 1)-way ties; Step 14: choose n..1
        schedule = [("12" if rho == 2 else "13", roles[rho - 1], n - rho + 1) for rho in range(2, n)]
        offered, picks = self.augment_and_choose(
            "mini", "14", pool, ["piece"] * len(pool), schedule, reserves, list(reversed(roles)), objector, divider
        )
        chosen = {agent: offered[t] for agent, t in picks.items()}
        remaining = difference(leftover, union_all(chosen.values()))
        self.transcript.record(
            "14", "mini_round", objector,
            index=index, leftover_before=leftover, chosen=list(chosen.values()), leftover_after=remaining,
        )
        if sum(me.values(chosen.values())) < f * me.value(leftover):
            self._fail("step 14: less than the guaranteed fraction of the leftover was allocated")
        self._allocate("14", chosen, remaining)

    # -- Steps 16-19 -------------------------------------------------------

    def final_phase(self) -> Union[Done, Objection]:
        """Settle the leftover among receivers, or name the next (objector, divider)."""
        while True:
            receivers = self.receivers
            cutter = self.last_divider if self.last_divider in receivers else receivers[0]
            pieces, seq = self._cut("16", cutter, self.allocation.leftover, self.params.final_pieces, "leftover")
            agree = [a for a in receivers if self.agents[a].agrees_all_equal(pieces)]
            disagree = [a for a in receivers if a not in agree]
            self.transcript.record("17", "poll", cutter, question="agree", cut_ref=seq,
                                   polled=list(receivers), yes=agree)
            if not disagree:
                return self._distribute(agree, pieces, seq)
            if self.ia.covers(disagree, agree):
                logger.info("Receivers narrow to %s (they hold IA over %s)", disagree, agree)
                self.transcript.record("18", "narrow", None, receivers=disagree, agree=agree)
                self.receivers = disagree
                continue
            i, j = min((d, a) for d in disagree for a in agree if (d, a) not in self.ia)
            logger.info("Step 19: re-entering with objector %d, divider %d", i, j)
            return Objection(i, j, tuple(pieces), seq)

    def _distribute(self, receivers: List[int], pieces: List[Piece], cut_ref: int) -> Done:
        per = len(pieces) // len(receivers)
        if per * len(receivers) != len(pieces):
            self._fail(f"step 18: {len(pieces)} pieces cannot be split among {len(receivers)}")
        outsiders = [a for a in range(1, self.n + 1) if a not in receivers]
        if not self.ia.covers(receivers, outsiders):
            self._fail("step 18: receivers do not hold IA over every other player")
        blocks = [list(range(b * per, (b + 1) * per)) for b in range(len(receivers))]
        grants = {a: union_all(pieces[t] for t in block) for a, block in zip(receivers, blocks)}
        self.transcript.record("18", "distribute", None, receivers=list(receivers), cut_ref=cut_ref, blocks=blocks)
        self._allocate("18", grants, EMPTY)
        logger.info("Leftover distributed among %s", receivers)
        return Done(self.allocation)

    # -- driver ------------------------------------------------------------

    def run(self) -> Tuple[Allocation, Transcript]:
        try:
            return self._run()
        except ProtocolError as e:
            if e.transcript is None:
                e.transcript = self.transcript
            raise

    def _run(self) -> Tuple[Allocation, Transcript]:
        cap = self.config.max_rounds if self.config.max_rounds is not None else self.params.max_passes + 2
        outcome = self.initial_division()
        while isinstance(outcome, Objection):
            self.passes += 1
            if self.passes > cap:
                self._fail(f"exceeded the cap of {cap} passes")
            self.transcript.record("4", "pass", None, index=self.passes,
                                   objector=outcome.objector, divider=outcome.divider, cut_ref=outcome.cut_ref)
            result = self.core_round(outcome)
            self.last_divider = outcome.divider
            self.shrink_phase(outcome.objector, outcome.divider, result.epsilon)
            outcome = self.final_phase()
        logger.info("Done after %d passes, %d cuts, %d IA pairs",
                    self.passes, self.transcript.cut_count(), len(self.ia))
        return outcome.allocation, self.transcript


def _smallest(agent: Agent, pieces: Sequence[Piece], count: int) -> List[int]:
    values = agent.values(pieces)
    return sorted(range(len(pieces)), key=lambda t: (values[t], t))[:count]


def _largest(agent: Agent, pieces: Sequence[Piece], count: int) -> List[int]:
    values = agent.values(pieces)
    return sorted(range(len(pieces)), key=lambda t: (-values[t], t))[:count]


def run(densities: Sequence[StepDensity], config: RunConfig = RunConfig()) -> Tuple[Allocation, Transcript]:
    """Run the full protocol; raises ProtocolError carrying the transcript prefix."""
    return ChoreDivision(densities, config).run()
