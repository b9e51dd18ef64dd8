"""Transcript auditor.

Replays a transcript against the players' densities and re-derives every
guarantee using only set algebra and exact evaluation. Engine state is never
consulted: the auditor rebuilds the allocation, leftover, reserves and IA set
from the events themselves.
"""

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, floor
from typing import Dict, List, Optional, Sequence, Set, Tuple

from src.config.settings import CHOOSE_RULES
from src.exceptions import InputError
from src.geometry import (
    EMPTY,
    Piece,
    are_disjoint,
    difference,
    equals,
    intersection,
    is_subset,
    union,
    union_all,
)
from src.protocol.params import Params, derive_params
from src.protocol.state import Allocation, Event, Transcript
from src.utils.logger import get_logger
from src.valuation import StepDensity, evaluate

logger = get_logger(__name__)

CHECKS = (
    "equal-cut",
    "poll",
    "select-pair",
    "name-r",
    "reserve-choice",
    "reserve-augment",
    "yz-strict",
    "choose-rule",
    "choose-allocate",
    "epsilon",
    "name-s",
    "shrink",
    "ia-certificate",
    "ia-growth",
    "ia-coverage",
    "partition",
    "partial-envy",
    "termination",
    "complete",
)


@dataclass(frozen=True)
class AuditFailure:
    check: str
    seq: Optional[int]
    detail: str

    def __str__(self) -> str:
        where = f"event {self.seq}" if self.seq is not None else "end of transcript"
        return f"[{self.check}] {where}: {self.detail}"


@dataclass
class AuditReport:
    failures: List[AuditFailure] = field(default_factory=list)
    checked: Counter = field(default_factory=Counter)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def failed_checks(self) -> List[str]:
        return sorted({f.check for f in self.failures})


class _Auditor:
    def __init__(self, densities: Sequence[StepDensity]):
        self.densities = list(densities)
        self.params: Params = derive_params(len(self.densities))
        self.n = self.params.n
        self.report = AuditReport()
        self.cuts: Dict[int, Event] = {}
        self.allocation = Allocation.empty(self.n)
        self.ia: Dict[Tuple[int, int], Tuple[Fraction, Fraction, Fraction]] = {}
        self.receivers = list(range(1, self.n + 1))
        self.passes = 0
        self.pair: Optional[Tuple[int, int]] = None
        self.inserts_this_pass = 0
        self.selected: Optional[Tuple[Piece, Piece]] = None
        self.reserves: Dict[int, Piece] = {}
        self.augmenters: Dict[int, Set[int]] = {}
        self.schedule: List[int] = []
        self.rule: Optional[str] = None
        self.pending: Optional[Tuple[str, int, Dict[int, Piece]]] = None
        self.core_picks: Optional[Dict[int, Piece]] = None
        self.epsilon: Optional[Fraction] = None

    # -- plumbing ----------------------------------------------------------

    def v(self, agent: int, piece: Piece) -> Fraction:
        return evaluate(self.densities[agent - 1], piece)

    def expect(self, check: str, condition: bool, event: Optional[Event], detail: str) -> bool:
        self.report.checked[check] += 1
        if not condition:
            seq = event.seq if event is not None else None
            self.report.failures.append(AuditFailure(check, seq, detail))
            logger.debug("audit failure %s at %s: %s", check, seq, detail)
        return condition

    def run(self, transcript: Transcript) -> AuditReport:
        for event in transcript:
            handler = getattr(self, f"on_{event.kind}", None)
            if handler is None:
                raise InputError(f"event {event.seq}: unknown kind {event.kind!r}")
            try:
                handler(event)
            except KeyError as e:
                raise InputError(f"event {event.seq} ({event.kind}) lacks field {e}") from e
        self.finish()
        return self.report

    # -- cuts and polls ----------------------------------------------------

    def on_cut(self, e: Event) -> None:
        d = e.data
        pieces, source = d["pieces"], d["source"]
        self.cuts[e.seq] = e
        exact = (
            len(pieces) == d["count"]
            and are_disjoint(pieces)
            and equals(union_all(pieces), source)
        )
        if exact and self.v(e.actor, source) == 0:
            sizes = {p.length for p in pieces}
        else:
            sizes = {self.v(e.actor, p) for p in pieces}
        self.expect("equal-cut", exact and len(sizes) <= 1, e,
                    f"player {e.actor}'s {d['count']} pieces of {d['purpose']} are not an equal partition: {sorted(sizes)}")
        if d["purpose"] in ("cake", "leftover"):
            self.expect("partition", equals(source, self.allocation.leftover), e,
                        "cut source is not the current leftover")

    def on_poll(self, e: Event) -> None:
        d = e.data
        pieces = self._cut_pieces(e, d["cut_ref"])
        if d["question"] == "envy":
            expected = [
                a for a in d["polled"]
                if any(self.v(a, pieces[a - 1]) > self.v(a, p) for p in pieces)
            ]
        else:
            expected = [a for a in d["polled"] if len({self.v(a, p) for p in pieces}) <= 1]
            self.expect("poll", sorted(d["polled"]) == sorted(self.receivers), e,
                        f"polled {d['polled']} but receivers are {self.receivers}")
        self.expect("poll", list(d["yes"]) == expected, e,
                    f"recorded answers {d['yes']}, honest answers {expected}")

    def _cut_pieces(self, e: Event, ref: int) -> List[Piece]:
        if ref not in self.cuts:
            raise InputError(f"event {e.seq} refers to unknown cut {ref}")
        return self.cuts[ref].data["pieces"]

    # -- outer passes ------------------------------------------------------

    def on_pass(self, e: Event) -> None:
        d = e.data
        self._close_pass(e)
        self.passes += 1
        self.expect("termination", self.passes <= self.params.max_passes + 1, e,
                    f"pass {self.passes} exceeds n(n-1)+1 = {self.params.max_passes + 1}")
        pair = (d["objector"], d["divider"])
        self.expect("ia-growth", pair not in self.ia, e, f"pass repeats IA pair {pair}")
        self.pair = pair
        self.inserts_this_pass = 0
        self.reserves = {}

    def _close_pass(self, e: Optional[Event]) -> None:
        if self.pair is not None:
            self.expect("ia-growth", self.inserts_this_pass == 1, e,
                        f"pass {self.passes} inserted {self.inserts_this_pass} IA pairs")

    def on_select_pair(self, e: Event) -> None:
        d = e.data
        pieces = self._cut_pieces(e, d["cut_ref"])
        a, b = pieces[d["larger"]], pieces[d["smaller"]]
        self.selected = (a, b)
        self.expect("select-pair", self.pair is not None and e.actor == self.pair[0], e,
                    f"player {e.actor} selects but the objector is {self.pair}")
        self.expect("select-pair", self.v(e.actor, a) > self.v(e.actor, b), e,
                    "selected A is not larger than B for the objector")

    def on_name_r(self, e: Event) -> None:
        d = e.data
        a, b = self.v(e.actor, d["larger_piece"]), self.v(e.actor, d["smaller_piece"])
        k = self.params.k
        if not self.expect("name-r", a > b and k == d["k"], e, "named with A not larger than B or wrong k"):
            return
        if self.selected is not None:
            self.expect("name-r", equals(d["larger_piece"], self.selected[0])
                        and equals(d["smaller_piece"], self.selected[1]), e,
                        "A and B differ from the selected pair")
        removed = self.params.removal_count
        r = d["r"]
        minimal = max(floor(removed * a / (a - b)) + 1, self.params.r_min)
        self.expect("name-r", r >= self.params.r_min and removed * a / r < a - b, e,
                    f"r = {r} violates r >= {self.params.r_min} or {removed}*mu(A)/r < mu(A) - mu(B)")
        self.expect("name-r", r == minimal, e, f"r = {r} is not the minimal admissible value {minimal}")

    # -- reserves and augmentation -----------------------------------------

    def on_reserve(self, e: Event) -> None:
        d = e.data
        pool, taken = d["pool"], list(d["taken"])
        ok = len(taken) == d["count"] == len(set(taken)) and all(0 <= t < len(pool) for t in taken)
        if ok and taken:
            rest = [self.v(e.actor, pool[t]) for t in range(len(pool)) if t not in taken]
            ok = not rest or min(self.v(e.actor, pool[t]) for t in taken) >= max(rest)
        self.expect("reserve-choice", ok, e, f"player {e.actor} did not set aside its {d['count']} largest pieces")
        if ok:
            lots = union_all(pool[t] for t in taken)
            self.reserves[e.actor] = union(self.reserves.get(e.actor, EMPTY), lots)

    def on_designate(self, e: Event) -> None:
        if e.data["label"] in ("Y", "Z"):
            self.expect("yz-strict", len(e.data["members"]) == self.params.yz_count, e,
                        f"{len(e.data['members'])} {e.data['label']} pieces, expected {self.params.yz_count}")

    def on_schedule(self, e: Event) -> None:
        d = e.data
        roles = self._roles(*self.pair) if self.pair is not None else []
        first = 3 if e.step == "8" else 2
        expected = sorted(roles[first - 1:self.n - 1])
        self.expect("choose-rule", sorted(d["order"]) == expected and d["rule"] in CHOOSE_RULES
                    and 0 <= d["rejected"] < len(CHOOSE_RULES) * factorial(len(expected)), e,
                    f"schedule {d['order']} under {d['rule']!r} is not an order of reservers {expected}")
        self.schedule = list(d["order"])
        self.rule = d["rule"]

    def on_augment(self, e: Event) -> None:
        d = e.data
        before, after, lots = d["before"], d["after"], d["lots"]
        targets, added, ways = list(d["targets"]), d["added"], d["ways"]
        pool = union_all(lots)
        ok = (
            len(before) == len(after)
            and len(targets) == len(added) == len(set(targets))
            and are_disjoint(list(lots))
            and are_disjoint(list(added))
            and is_subset(union_all(added), pool)
            and intersection(pool, union_all(before)).is_empty
        )
        if ok:
            for t, (old, new) in enumerate(zip(before, after)):
                grown = union(old, added[targets.index(t)]) if t in targets else old
                ok = ok and equals(grown, new)
        self.expect("reserve-augment", ok, e, f"player {e.actor}'s augmentation is not drawn from its reserves")
        if e.step in ("8", "12", "13"):
            nxt = self.schedule.pop(0) if self.schedule else None
            self.expect("choose-rule", e.actor == nxt, e,
                        f"player {e.actor} augments out of the announced order (expected {nxt})")
            owned = self.reserves.get(e.actor, EMPTY)
            self.expect("reserve-augment", is_subset(pool, owned), e,
                        f"player {e.actor} augments from cake it never set aside")
            self.reserves[e.actor] = difference(owned, union_all(added))
            for t in targets:
                self.augmenters.setdefault(t, set()).add(e.actor)
        else:
            self.expect("reserve-augment", is_subset(pool, self.allocation.leftover), e,
                        "augmenting lots lie outside the leftover")
        if not ok or ways > len(after):
            return
        old_level = sorted(self.v(e.actor, p) for p in before)[ways - 1]
        new_values = sorted(self.v(e.actor, p) for p in after)
        self.expect("reserve-augment", all(x == old_level for x in new_values[:ways]), e,
                    f"player {e.actor} did not create a {ways}-way tie at {old_level}")

    def on_yz(self, e: Event) -> None:
        d = e.data
        i = d["objector"]
        ys = [self.v(i, p) for p in d["ys"]]
        zs = [self.v(i, p) for p in d["zs"]]
        self.expect("yz-strict", len(set(ys)) == 1 and min(zs) > max(ys), e,
                    f"objector sees Y values {ys} and Z values {zs}")

    # -- choosing and allocation -------------------------------------------

    def _roles(self, objector: int, divider: int) -> List[int]:
        return [objector, divider] + [a for a in range(1, self.n + 1) if a not in (objector, divider)]

    def on_choose(self, e: Event) -> None:
        d = e.data
        offered, labels = d["offered"], d["labels"]
        augmented_by = [set(s) for s in d["augmented_by"]]
        objector, divider = d["objector"], d["divider"]
        picks = [(agent, t) for agent, t in d["picks"]]
        order = [agent for agent, _ in picks]
        self.expect("choose-rule", order == list(reversed(self._roles(objector, divider))), e,
                    f"choosing order {order} is not roles n..1")
        self.expect("choose-rule", (objector, divider) == self.pair, e,
                    f"choose names pair {(objector, divider)} during pass {self.pair}")
        for t, agents in self.augmenters.items():
            self.expect("choose-rule", t < len(augmented_by) and agents <= augmented_by[t], e,
                        f"piece {t} augmentations by {sorted(agents)} are not recorded")
        self.augmenters = {}
        rule = d["rule"]
        self.expect("choose-rule", rule == self.rule and not self.schedule, e,
                    f"choose under {rule!r} does not follow the announced schedule")
        self.rule = None

        available = set(range(len(offered)))
        for agent, t in picks:
            if not self.expect("choose-rule", t in available, e, f"player {agent} takes unavailable piece {t}"):
                return
            allowed = available
            if d["phase"] == "core" and agent == objector:
                allowed = {u for u in available if labels[u] == "Y"}
            elif d["phase"] == "core" and agent == divider:
                allowed = {u for u in available if labels[u] == "Z"}
            self.expect("choose-rule", t in allowed, e,
                        f"player {agent} takes a {labels[t]} piece outside its permitted kind")
            mine = {u for u in allowed if agent in augmented_by[u]}
            if rule == "required" and mine:
                self.expect("choose-rule", t in mine, e, f"player {agent} passes over a piece it augmented")
                allowed = mine
            values = {u: self.v(agent, offered[u]) for u in allowed}
            low = min(values.values())
            self.expect("choose-rule", values.get(t) == low, e, f"player {agent} does not take a smallest piece")
            if any(values[u] == low and u in mine for u in allowed):
                self.expect("choose-rule", agent in augmented_by[t], e,
                            f"player {agent} passes over a piece it augmented")
            available.discard(t)

        chosen = {agent: offered[t] for agent, t in picks}
        for a in chosen:
            for b in chosen:
                self.expect("partial-envy", self.v(a, chosen[a]) <= self.v(a, chosen[b]), e,
                            f"player {a} envies player {b} within the round")
        if d["phase"] == "core":
            self.core_picks = chosen
        self.pending = ("choose", e.seq, chosen)

    def on_epsilon(self, e: Event) -> None:
        d = e.data
        i, j = e.actor, d["divider"]
        ok = self.core_picks is not None and equals(d["own_piece"], self.core_picks.get(i, EMPTY)) \
            and equals(d["other_piece"], self.core_picks.get(j, EMPTY))
        value = self.v(i, d["other_piece"]) - self.v(i, d["own_piece"])
        self.expect("epsilon", ok and d["value"] == value and value > 0, e,
                    f"recorded epsilon {d['value']}, recomputed {value}")
        self.epsilon = value

    def on_allocate(self, e: Event) -> None:
        d = e.data
        grants = list(d["grants"])
        if not self.expect("partition", len(grants) == self.n, e, f"{len(grants)} grants for {self.n} players"):
            return
        granted = {a: p for a, p in enumerate(grants, start=1) if not p.is_empty}
        if self.pending is not None:
            kind, ref, expected = self.pending
            ok = set(granted) == set(expected) and all(equals(granted[a], expected[a]) for a in expected)
            check = "choose-allocate" if kind == "choose" else "ia-coverage"
            self.expect(check, ok, e, f"grants do not match {kind} event {ref}")
            self.pending = None
        old = self.allocation.leftover
        handed = union_all(granted.values())
        self.expect("partition", are_disjoint(list(granted.values())) and is_subset(handed, old)
                    and equals(d["leftover"], difference(old, handed)), e,
                    "grants and new leftover do not split the previous leftover")
        self.allocation = self.allocation.grant(granted, d["leftover"])
        for a in range(1, self.n + 1):
            shares = self.allocation.share_list()
            mine = self.v(a, shares[a - 1])
            for b in range(1, self.n + 1):
                self.expect("partial-envy", mine <= self.v(a, shares[b - 1]), e,
                            f"player {a} envies player {b} after this allocation")
        for (i, j) in sorted(self.ia):
            own, rest, other = self._values(i, j)
            self.expect("ia-certificate", own + rest < other, e,
                        f"IA pair ({i},{j}) no longer holds: {own} + {rest} >= {other}")

    def _values(self, i: int, j: int) -> Tuple[Fraction, Fraction, Fraction]:
        shares = self.allocation.shares
        return self.v(i, shares[i]), self.v(i, self.allocation.leftover), self.v(i, shares[j])

    # -- shrinking ---------------------------------------------------------

    def on_name_s(self, e: Event) -> None:
        d = e.data
        leftover = self.v(e.actor, self.allocation.leftover)
        f = self.params.shrink_fraction
        ok = d["leftover_value"] == leftover and d["shrink"] == f and d["epsilon"] == self.epsilon
        self.expect("name-s", ok, e, "name_s inputs disagree with the replayed leftover, f or epsilon")
        expected = _minimal_s(leftover, d["epsilon"], f, d["formula"])
        self.expect("name-s", d["s"] == expected, e, f"s = {d['s']}, minimal value is {expected}")

    def on_mini_round(self, e: Event) -> None:
        d = e.data
        before, chosen = d["leftover_before"], d["chosen"]
        f = self.params.shrink_fraction
        self.expect("partition", equals(before, self.allocation.leftover)
                    and equals(d["leftover_after"], difference(before, union_all(chosen))), e,
                    "mini-round leftovers do not match the replay")
        got = self.v(e.actor, union_all(chosen))
        need = f * self.v(e.actor, before)
        self.expect("shrink", got >= need, e, f"chosen pieces worth {got} < {f} of the leftover ({need})")

    def on_ia_insert(self, e: Event) -> None:
        d = e.data
        pair = tuple(d["pair"])
        own, rest, other = self._values(*pair)
        ok = (
            pair == self.pair
            and pair not in self.ia
            and (d["own"], d["rest"], d["other"]) == (own, rest, other)
            and own + rest < other
        )
        self.expect("ia-certificate", ok, e,
                    f"certificate for {pair}: recorded {d['own']} + {d['rest']} < {d['other']}, recomputed {own} + {rest} < {other}")
        if ok:
            self.ia[pair] = (own, rest, other)
            self.inserts_this_pass += 1

    # -- settlement --------------------------------------------------------

    def _covered(self, holders, others) -> bool:
        return all((h, o) in self.ia for h in holders for o in others if h != o)

    def on_narrow(self, e: Event) -> None:
        d = e.data
        new = list(d["receivers"])
        ok = set(new) < set(self.receivers) and self._covered(new, d["agree"])
        self.expect("ia-coverage", ok, e, f"receivers {new} do not hold IA over {d['agree']}")
        self.receivers = new

    def on_distribute(self, e: Event) -> None:
        d = e.data
        receivers, blocks = list(d["receivers"]), d["blocks"]
        pieces = self._cut_pieces(e, d["cut_ref"])
        outsiders = [a for a in range(1, self.n + 1) if a not in receivers]
        self.expect("ia-coverage", set(receivers) <= set(self.receivers) and self._covered(receivers, outsiders), e,
                    f"receivers {receivers} do not hold IA over {outsiders}")
        flat = [t for block in blocks for t in block]
        self.expect("ia-coverage", len(blocks) == len(receivers) and flat == list(range(len(pieces)))
                    and len({len(b) for b in blocks}) == 1, e, "leftover pieces are not split into equal blocks")
        expected = {a: union_all(pieces[t] for t in block) for a, block in zip(receivers, blocks)}
        self.pending = ("distribute", e.seq, {a: p for a, p in expected.items() if not p.is_empty})

    def finish(self) -> None:
        self._close_pass(None)
        self.expect("complete", self.allocation.leftover.is_empty, None,
                    "the transcript ends with cake still unallocated")
        self.expect("complete", self.pending is None, None, "the last choice was never allocated")


def _minimal_s(leftover: Fraction, epsilon: Fraction, f: Fraction, formula: str) -> Optional[int]:
    if epsilon is None or epsilon <= 0:
        return None
    if formula == "aside":
        base, factor = leftover * (1 - f), 1 - f
    elif formula == "literal":
        base = factor = f * leftover
        if base >= 1:
            return None
    else:
        return None
    s = 1
    while base * factor ** (s - 1) >= epsilon:
        s += 1
    return s


def audit_transcript(transcript: Transcript, densities: Sequence[StepDensity]) -> AuditReport:
    """Re-check every event; an honest run yields no failures."""
    report = _Auditor(densities).run(transcript)
    logger.info("Audit: %d checks, %d failures", sum(report.checked.values()), len(report.failures))
    return report
