"""Day-by-day generation of schema-valid, coherent future facts.

Each generated fact is produced by sampling a relation from reference-year
frequency weights, pre-filtering subjects through the schema and the
open-relationship ledger, querying the rule engine for candidate objects,
filtering those through the schema, and keeping the highest-confidence
valid candidate. Generated facts immediately join the working fact set so
later days can ground rules on them.
"""

from __future__ import annotations

import datetime
import logging
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import (
    DataError,
    GenerationExhausted,
    UnknownEntityError,
    ValidationError,
)
from .facts import (
    END,
    START,
    Quadruple,
    TemporalKnowledgeGraph,
    base_relation,
    relation_kind,
)
from .rules import GroundingIndex, TemporalRule, apply_rules
from .schema import Schema

logger = logging.getLogger(__name__)

SUBJECT_LEVEL = "subject"
OBJECT_LEVEL = "object"


@dataclass
class RelationWeights:
    """Per-relation sampling weights taken from one reference year."""

    weights: dict[str, float]
    reference_year: int

    def __post_init__(self):
        if not any(w > 0 for w in self.weights.values()):
            raise ValidationError("relation weights need at least one positive entry")
        if any(w < 0 for w in self.weights.values()):
            raise ValidationError("relation weights must be non-negative")


def derive_weights(graph: TemporalKnowledgeGraph, year: int) -> RelationWeights:
    """Weights proportional to each relation's fact count in ``year``."""
    counts: dict[str, float] = {rel: 0.0 for rel in graph.relations}
    total = 0
    for f in graph.facts:
        if f.timestamp.year == year:
            counts[f.relation] += 1.0
            total += 1
    if total == 0:
        raise DataError(f"no facts in year {year}; cannot derive weights")
    return RelationWeights(weights=counts, reference_year=year)


@dataclass
class GeneratorConfig:
    k: int = 4  # subjects sampled per attempt
    max_per_day: int = 128
    max_retries: int = 16  # failures before a relation is benched for the day
    coherency: str = SUBJECT_LEVEL
    window: int = 2048  # day window for rule grounding
    aggregation: str = "noisy_or"
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.max_per_day < 1:
            raise ValidationError("max_per_day must be >= 1")
        if self.max_retries < 1:
            raise ValidationError("max_retries must be >= 1")
        if self.coherency not in (SUBJECT_LEVEL, OBJECT_LEVEL):
            raise ValidationError(
                f"coherency must be '{SUBJECT_LEVEL}' or '{OBJECT_LEVEL}'"
            )


class OpenRelationLedger:
    """Tracks open relationships: start-of facts with no matching end-of.

    Keyed by (subject, base relation); each entry holds the set of
    (object, start timestamp) pairs currently open. An end-of fact closes
    the matching object's earliest open entry; an end-of fact without a
    matching object (legal under subject-level coherency) closes nothing.
    """

    def __init__(self):
        self._open: dict[tuple[str, str], set[tuple[str, datetime.date]]] = {}

    @classmethod
    def from_graph(cls, graph: TemporalKnowledgeGraph) -> "OpenRelationLedger":
        ledger = cls()
        for fact in graph.facts:  # canonical order is chronological
            ledger.apply(fact)
        return ledger

    def apply(self, fact: Quadruple) -> None:
        kind = relation_kind(fact.relation)
        if kind == START:
            key = (fact.subject, base_relation(fact.relation))
            self._open.setdefault(key, set()).add((fact.object, fact.timestamp))
        elif kind == END:
            key = (fact.subject, base_relation(fact.relation))
            entries = self._open.get(key)
            if not entries:
                return
            matching = sorted(
                (ts, obj) for obj, ts in entries
                if obj == fact.object and ts <= fact.timestamp
            )
            if matching:
                ts, obj = matching[0]
                entries.discard((obj, ts))
                if not entries:
                    del self._open[key]

    def is_open(self, subject: str, base: str) -> bool:
        return bool(self._open.get((subject, base)))

    def open_objects(self, subject: str, base: str) -> set[str]:
        return {obj for obj, _ in self._open.get((subject, base), ())}

    def open_entries(self):
        """Snapshot of all open (subject, base, object, start) tuples."""
        out = []
        for (subject, base), entries in self._open.items():
            for obj, ts in entries:
                out.append((subject, base, obj, ts))
        return sorted(out)

    def allows(self, subject: str, relation: str) -> bool:
        """Subject-level coherency gate for emitting ``relation`` by ``subject``."""
        kind = relation_kind(relation)
        if kind == START:
            return not self.is_open(subject, base_relation(relation))
        if kind == END:
            return self.is_open(subject, base_relation(relation))
        return True


class _WorkingState:
    """Mutable generation state: base graph plus accepted facts so far."""

    def __init__(self, graph: TemporalKnowledgeGraph, config: GeneratorConfig):
        self.base = graph
        self.config = config
        self.generated: list[Quadruple] = []
        self.known = set(graph.facts)
        self.ledger = OpenRelationLedger.from_graph(graph)
        self.rng = random.Random(config.seed)
        self._snapshot: Optional[TemporalKnowledgeGraph] = None
        self._index: Optional[GroundingIndex] = None
        self._stale = True

    def refresh(self) -> None:
        """Rebuild the queryable snapshot.

        Called once per day, not per fact: groundings for day t only see
        facts strictly before t, so same-day additions never change query
        results. The dedup set and the ledger are maintained separately and
        are always current.
        """
        if self._stale:
            snap = TemporalKnowledgeGraph(
                list(self.base.facts) + self.generated, self.base.labels
            )
            self._snapshot = snap
            self._index = GroundingIndex(snap.encoded())
            self._stale = False

    @property
    def snapshot(self) -> TemporalKnowledgeGraph:
        if self._snapshot is None:
            self.refresh()
        return self._snapshot

    @property
    def index(self) -> GroundingIndex:
        if self._index is None:
            self.refresh()
        return self._index

    def accept(self, fact: Quadruple) -> None:
        self.generated.append(fact)
        self.known.add(fact)
        self.ledger.apply(fact)
        self._stale = True


class _DayState:
    """Per-day retry accounting: failure counts and benched relations."""

    def __init__(self):
        self.failures: dict[str, int] = {}
        self.excluded: dict[str, str] = {}  # relation -> last failure cause

    def record_failure(self, relation: str, cause: str, budget: int) -> None:
        self.failures[relation] = self.failures.get(relation, 0) + 1
        if self.failures[relation] >= budget:
            self.excluded[relation] = cause


def _allowed_subject(schema: Schema, entity: str, relation: str) -> bool:
    try:
        return schema.allowed_subject(entity, relation)
    except UnknownEntityError:
        return False


def _valid_object(schema: Schema, quad: Quadruple) -> bool:
    try:
        return schema.valid_object(quad)
    except UnknownEntityError:
        return False


def _generate_one(
    day: datetime.date,
    state: _WorkingState,
    rules_by_head: dict[str, list[TemporalRule]],
    schema: Schema,
    weights: RelationWeights,
    config: GeneratorConfig,
    day_state: _DayState,
) -> Quadruple:
    t_ord = day.toordinal()
    snapshot = state.snapshot
    index = state.index
    entities = snapshot.entities

    while True:
        population = [
            rel for rel, w in sorted(weights.weights.items())
            if w > 0 and rel not in day_state.excluded
        ]
        if not population:
            raise GenerationExhausted(
                day,
                {
                    "failures": dict(sorted(day_state.failures.items())),
                    "excluded": dict(sorted(day_state.excluded.items())),
                },
            )
        rel = state.rng.choices(
            population, weights=[weights.weights[r] for r in population], k=1
        )[0]

        if rel not in rules_by_head:
            day_state.record_failure(rel, "no_rules", config.max_retries)
            continue

        allowed = [
            e for e in entities
            if _allowed_subject(schema, e, rel) and state.ledger.allows(e, rel)
        ]
        if not allowed:
            day_state.record_failure(rel, "no_allowed_subjects", config.max_retries)
            continue
        subjects = (
            state.rng.sample(allowed, config.k)
            if len(allowed) > config.k
            else allowed
        )

        best: Optional[tuple[float, str, str]] = None  # (score, object, subject)
        for subject in subjects:
            answer = apply_rules(
                snapshot,
                rules_by_head[rel],
                (subject, rel, day),
                config.window,
                aggregation=config.aggregation,
                index=index,
            )
            for cand in answer.candidates:
                quad = Quadruple(subject, rel, cand.object, day)
                if cand.object == subject:
                    continue  # no reflexive facts
                if quad in state.known:
                    continue
                if not _valid_object(schema, quad):
                    continue
                if (
                    config.coherency == OBJECT_LEVEL
                    and relation_kind(rel) == END
                    and cand.object
                    not in state.ledger.open_objects(subject, base_relation(rel))
                ):
                    continue
                key = (cand.score, cand.object, subject)
                if best is None or _beats(key, best):
                    best = key
        if best is None:
            day_state.record_failure(rel, "no_valid_candidates", config.max_retries)
            continue
        _score, obj, subject = best
        return Quadruple(subject, rel, obj, day)


def _beats(a: tuple[float, str, str], b: tuple[float, str, str]) -> bool:
    """Higher score wins; ties fall to ascending object id, then subject id."""
    if a[0] != b[0]:
        return a[0] > b[0]
    return (a[1], a[2]) < (b[1], b[2])


def generate_fact(
    t: datetime.date,
    graph: TemporalKnowledgeGraph,
    rules: Sequence[TemporalRule],
    schema: Schema,
    weights: RelationWeights,
    config: GeneratorConfig,
) -> Quadruple:
    """Generate one future fact for day ``t``. Raises GenerationExhausted
    when every positively weighted relation ran out of retries."""
    state = _WorkingState(graph, config)
    rules_by_head = _group_rules(rules)
    return _generate_one(t, state, rules_by_head, schema, weights, config, _DayState())


def _group_rules(rules: Sequence[TemporalRule]) -> dict[str, list[TemporalRule]]:
    grouped: dict[str, list[TemporalRule]] = {}
    for r in rules:
        grouped.setdefault(r.head, []).append(r)
    return grouped


@dataclass
class GenerationResult:
    facts: list[Quadruple]
    diagnostics: dict = field(default_factory=dict)


def generate_range(
    graph: TemporalKnowledgeGraph,
    rules: Sequence[TemporalRule],
    schema: Schema,
    weights: RelationWeights,
    targets: dict[datetime.date, int],
    config: GeneratorConfig,
) -> GenerationResult:
    """Generate facts for every target day in chronological order.

    The per-day output count is min(target, max_per_day) unless the day is
    exhausted early; exhaustion truncates the day and is recorded in the
    diagnostics rather than aborting the range. Every accepted fact joins
    the working set before the next fact is attempted.
    """
    state = _WorkingState(graph, config)
    rules_by_head = _group_rules(rules)
    facts: list[Quadruple] = []
    per_day: dict[str, int] = {}
    exhaustion_events: list[dict] = []
    acceptance: dict[str, int] = {}

    for day in sorted(targets):
        target = min(targets[day], config.max_per_day)
        day_state = _DayState()
        state.refresh()
        produced = 0
        for _slot in range(target):
            try:
                fact = _generate_one(
                    day, state, rules_by_head, schema, weights, config, day_state
                )
            except GenerationExhausted as exc:
                exhaustion_events.append(
                    {
                        "day": day.isoformat(),
                        "produced": produced,
                        "target": target,
                        "diagnostics": exc.diagnostics,
                    }
                )
                logger.warning(
                    "day %s exhausted after %d/%d facts", day, produced, target
                )
                break
            state.accept(fact)
            facts.append(fact)
            acceptance[fact.relation] = acceptance.get(fact.relation, 0) + 1
            produced += 1
        per_day[day.isoformat()] = produced

    diagnostics = {
        "per_day_counts": per_day,
        "exhaustion_events": exhaustion_events,
        "accepted_per_relation": dict(sorted(acceptance.items())),
        "total": len(facts),
    }
    return GenerationResult(facts=facts, diagnostics=diagnostics)


def day_targets_from_reference_year(
    graph: TemporalKnowledgeGraph,
    start: datetime.date,
    end: datetime.date,
    reference_year: int,
    cap: int,
) -> dict[datetime.date, int]:
    """Per-day targets mirroring the reference year's daily fact counts.

    Each target day maps to the same month/day of the reference year
    (Feb 29 falls back to Feb 28 when the reference year is not a leap
    year); counts are capped at ``cap``.
    """
    if start > end:
        raise DataError("range start is after range end")
    counts: dict[tuple[int, int], int] = {}
    for f in graph.facts:
        if f.timestamp.year == reference_year:
            key = (f.timestamp.month, f.timestamp.day)
            counts[key] = counts.get(key, 0) + 1
    targets = {}
    day = start
    one = datetime.timedelta(days=1)
    while day <= end:
        key = (day.month, day.day)
        if key == (2, 29) and key not in counts:
            key = (2, 28)
        targets[day] = min(counts.get(key, 0), cap)
        day += one
    return targets
