"""Dataset-level transforms: timestamp-year rewriting and matched resampling."""

from __future__ import annotations

import calendar
import datetime
import random
from typing import Sequence

from .errors import DataError
from .facts import Quadruple, TemporalKnowledgeGraph
from .io import DatasetExample


def retime_date(day: datetime.date, target_year: int) -> datetime.date:
    """Replace the year, mapping Feb 29 to Feb 28 in non-leap target years."""
    if day.month == 2 and day.day == 29 and not calendar.isleap(target_year):
        return datetime.date(target_year, 2, 28)
    return day.replace(year=target_year)


def retime(data, target_year: int):
    """Rewrite every quadruple timestamp's year to ``target_year``.

    Accepts a TemporalKnowledgeGraph, a list of DatasetExample, or a list of
    Quadruple, and returns the same shape. Text and metadata fields are left
    untouched; this is a quadruple-level transform only.
    """
    if isinstance(data, TemporalKnowledgeGraph):
        facts = [
            f.replace_timestamp(retime_date(f.timestamp, target_year))
            for f in data.facts
        ]
        return TemporalKnowledgeGraph(facts, data.labels)
    if isinstance(data, Quadruple):
        return data.replace_timestamp(retime_date(data.timestamp, target_year))
    out = []
    for item in data:
        if isinstance(item, DatasetExample):
            out.append(
                DatasetExample(
                    id=item.id,
                    quadruples=[retime(q, target_year) for q in item.quadruples],
                    text=item.text,
                    metadata=dict(item.metadata),
                    labels=dict(item.labels),
                )
            )
        else:
            out.append(retime(item, target_year))
    return out


def _example_relation(example: DatasetExample) -> str:
    return example.quadruples[0].relation


def _day_of_year(example: DatasetExample) -> int:
    return example.quadruples[0].timestamp.timetuple().tm_yday


def _circular_day_distance(a: int, b: int) -> int:
    d = abs(a - b)
    return min(d, 366 - d)


def resample_matched(
    a: Sequence[DatasetExample],
    b: Sequence[DatasetExample],
    seed: int = 0,
) -> tuple[list[DatasetExample], list[DatasetExample]]:
    """Resample two datasets to matching relation and timestamp distributions.

    For every relation present in both inputs, keeps min(count_a, count_b)
    examples per side, pairing examples greedily by nearest day-of-year so
    the per-relation timestamp quantiles line up. Relations present in only
    one input are dropped; no relation overlap at all is an error.

    An example's relation and day-of-year are taken from its first
    quadruple. Deterministic for a given seed (the seed only shuffles
    tie-breaking order among equal-distance pairs).
    """
    if not a or not b:
        raise DataError("resample_matched requires two non-empty datasets")
    by_rel_a: dict[str, list[int]] = {}
    by_rel_b: dict[str, list[int]] = {}
    for i, ex in enumerate(a):
        by_rel_a.setdefault(_example_relation(ex), []).append(i)
    for i, ex in enumerate(b):
        by_rel_b.setdefault(_example_relation(ex), []).append(i)
    shared = sorted(set(by_rel_a) & set(by_rel_b))
    if not shared:
        raise DataError(
            "resample_matched: no relation occurs in both datasets "
            f"({sorted(by_rel_a)} vs {sorted(by_rel_b)})"
        )

    rng = random.Random(seed)
    picked_a: list[int] = []
    picked_b: list[int] = []
    for rel in shared:
        ia = list(by_rel_a[rel])
        ib = list(by_rel_b[rel])
        rng.shuffle(ia)
        rng.shuffle(ib)
        # Equal-distance ties follow the shuffled order, so the seed decides.
        rank_a = {i: pos for pos, i in enumerate(ia)}
        rank_b = {j: pos for pos, j in enumerate(ib)}
        pairs = sorted(
            ((i, j) for i in ia for j in ib),
            key=lambda p: (
                _circular_day_distance(_day_of_year(a[p[0]]), _day_of_year(b[p[1]])),
                rank_a[p[0]],
                rank_b[p[1]],
            ),
        )
        used_a: set[int] = set()
        used_b: set[int] = set()
        budget = min(len(ia), len(ib))
        for i, j in pairs:
            if len(used_a) == budget:
                break
            if i in used_a or j in used_b:
                continue
            used_a.add(i)
            used_b.add(j)
        picked_a.extend(sorted(used_a))
        picked_b.extend(sorted(used_b))
    return (
        [a[i] for i in sorted(picked_a)],
        [b[i] for i in sorted(picked_b)],
    )
