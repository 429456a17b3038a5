"""Quadruple-matching evaluation in four modes, with corrected alignment.

Modes:

* strict  - positional alignment, string equality and slot-type equality;
* exact   - best alignment over all element permutations, string equality;
* type    - positional alignment, token/substring overlap plus slot-type
            equality;
* partial - best alignment, graded 1 / 0.5 / 0 per element (equality /
            overlap / none).

Two historical scoring bugs are deliberately closed here: the optimal
alignment is always taken (never the first greedy hit), and a nonzero
element score always requires real string overlap, never alignment
bookkeeping. Timestamp elements are canonicalized to ISO form when
parseable so date-format variation does not read as extraction error.
"""

from __future__ import annotations

import datetime
import itertools
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DataError, ValidationError
from .io import DatasetExample

MODES = ("strict", "exact", "type", "partial")
SLOT_TYPES = ("subject", "relation", "object", "timestamp")

_EXHAUSTIVE_LIMIT = 6  # assignment size beyond which scipy takes over

_MONTHS = {
    name.casefold(): i
    for i, name in enumerate(
        ["January", "February", "March", "April", "May", "June", "July",
         "August", "September", "October", "November", "December"],
        start=1,
    )
}
_MONTHS.update({name[:3]: i for name, i in list(_MONTHS.items())})

_DATE_TEXT = re.compile(
    r"^(?:[A-Za-z]+,?\s+)?"          # optional leading day name
    r"(?:(?P<month_a>[A-Za-z]+)\s+(?P<day_a>\d{1,2})(?:st|nd|rd|th)?,?\s+"
    r"(?P<year_a>\d{4})"             # January 11th, 2026
    r"|(?P<day_b>\d{1,2})(?:st|nd|rd|th)?\s+(?P<month_b>[A-Za-z]+),?\s+"
    r"(?P<year_b>\d{4}))$"           # 11 Jan 2026
)


def canonicalize_timestamp(text: str) -> str:
    """ISO form of a date-like string; unparseable text is returned as-is."""
    cleaned = " ".join(text.split())
    try:
        return datetime.date.fromisoformat(cleaned).isoformat()
    except ValueError:
        pass
    match = _DATE_TEXT.match(cleaned)
    if match:
        g = match.groupdict()
        month_name = (g["month_a"] or g["month_b"]).casefold()
        month = _MONTHS.get(month_name) or _MONTHS.get(month_name[:3])
        day = int(g["day_a"] or g["day_b"])
        year = int(g["year_a"] or g["year_b"])
        if month:
            try:
                return datetime.date(year, month, day).isoformat()
            except ValueError:
                return cleaned
    return cleaned


@dataclass(frozen=True)
class ScoredElement:
    """One tuple slot: normalized text plus its slot type."""

    text: str
    slot: str

    @classmethod
    def make(cls, text: str, slot: str) -> "ScoredElement":
        normalized = " ".join(str(text).split())
        if slot == "timestamp":
            normalized = canonicalize_timestamp(normalized)
        return cls(normalized, slot)


def _overlaps(a: str, b: str) -> bool:
    """Case-insensitive token sharing or containment; empty never overlaps."""
    if not a or not b:
        return False
    fa = a.casefold()
    fb = b.casefold()
    if fa in fb or fb in fa:
        return True
    return bool(set(fa.split()) & set(fb.split()))


def element_match(
    candidate: ScoredElement, reference: ScoredElement, mode: str
) -> float:
    """Score one element pair in {0, 0.5, 1} under the given mode."""
    equal = candidate.text == reference.text and bool(candidate.text)
    same_slot = candidate.slot == reference.slot
    if mode == "strict":
        return 1.0 if equal and same_slot else 0.0
    if mode == "exact":
        return 1.0 if equal else 0.0
    overlap = equal or _overlaps(candidate.text, reference.text)
    if mode == "type":
        return 1.0 if overlap and same_slot else 0.0
    if mode == "partial":
        if equal:
            return 1.0
        return 0.5 if overlap else 0.0
    raise ValidationError(f"unknown mode {mode!r}")


def tuple_score(
    candidate: Sequence[ScoredElement],
    reference: Sequence[ScoredElement],
    mode: str,
) -> float:
    """Mean element score for two equal-length tuples.

    strict and type use the positional (identity) alignment only; exact and
    partial take the best alignment over all element permutations, so a
    reordered but otherwise perfect candidate scores 1.
    """
    if len(candidate) != len(reference):
        raise ValidationError("tuple_score requires equal-length tuples")
    n = len(candidate)
    if n == 0:
        return 0.0
    if mode in ("strict", "type"):
        total = sum(
            element_match(c, r, mode) for c, r in zip(candidate, reference)
        )
        return total / n
    best = 0.0
    for perm in itertools.permutations(range(n)):
        total = sum(
            element_match(candidate[perm[i]], reference[i], mode)
            for i in range(n)
        )
        if total > best:
            best = total
            if best == n:
                break
    return best / n


def quad_elements(
    subject: str, relation: str, obj: str, timestamp: str
) -> tuple[ScoredElement, ...]:
    return (
        ScoredElement.make(subject, "subject"),
        ScoredElement.make(relation, "relation"),
        ScoredElement.make(obj, "object"),
        ScoredElement.make(timestamp, "timestamp"),
    )


def quad_score(candidate, reference, mode: str) -> float:
    """tuple_score specialized to 4-slot quadruples."""
    if len(candidate) != 4 or len(reference) != 4:
        raise ValidationError("quad_score requires 4-element tuples")
    return tuple_score(candidate, reference, mode)


@dataclass
class ExampleScore:
    total: float
    n_candidates: int
    n_references: int

    @property
    def precision(self) -> float:
        if self.n_candidates == 0 and self.n_references == 0:
            return 1.0
        return self.total / max(self.n_candidates, 1)

    @property
    def recall(self) -> float:
        if self.n_candidates == 0 and self.n_references == 0:
            return 1.0
        return self.total / max(self.n_references, 1)

    @property
    def f1(self) -> float:
        p = self.precision
        r = self.recall
        if p + r == 0.0:
            return 0.0
        return 2.0 * p * r / (p + r)


def example_score(
    candidates: Sequence[Sequence[ScoredElement]],
    references: Sequence[Sequence[ScoredElement]],
    mode: str,
) -> ExampleScore:
    """Optimal one-to-one pairing of candidate and reference quadruples.

    Exhaustive search for small sets, Hungarian assignment beyond; unpaired
    items contribute 0. Two empty sets count as a vacuously perfect
    extraction.
    """
    nc = len(candidates)
    nr = len(references)
    if nc == 0 or nr == 0:
        return ExampleScore(total=0.0, n_candidates=nc, n_references=nr)
    scores = np.zeros((nc, nr))
    for i, cand in enumerate(candidates):
        for j, ref in enumerate(references):
            scores[i, j] = tuple_score(cand, ref, mode)
    if max(nc, nr) <= _EXHAUSTIVE_LIMIT:
        total = _best_assignment_exhaustive(scores)
    else:
        from scipy.optimize import linear_sum_assignment

        rows, cols = linear_sum_assignment(-scores)
        total = float(scores[rows, cols].sum())
    return ExampleScore(total=total, n_candidates=nc, n_references=nr)


def _best_assignment_exhaustive(scores: np.ndarray) -> float:
    nc, nr = scores.shape
    best = 0.0
    if nc <= nr:
        for cols in itertools.permutations(range(nr), nc):
            total = sum(scores[i, c] for i, c in enumerate(cols))
            best = max(best, total)
    else:
        for rows in itertools.permutations(range(nc), nr):
            total = sum(scores[r, j] for j, r in enumerate(rows))
            best = max(best, total)
    return float(best)


def example_elements(example: DatasetExample) -> list[tuple[ScoredElement, ...]]:
    """Scored-element quadruples for one dataset example (labels preferred)."""
    return [
        quad_elements(
            example.label(q.subject),
            q.relation,
            example.label(q.object),
            q.timestamp.isoformat(),
        )
        for q in example.quadruples
    ]


@dataclass
class ModeResult:
    precision: float
    recall: float
    f1: float
    per_example_f1: dict[str, float] = field(default_factory=dict)


@dataclass
class EvalReport:
    modes: dict[str, ModeResult] = field(default_factory=dict)
    p_values: dict[str, float] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            mode: {
                "precision": res.precision,
                "recall": res.recall,
                "f1": res.f1,
            }
            for mode, res in self.modes.items()
        }
        return {"modes": out, "p_values": dict(self.p_values)}


def evaluate(
    candidates: Sequence[DatasetExample],
    references: Sequence[DatasetExample],
    modes: Sequence[str] = MODES,
) -> EvalReport:
    """Micro-averaged P/R/F1 per mode over examples aligned by id.

    A candidate example with no counterpart (or vice versa) is an error
    listing the missing ids. Per-example F1 values are retained for
    significance testing.
    """
    for mode in modes:
        if mode not in MODES:
            raise ValidationError(f"unknown mode {mode!r}")
    cand_by_id = {ex.id: ex for ex in candidates}
    ref_by_id = {ex.id: ex for ex in references}
    missing_refs = sorted(set(cand_by_id) - set(ref_by_id))
    missing_cands = sorted(set(ref_by_id) - set(cand_by_id))
    if missing_refs or missing_cands:
        raise DataError(
            "candidate/reference id mismatch: "
            f"no reference for {missing_refs}, no candidate for {missing_cands}"
        )
    ids = sorted(ref_by_id)
    elements = {
        i: (example_elements(cand_by_id[i]), example_elements(ref_by_id[i]))
        for i in ids
    }
    report = EvalReport()
    for mode in modes:
        total = 0.0
        n_cand = 0
        n_ref = 0
        per_example: dict[str, float] = {}
        for i in ids:
            cand_elems, ref_elems = elements[i]
            score = example_score(cand_elems, ref_elems, mode)
            total += score.total
            n_cand += score.n_candidates
            n_ref += score.n_references
            per_example[i] = score.f1
        if n_cand == 0 and n_ref == 0:
            precision = recall = 1.0
        else:
            precision = total / n_cand if n_cand else 0.0
            recall = total / n_ref if n_ref else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        report.modes[mode] = ModeResult(
            precision=precision, recall=recall, f1=f1, per_example_f1=per_example
        )
    return report


def permutation_test(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    resamples: int = 10000,
    seed: int = 0,
) -> float:
    """Two-sided randomized paired sign-flip permutation test on the mean
    difference; p = (1 + #{|resampled| >= |observed|}) / (1 + resamples)."""
    if len(scores_a) != len(scores_b):
        raise DataError("paired score vectors must have equal length")
    if len(scores_a) < 2:
        raise DataError("permutation test needs at least two paired scores")
    if resamples < 1:
        raise ValidationError("resamples must be >= 1")
    diffs = np.asarray(scores_a, dtype=np.float64) - np.asarray(
        scores_b, dtype=np.float64
    )
    observed = abs(diffs.mean())
    rng = np.random.default_rng(seed)
    signs = rng.choice((-1.0, 1.0), size=(resamples, len(diffs)))
    resampled = np.abs((signs * diffs).mean(axis=1))
    extreme = int((resampled >= observed).sum())
    return (1 + extreme) / (1 + resamples)


def compare_reports(
    report_a: EvalReport,
    report_b: EvalReport,
    resamples: int = 10000,
    seed: int = 0,
) -> dict[str, float]:
    """Per-mode p-values comparing two evaluations, paired by example id."""
    p_values = {}
    for mode, res_a in report_a.modes.items():
        res_b = report_b.modes.get(mode)
        if res_b is None:
            continue
        shared = sorted(set(res_a.per_example_f1) & set(res_b.per_example_f1))
        if len(shared) < 2:
            raise DataError(
                f"mode {mode!r}: need at least two shared example ids to compare"
            )
        a = [res_a.per_example_f1[i] for i in shared]
        b = [res_b.per_example_f1[i] for i in shared]
        p_values[mode] = permutation_test(a, b, resamples=resamples, seed=seed)
    return p_values
