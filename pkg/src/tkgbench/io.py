"""File formats: facts TSV, labels TSV, interval TSV and dataset JSONL.

facts TSV      subject_id \\t relation \\t object_id \\t YYYY-MM-DD
labels TSV     entity_id \\t label
intervals TSV  subject_id \\t relation \\t object_id \\t start \\t end (may be empty)
dataset JSONL  one example object per line; see DatasetExample.to_json_dict

All files are UTF-8 with LF line endings and no header. write_dataset and
read_dataset are exact inverses on well-formed example lists.
"""

from __future__ import annotations

import datetime
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .errors import ParseError, ValidationError
from .facts import IntervalFact, Quadruple, TemporalKnowledgeGraph

logger = logging.getLogger(__name__)


def _parse_date(text: str, path, lineno) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text)
    except ValueError:
        raise ParseError(f"invalid date {text!r}", path=path, line=lineno) from None


def read_facts_tsv(path) -> tuple[list[Quadruple], int]:
    """Read a facts TSV; returns (deduplicated facts, duplicate count)."""
    facts: list[Quadruple] = []
    seen: set[Quadruple] = set()
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise ParseError(
                    f"expected 4 tab-separated columns, got {len(cols)}",
                    path=path, line=lineno,
                )
            subject, relation, obj, date_text = cols
            try:
                fact = Quadruple(
                    subject, relation, obj, _parse_date(date_text, path, lineno)
                )
            except ValidationError as exc:
                raise ParseError(str(exc), path=path, line=lineno) from None
            if fact in seen:
                duplicates += 1
                continue
            seen.add(fact)
            facts.append(fact)
    return facts, duplicates


def load_facts(path, labels_path=None) -> TemporalKnowledgeGraph:
    """Load a facts TSV (and optional labels TSV) into an indexed graph."""
    facts, duplicates = read_facts_tsv(path)
    labels = load_labels(labels_path) if labels_path else None
    graph = TemporalKnowledgeGraph(facts, labels)
    # Exact duplicates may have been dropped either here or line-by-line.
    graph.duplicates_dropped += duplicates
    if duplicates:
        logger.info("dropped %d duplicate facts while loading %s", duplicates, path)
    return graph


def write_facts(facts: Iterable[Quadruple], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for f in facts:
            fh.write(
                f"{f.subject}\t{f.relation}\t{f.object}\t{f.timestamp.isoformat()}\n"
            )


def load_labels(path) -> dict[str, str]:
    labels: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise ParseError(
                    f"expected 2 tab-separated columns, got {len(cols)}",
                    path=path, line=lineno,
                )
            labels[cols[0]] = cols[1]
    return labels


def write_labels(labels: dict[str, str], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for entity in sorted(labels):
            fh.write(f"{entity}\t{labels[entity]}\n")


def read_intervals_tsv(path) -> list[IntervalFact]:
    """Read a 5-column interval TSV; an empty 5th column means an open end."""
    out: list[IntervalFact] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise ParseError(
                    f"expected 5 tab-separated columns, got {len(cols)}",
                    path=path, line=lineno,
                )
            subject, relation, obj, start_text, end_text = cols
            start = _parse_date(start_text, path, lineno)
            end = _parse_date(end_text, path, lineno) if end_text else None
            out.append(IntervalFact(subject, relation, obj, start, end))
    return out


@dataclass
class DatasetExample:
    """One benchmark example: quadruples plus a generated description.

    ``labels`` maps entity ids to surface forms; missing ids fall back to
    the id itself when serialized.
    """

    id: str
    quadruples: list[Quadruple]
    text: str
    metadata: dict = field(default_factory=dict)
    labels: dict[str, str] = field(default_factory=dict)

    def label(self, entity: str) -> str:
        return self.labels.get(entity, entity)

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "quadruples": [
                {
                    "subject": q.subject,
                    "subject_label": self.label(q.subject),
                    "relation": q.relation,
                    "object": q.object,
                    "object_label": self.label(q.object),
                    "timestamp": q.timestamp.isoformat(),
                }
                for q in self.quadruples
            ],
            "text": self.text,
            "metadata": self.metadata,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DatasetExample":
        quadruples = []
        labels: dict[str, str] = {}
        for entry in data["quadruples"]:
            q = Quadruple(
                entry["subject"],
                entry["relation"],
                entry["object"],
                datetime.date.fromisoformat(entry["timestamp"]),
            )
            quadruples.append(q)
            if "subject_label" in entry:
                labels[q.subject] = entry["subject_label"]
            if "object_label" in entry:
                labels[q.object] = entry["object_label"]
        if not quadruples:
            raise ValidationError(f"example {data.get('id')!r} has no quadruples")
        return cls(
            id=data["id"],
            quadruples=quadruples,
            text=data.get("text", ""),
            metadata=dict(data.get("metadata", {})),
            labels=labels,
        )


def write_dataset(examples: Iterable[DatasetExample], path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for ex in examples:
                fh.write(json.dumps(ex.to_json_dict(), ensure_ascii=False))
                fh.write("\n")
    except OSError as exc:
        raise ParseError(f"cannot write dataset: {exc}", path=path) from exc


def read_dataset(path) -> list[DatasetExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", path=path, line=lineno)
            try:
                examples.append(DatasetExample.from_json_dict(data))
            except (KeyError, ValueError, ValidationError) as exc:
                raise ParseError(f"invalid example: {exc}", path=path, line=lineno)
    return examples


def write_json(data, path, **kwargs) -> None:
    """Write a JSON document deterministically (sorted keys, LF endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(data, fh, ensure_ascii=False, indent=2, sort_keys=True, **kwargs)
        fh.write("\n")


def read_json(path):
    p = Path(path)
    if not p.exists():
        raise ParseError("file not found", path=path)
    with open(p, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", path=path)
