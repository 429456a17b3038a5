"""Turning fact bundles into text: prompt construction, timestamp styles,
headline sampling, pluggable generation backends and a coverage check.

Two prompt templates exist, one for single facts and one for 2-4 fact
bundles. Timestamps are rendered in a randomly sampled style and a
fictional publication headline is requested in a quarter of the cases.
The template backend produces deterministic offline text that always
passes the coverage check; the HTTP backend posts chat-completion style
requests to a configurable endpoint.
"""

from __future__ import annotations

import datetime
import logging
import os
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import BackendError, ConfigError, DataError, ValidationError
from .facts import END, START, Quadruple, base_relation, relation_kind
from .io import DatasetExample

logger = logging.getLogger(__name__)

ENV_ENDPOINT = "TKGF_API_ENDPOINT"
ENV_TOKEN = "TKGF_API_TOKEN"
ENV_MODEL = "TKGF_API_MODEL"

SINGLE = "single"
MULTI = "multi"

_ORDINAL_SUFFIXES = {1: "st", 2: "nd", 3: "rd"}


def _ordinal(day: int) -> str:
    if 10 <= day % 100 <= 20:
        suffix = "th"
    else:
        suffix = _ORDINAL_SUFFIXES.get(day % 10, "th")
    return f"{day}{suffix}"


def render_timestamp(day: datetime.date, style: str) -> str:
    if style == "iso":
        return day.isoformat()
    if style == "long":
        return f"{day.strftime('%B')} {_ordinal(day.day)}, {day.year}"
    if style == "day_long":
        return (
            f"{day.strftime('%A')}, {day.strftime('%B')} "
            f"{_ordinal(day.day)}, {day.year}"
        )
    if style == "short":
        return f"{day.day} {day.strftime('%b')} {day.year}"
    raise ValidationError(f"unknown timestamp style {style!r}")


TIMESTAMP_STYLES = ("iso", "long", "day_long", "short")


@dataclass
class PromptSpec:
    """Everything needed to render one description prompt."""

    setup: str  # "single" or "multi"
    quadruples: list[Quadruple]
    labels: Mapping[str, str]
    relation_definitions: Mapping[str, str]
    timestamp_style: str = "iso"
    headline: bool = False
    headline_date: Optional[datetime.date] = None

    def __post_init__(self):
        if self.setup == SINGLE:
            if len(self.quadruples) != 1:
                raise ValidationError("single setup carries exactly one quadruple")
        elif self.setup == MULTI:
            if not 2 <= len(self.quadruples) <= 4:
                raise ValidationError("multi setup carries 2 to 4 quadruples")
        else:
            raise ValidationError(f"unknown setup {self.setup!r}")
        if self.headline and self.headline_date is None:
            raise ValidationError("headline prompts need a headline date")

    def label(self, entity: str) -> str:
        return self.labels.get(entity, entity)

    def quadruple_line(self, q: Quadruple) -> str:
        return (
            f"({self.label(q.subject)}, {q.relation}, {self.label(q.object)}, "
            f"{render_timestamp(q.timestamp, self.timestamp_style)})"
        )


_HEADLINE_BLOCK = (
    "The current date is {date}. In addition to the date of the event, "
    "indicate the current date at the top of your text as part of a news "
    "headline."
)

_SINGLE_TEMPLATE = """\
Given the following event represented as a quadruplet of the form \
(subject, relation, object, timestamp):

{quadruple}

The following definition for the {relation} relation:

{definition}

Generate a one to three sentences description text for this event, in the \
style of a newspaper.
You can add additional details, but the entirety of the information in the \
given quadruplet must be preserved.
Do NOT add any additional information or text: you must only generate the \
description.{headline}"""

_MULTI_TEMPLATE = """\
Given the following events represented as quadruplets of the form \
(subject, relation, object, timestamp):

{quadruples}

and the following definitions for the relations:

{definitions}

Generate a short paragraph describing these events, in the style of a \
newspaper.
You can add additional details, but the entirety of the information in the \
given quadruplets must be preserved.
Do NOT add any additional information or text: you must only generate the \
description.{headline}"""


def build_prompt(spec: PromptSpec) -> str:
    """Byte-deterministic prompt for a prompt spec.

    Raises DataError naming the relation when a definition is missing.
    Definitions in the multi prompt are deduplicated by relation, in first
    appearance order.
    """
    for q in spec.quadruples:
        if q.relation not in spec.relation_definitions:
            raise DataError(
                f"no definition for relation {q.relation!r}; add it to the "
                "relation definitions file"
            )
    headline = ""
    if spec.headline:
        headline = "\n\n" + _HEADLINE_BLOCK.format(
            date=render_timestamp(spec.headline_date, spec.timestamp_style)
        )
    if spec.setup == SINGLE:
        q = spec.quadruples[0]
        return _SINGLE_TEMPLATE.format(
            quadruple=spec.quadruple_line(q),
            relation=q.relation,
            definition=spec.relation_definitions[q.relation],
            headline=headline,
        )
    seen = []
    for q in spec.quadruples:
        if q.relation not in seen:
            seen.append(q.relation)
    definitions = "\n".join(
        f"{rel}: {spec.relation_definitions[rel]}" for rel in seen
    )
    return _MULTI_TEMPLATE.format(
        quadruples="\n".join(spec.quadruple_line(q) for q in spec.quadruples),
        definitions=definitions,
        headline=headline,
    )


def sample_style(
    rng: random.Random,
    styles: Sequence[str] = TIMESTAMP_STYLES,
    headline_prob: float = 0.25,
) -> tuple[str, bool]:
    """Draw (timestamp style, headline flag) from a seeded stream."""
    style = styles[rng.randrange(len(styles))]
    headline = rng.random() < headline_prob
    return style, headline


def sample_headline_date(
    rng: random.Random, quadruples: Sequence[Quadruple], spread_days: int = 30
) -> datetime.date:
    """Fictional publication date near the earliest fact date."""
    earliest = min(q.timestamp for q in quadruples)
    offset = rng.randint(-spread_days, spread_days)
    return earliest + datetime.timedelta(days=offset)


def _humanize(relation: str) -> str:
    words = re.findall(r"[a-z0-9]+|[A-Z][a-z0-9]*", relation)
    return " ".join(w.lower() for w in words)


class TemplateBackend:
    """Offline deterministic verbalizer; always satisfies the coverage check."""

    name = "template"
    model = "builtin-template"

    def generate(self, prompt: str, spec: Optional[PromptSpec] = None) -> str:
        if spec is None:
            raise BackendError("the template backend needs the structured spec")
        sentences = []
        for q in spec.quadruples:
            subject = spec.label(q.subject)
            obj = spec.label(q.object)
            date = render_timestamp(q.timestamp, spec.timestamp_style)
            kind = relation_kind(q.relation)
            phrase = _humanize(base_relation(q.relation))
            if kind == START:
                sentences.append(
                    f"{subject} started being {phrase} {obj} on {date}."
                )
            elif kind == END:
                sentences.append(
                    f"{subject}'s {phrase} relationship with {obj} came to an "
                    f"end on {date}."
                )
            else:
                sentences.append(
                    f"On {date}, {subject} was linked to {obj} through "
                    f"{phrase}."
                )
        text = " ".join(sentences)
        if spec.headline:
            head = render_timestamp(spec.headline_date, spec.timestamp_style)
            text = f"{head}: News Update. {text}"
        return text


class HttpBackend:
    """Chat-completion style HTTP backend, configured via environment.

    TKGF_API_ENDPOINT, TKGF_API_TOKEN and TKGF_API_MODEL select the
    endpoint; no provider is hard-wired. Requests time out and are retried
    by the describe() driver, not here.
    """

    name = "http"

    def __init__(
        self,
        endpoint: Optional[str] = None,
        token: Optional[str] = None,
        model: Optional[str] = None,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        self.token = token or os.environ.get(ENV_TOKEN)
        self.model = model or os.environ.get(ENV_MODEL)
        self.timeout = timeout
        if not self.endpoint or not self.model:
            raise ConfigError(
                f"HTTP backend needs {ENV_ENDPOINT} and {ENV_MODEL} "
                f"(and usually {ENV_TOKEN}) set"
            )

    def generate(self, prompt: str, spec: Optional[PromptSpec] = None) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            response = requests.post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except Exception as exc:  # requests errors, key errors, bad JSON
            raise BackendError(f"text generation request failed: {exc}") from exc


@dataclass
class DescribeConfig:
    styles: tuple[str, ...] = TIMESTAMP_STYLES
    headline_prob: float = 0.25
    headline_spread_days: int = 30
    seed: int = 0
    max_workers: int = 4
    retries: int = 2
    id_prefix: str = "example"

    def __post_init__(self):
        if not self.styles:
            raise ValidationError("at least one timestamp style is required")
        unknown = set(self.styles) - set(TIMESTAMP_STYLES)
        if unknown:
            raise ValidationError(f"unknown timestamp styles {sorted(unknown)}")
        if not 0.0 <= self.headline_prob <= 1.0:
            raise ValidationError("headline_prob must lie in [0, 1]")


@dataclass
class SkippedItem:
    index: int
    reason: str


@dataclass
class DescribeResult:
    examples: list[DatasetExample] = field(default_factory=list)
    skipped: list[SkippedItem] = field(default_factory=list)


def describe(
    groups: Sequence[Sequence[Quadruple]],
    backend,
    relation_definitions: Mapping[str, str],
    labels: Mapping[str, str],
    config: Optional[DescribeConfig] = None,
) -> DescribeResult:
    """Generate one example per fact group.

    Style and headline sampling happen in input order before any backend
    call, so results are reproducible regardless of request scheduling.
    Output order matches input order; failed items are reported as skipped,
    never silently dropped. len(examples) + len(skipped) == len(groups).
    """
    if config is None:
        config = DescribeConfig()
    rng = random.Random(config.seed)
    prepared = []
    for i, group in enumerate(groups):
        group = list(group)
        style, headline = sample_style(rng, config.styles, config.headline_prob)
        headline_date = (
            sample_headline_date(rng, group, config.headline_spread_days)
            if headline
            else None
        )
        setup = SINGLE if len(group) == 1 else MULTI
        try:
            spec = PromptSpec(
                setup=setup,
                quadruples=group,
                labels=labels,
                relation_definitions=relation_definitions,
                timestamp_style=style,
                headline=headline,
                headline_date=headline_date,
            )
            prompt = build_prompt(spec)
            prepared.append((i, spec, prompt, None))
        except (ValidationError, DataError) as exc:
            prepared.append((i, None, None, str(exc)))

    def run_one(item):
        i, spec, prompt, error = item
        if error is not None:
            return i, None, error
        last = None
        for _attempt in range(config.retries + 1):
            try:
                return i, backend.generate(prompt, spec), None
            except BackendError as exc:
                last = exc
        return i, None, f"backend failed after {config.retries + 1} attempts: {last}"

    if config.max_workers > 1 and len(prepared) > 1:
        with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
            outcomes = list(pool.map(run_one, prepared))
    else:
        outcomes = [run_one(item) for item in prepared]

    result = DescribeResult()
    for (i, spec, _prompt, _error), (_i, text, failure) in zip(prepared, outcomes):
        if failure is not None:
            result.skipped.append(SkippedItem(index=i, reason=failure))
            continue
        quadruples = list(spec.quadruples)
        example_labels = {}
        for q in quadruples:
            example_labels[q.subject] = labels.get(q.subject, q.subject)
            example_labels[q.object] = labels.get(q.object, q.object)
        result.examples.append(
            DatasetExample(
                id=f"{config.id_prefix}-{i:06d}",
                quadruples=quadruples,
                text=text,
                metadata={
                    "timestamp_style": spec.timestamp_style,
                    "headline": spec.headline,
                    "headline_date": (
                        spec.headline_date.isoformat() if spec.headline else None
                    ),
                    "backend": backend.name,
                    "model": getattr(backend, "model", None),
                },
                labels=example_labels,
            )
        )
    return result


def _tokens(text: str) -> list[str]:
    return [t for t in re.split(r"[^0-9a-z]+", text.casefold()) if t]


def _contains_tokens(haystack: list[str], needle: list[str]) -> bool:
    if not needle:
        return False
    n = len(needle)
    for i in range(len(haystack) - n + 1):
        if haystack[i:i + n] == needle:
            return True
    return False


@dataclass
class CoverageReport:
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags


def coverage_check(
    example: DatasetExample, styles: Sequence[str] = TIMESTAMP_STYLES
) -> CoverageReport:
    """Flag quadruple parts that never appear in the example text.

    Subject and object labels match through case-insensitive contiguous
    token containment (punctuation-insensitive); timestamps match when any
    configured style rendering appears. Only coverage is automated;
    relevance and self-consistency stay human-judgment criteria.
    """
    text_tokens = _tokens(example.text)
    report = CoverageReport()
    for idx, q in enumerate(example.quadruples):
        for role, value in (
            ("subject", example.label(q.subject)),
            ("object", example.label(q.object)),
        ):
            if not _contains_tokens(text_tokens, _tokens(value)):
                report.flags.append(
                    f"quadruple {idx}: {role} label {value!r} not found in text"
                )
        rendered = [render_timestamp(q.timestamp, s) for s in styles]
        if not any(_contains_tokens(text_tokens, _tokens(r)) for r in rendered):
            report.flags.append(
                f"quadruple {idx}: timestamp {q.timestamp.isoformat()} not found "
                "in text in any configured style"
            )
    return report
