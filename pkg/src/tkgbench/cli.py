"""Command-line pipeline: ingest -> mine -> eval-forecast -> forecast ->
cluster -> describe -> evaluate, plus the retime/resample transforms.

Every command resolves its parameters from (flag, config file, built-in
default) in that order, runs one stage, and drops a deterministic JSON
run-manifest beside its primary output. Exit codes: 1 configuration error,
2 data error, 3 backend error.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__
from ._kernels import backend_name
from .clustering import ClusterConfig, cluster as cluster_facts, distance_matrix
from .describe import (
    DescribeConfig,
    HttpBackend,
    TemplateBackend,
    TIMESTAMP_STYLES,
    coverage_check,
    describe as describe_groups,
)
from .errors import BackendError, ConfigError, DataError, TkgBenchError
from .facts import Quadruple, TemporalKnowledgeGraph, base_relation, linearize, prune_rare_entities
from .generator import (
    GeneratorConfig,
    day_targets_from_reference_year,
    derive_weights,
    generate_range,
)
from .io import (
    DatasetExample,
    load_facts,
    load_labels,
    read_dataset,
    read_intervals_tsv,
    read_json,
    write_dataset,
    write_facts,
    write_json,
    write_labels,
)
from .metrics import MODES, compare_reports, evaluate as evaluate_datasets
from .rules import WalkConfig, evaluate_forecasting, load_rules, mine_rules, save_rules
from .schema import Schema
from .transforms import resample_matched, retime

logger = logging.getLogger("tkgbench")

_KNOWN_CONFIG_KEYS = {
    "seed": None,
    "paths": {"facts", "labels", "schema", "relation_definitions", "rules"},
    "mine": {"walks", "lengths", "transition", "lambda", "strict_order", "workers"},
    "eval_forecast": {"test_frac", "window", "k"},
    "forecast": {
        "k", "max_per_day", "retries", "coherency", "window", "weights_year",
    },
    "cluster": {"alpha", "kappa", "min", "max", "linkage", "threshold"},
    "describe": {
        "backend", "headline_prob", "styles", "max_workers", "retries", "setup",
    },
    "evaluate": {"modes", "permutation_test"},
    "ingest": {"drop_relations", "non_linearizable", "prune"},
}


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}")
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    for section, value in data.items():
        if section not in _KNOWN_CONFIG_KEYS:
            raise ConfigError(f"unknown config section {section!r}")
        allowed = _KNOWN_CONFIG_KEYS[section]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"config section {section!r} must be a mapping")
        unknown = set(value) - allowed
        if unknown:
            raise ConfigError(
                f"unknown config keys in {section!r}: {sorted(unknown)}"
            )
    return data


class Context:
    def __init__(self, config: dict, seed, verbose: bool):
        self.config = config
        self.seed = seed
        self.verbose = verbose

    def resolve(self, section: str, key: str, flag, default):
        if flag is not None:
            return flag
        value = self.config.get(section, {}).get(key)
        if value is not None:
            return value
        return default

    def resolve_seed(self, flag):
        if flag is not None:
            return flag
        if self.seed is not None:
            return self.seed
        return int(self.config.get("seed", 0))

    def path(self, key: str, flag):
        if flag is not None:
            return flag
        return self.config.get("paths", {}).get(key)


def _require(value, name: str):
    if value is None:
        raise ConfigError(f"missing required setting: {name}")
    return value


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(primary_output, command: str, params: dict, inputs, counts: dict):
    """Deterministic run record: parameters, input hashes, versions, counts."""
    manifest = {
        "command": command,
        "params": params,
        "inputs": {
            str(p): _sha256(p) for p in inputs if p and Path(p).exists()
        },
        "versions": {
            "tkgbench": __version__,
            "kernels": backend_name(),
            "python": ".".join(map(str, sys.version_info[:3])),
        },
        "counts": counts,
    }
    write_json(manifest, str(primary_output) + ".manifest.json")


def _parse_date(text: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text)
    except ValueError:
        raise ConfigError(f"not a YYYY-MM-DD date: {text!r}")


def _csv_list(text):
    if text is None:
        return None
    return [part.strip() for part in str(text).split(",") if part.strip()]


@click.group()
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="YAML config file; flags override its values.")
@click.option("--seed", type=int, default=None, help="Global random seed.")
@click.option("--verbose", is_flag=True, help="Debug-level logging.")
@click.pass_context
def main_group(ctx, config_path, seed, verbose):
    """Build and score renewable temporal-knowledge-extraction benchmarks."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    ctx.obj = Context(_load_config(config_path), seed, verbose)


@main_group.command()
@click.option("--facts", "facts_path", type=click.Path(), default=None)
@click.option("--intervals", "intervals_path", type=click.Path(), default=None,
              help="Optional 5-column interval TSV to linearize and merge.")
@click.option("--labels", "labels_path", type=click.Path(), default=None)
@click.option("--drop-relations", default=None,
              help="Comma-separated base relations to remove entirely.")
@click.option("--non-linearizable", default=None,
              help="Base relations kept as single point facts when linearizing.")
@click.option("--prune/--no-prune", "prune", default=None,
              help="Recursively drop entities with degree < 2.")
@click.option("--out-dir", type=click.Path(), required=True)
@click.pass_obj
def ingest(obj, facts_path, intervals_path, labels_path, drop_relations,
           non_linearizable, prune, out_dir):
    """Load, linearize, filter and index a source fact file."""
    facts_path = obj.path("facts", facts_path)
    labels_path = obj.path("labels", labels_path)
    if facts_path is None and intervals_path is None:
        raise ConfigError("ingest needs --facts and/or --intervals")
    drop = set(
        _csv_list(obj.resolve("ingest", "drop_relations", drop_relations, "")) or []
    )
    nonlin = set(
        _csv_list(obj.resolve("ingest", "non_linearizable", non_linearizable, ""))
        or []
    )
    do_prune = obj.resolve("ingest", "prune", prune, False)

    all_facts: list[Quadruple] = []
    duplicates = 0
    if facts_path:
        graph = load_facts(facts_path)
        all_facts.extend(graph.facts)
        duplicates += graph.duplicates_dropped
    if intervals_path:
        all_facts.extend(linearize(read_intervals_tsv(intervals_path), nonlin))
    if drop:
        all_facts = [f for f in all_facts if base_relation(f.relation) not in drop]
    labels = load_labels(labels_path) if labels_path else {}
    graph = TemporalKnowledgeGraph(all_facts, labels)
    duplicates += graph.duplicates_dropped
    if do_prune:
        before = len(graph)
        graph = prune_rare_entities(graph)
        logger.info("pruning removed %d facts", before - len(graph))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    facts_out = out / "facts.tsv"
    write_facts(graph.facts, facts_out)
    if labels:
        kept = {e: l for e, l in labels.items() if e in set(graph.entities)}
        write_labels(kept, out / "labels.tsv")
    write_manifest(
        facts_out, "ingest",
        {
            "drop_relations": sorted(drop),
            "non_linearizable": sorted(nonlin),
            "prune": bool(do_prune),
        },
        [facts_path, intervals_path, labels_path],
        {
            "facts": len(graph),
            "entities": len(graph.entities),
            "relations": len(graph.relations),
            "duplicates_dropped": duplicates,
        },
    )
    click.echo(f"wrote {len(graph)} facts to {facts_out}")


@main_group.command()
@click.option("--facts", "facts_path", type=click.Path(), default=None)
@click.option("--lengths", default=None, help="Comma-separated rule lengths.")
@click.option("--walks", type=int, default=None)
@click.option("--transition", type=click.Choice(["uniform", "exp"]), default=None)
@click.option("--lambda", "decay", type=float, default=None,
              help="Per-day decay rate of the exponential transition.")
@click.option("--strict-order", is_flag=True, default=None,
              help="Body timestamps must precede the head strictly.")
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_obj
def mine(obj, facts_path, lengths, walks, transition, decay, strict_order,
         workers, seed, out_path):
    """Mine temporal rules with confidences from grounding enumeration."""
    facts_path = _require(obj.path("facts", facts_path), "facts path")
    graph = load_facts(facts_path)
    lengths = _csv_list(obj.resolve("mine", "lengths", lengths, None))
    config = WalkConfig(
        walks=int(obj.resolve("mine", "walks", walks, 200)),
        lengths=tuple(int(x) for x in lengths) if lengths else (1, 2, 3),
        transition=obj.resolve("mine", "transition", transition, "exp"),
        decay=float(obj.resolve("mine", "lambda", decay, 0.01)),
        strict_order=bool(
            obj.resolve("mine", "strict_order", strict_order, False)
        ),
        seed=obj.resolve_seed(seed),
        workers=int(obj.resolve("mine", "workers", workers, 1)),
    )
    rules = mine_rules(graph, config)
    save_rules(rules, out_path)
    write_manifest(
        out_path, "mine",
        {
            "walks": config.walks,
            "lengths": list(config.lengths),
            "transition": config.transition,
            "lambda": config.decay,
            "strict_order": config.strict_order,
            "seed": config.seed,
        },
        [facts_path],
        {"rules": len(rules), "facts": len(graph)},
    )
    click.echo(f"mined {len(rules)} rules -> {out_path}")


@main_group.command("eval-forecast")
@click.option("--facts", "facts_path", type=click.Path(), default=None)
@click.option("--rules", "rules_path", type=click.Path(), default=None)
@click.option("--test-frac", type=float, default=None)
@click.option("--window", type=int, default=None)
@click.option("--k", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_obj
def eval_forecast(obj, facts_path, rules_path, test_frac, window, k, out_path):
    """Time-aware filtered Hits@k / MRR on the latest chronological split."""
    facts_path = _require(obj.path("facts", facts_path), "facts path")
    rules_path = _require(obj.path("rules", rules_path), "rules path")
    graph = load_facts(facts_path)
    rules = load_rules(rules_path)
    test_frac = float(obj.resolve("eval_forecast", "test_frac", test_frac, 0.02))
    window = int(obj.resolve("eval_forecast", "window", window, 2048))
    k = int(obj.resolve("eval_forecast", "k", k, 10))
    metrics = evaluate_forecasting(
        graph, rules, test_fraction=test_frac, window=window, k=k
    )
    payload = {
        f"hits_at_{metrics.k}": metrics.hits_at_k,
        "mrr": metrics.mrr,
        "queries": metrics.queries,
    }
    write_json(payload, out_path)
    write_manifest(
        out_path, "eval-forecast",
        {"test_frac": test_frac, "window": window, "k": k},
        [facts_path, rules_path],
        payload,
    )
    click.echo(
        f"Hits@{metrics.k} {metrics.hits_at_k:.4f}  MRR {metrics.mrr:.4f} "
        f"({metrics.queries} queries)"
    )


@main_group.command()
@click.option("--facts", "facts_path", type=click.Path(), default=None)
@click.option("--rules", "rules_path", type=click.Path(), default=None)
@click.option("--schema", "schema_path", type=click.Path(), default=None)
@click.option("--from", "start_text", required=True, help="First day, YYYY-MM-DD.")
@click.option("--to", "end_text", required=True, help="Last day, YYYY-MM-DD.")
@click.option("--weights-year", type=int, default=None,
              help="Reference year for relation weights and per-day targets.")
@click.option("--k", type=int, default=None)
@click.option("--max-per-day", type=int, default=None)
@click.option("--retries", type=int, default=None)
@click.option("--coherency", type=click.Choice(["subject", "object"]), default=None)
@click.option("--window", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_obj
def forecast(obj, facts_path, rules_path, schema_path, start_text, end_text,
             weights_year, k, max_per_day, retries, coherency, window, seed,
             out_path):
    """Generate schema-valid, coherent future facts day by day."""
    facts_path = _require(obj.path("facts", facts_path), "facts path")
    rules_path = _require(obj.path("rules", rules_path), "rules path")
    schema_path = _require(obj.path("schema", schema_path), "schema path")
    graph = load_facts(facts_path)
    rules = load_rules(rules_path)
    schema = Schema.load(schema_path)
    start = _parse_date(start_text)
    end = _parse_date(end_text)
    weights_year = obj.resolve("forecast", "weights_year", weights_year, None)
    if weights_year is None:
        raise ConfigError("missing required setting: weights-year")
    config = GeneratorConfig(
        k=int(obj.resolve("forecast", "k", k, 4)),
        max_per_day=int(obj.resolve("forecast", "max_per_day", max_per_day, 128)),
        max_retries=int(obj.resolve("forecast", "retries", retries, 16)),
        coherency=obj.resolve("forecast", "coherency", coherency, "subject"),
        window=int(obj.resolve("forecast", "window", window, 2048)),
        seed=obj.resolve_seed(seed),
    )
    weights = derive_weights(graph, int(weights_year))
    targets = day_targets_from_reference_year(
        graph, start, end, int(weights_year), config.max_per_day
    )
    result = generate_range(graph, rules, schema, weights, targets, config)
    write_facts(result.facts, out_path)
    diagnostics_path = str(out_path) + ".diagnostics.json"
    write_json(result.diagnostics, diagnostics_path)
    write_manifest(
        out_path, "forecast",
        {
            "from": start.isoformat(),
            "to": end.isoformat(),
            "weights_year": int(weights_year),
            "k": config.k,
            "max_per_day": config.max_per_day,
            "retries": config.max_retries,
            "coherency": config.coherency,
            "window": config.window,
            "seed": config.seed,
        },
        [facts_path, rules_path, schema_path],
        {"generated": len(result.facts)},
    )
    click.echo(
        f"generated {len(result.facts)} facts -> {out_path} "
        f"(diagnostics in {diagnostics_path})"
    )


def _quad_json(q: Quadruple, labels) -> dict:
    return {
        "subject": q.subject,
        "subject_label": labels.get(q.subject, q.subject),
        "relation": q.relation,
        "object": q.object,
        "object_label": labels.get(q.object, q.object),
        "timestamp": q.timestamp.isoformat(),
    }


def _quad_from_json(entry: dict) -> Quadruple:
    return Quadruple(
        entry["subject"], entry["relation"], entry["object"],
        datetime.date.fromisoformat(entry["timestamp"]),
    )


@main_group.command("cluster")
@click.option("--facts", "facts_path", type=click.Path(), default=None)
@click.option("--schema", "schema_path", type=click.Path(), default=None)
@click.option("--labels", "labels_path", type=click.Path(), default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--kappa", type=float, default=None)
@click.option("--min", "min_size", type=int, default=None)
@click.option("--max", "max_size", type=int, default=None)
@click.option("--linkage", type=click.Choice(["average", "complete"]), default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--matrix-out", "matrix_path", type=click.Path(), default=None,
              help="Optional CSV dump of the pairwise distance matrix.")
@click.pass_obj
def cluster_cmd(obj, facts_path, schema_path, labels_path, alpha, kappa,
                min_size, max_size, linkage, threshold, out_path, matrix_path):
    """Group facts into 2-4 fact bundles by entity/timestamp proximity."""
    facts_path = _require(obj.path("facts", facts_path), "facts path")
    schema_path = _require(obj.path("schema", schema_path), "schema path")
    labels_path = obj.path("labels", labels_path)
    graph = load_facts(facts_path, labels_path)
    schema = Schema.load(schema_path)
    config = ClusterConfig(
        alpha=float(obj.resolve("cluster", "alpha", alpha, 0.8)),
        kappa=float(obj.resolve("cluster", "kappa", kappa, 0.03)),
        min_size=int(obj.resolve("cluster", "min", min_size, 2)),
        max_size=int(obj.resolve("cluster", "max", max_size, 4)),
        linkage=obj.resolve("cluster", "linkage", linkage, "average"),
        threshold=float(obj.resolve("cluster", "threshold", threshold, 0.5)),
    )
    facts = list(graph.facts)
    if not facts:
        raise DataError(f"no facts to cluster in {facts_path}")
    result = cluster_facts(facts, schema, config)
    labels = graph.labels
    payload = {
        "clusters": [
            [_quad_json(q, labels) for q in group] for group in result.clusters
        ],
        "singletons": [_quad_json(q, labels) for q in result.singletons],
    }
    write_json(payload, out_path)
    if matrix_path:
        matrix = distance_matrix(facts, schema, config)
        np.savetxt(matrix_path, matrix, delimiter=",", fmt="%.17g")
    write_manifest(
        out_path, "cluster",
        {
            "alpha": config.alpha,
            "kappa": config.kappa,
            "min": config.min_size,
            "max": config.max_size,
            "linkage": config.linkage,
            "threshold": config.threshold,
        },
        [facts_path, schema_path, labels_path],
        {
            "facts": len(facts),
            "clusters": len(result.clusters),
            "singletons": len(result.singletons),
        },
    )
    click.echo(
        f"{len(result.clusters)} clusters, {len(result.singletons)} singletons "
        f"-> {out_path}"
    )


@main_group.command("describe")
@click.option("--input", "input_path", type=click.Path(), required=True,
              help="clusters.json or a facts TSV.")
@click.option("--setup", type=click.Choice(["single", "multi"]), default=None)
@click.option("--backend", "backend_kind", type=click.Choice(["template", "http"]),
              default=None)
@click.option("--definitions", "definitions_path", type=click.Path(), default=None,
              help="JSON map of relation -> definition sentence.")
@click.option("--labels", "labels_path", type=click.Path(), default=None)
@click.option("--headline-prob", type=float, default=None)
@click.option("--styles", default=None, help="Comma-separated timestamp styles.")
@click.option("--max-workers", type=int, default=None)
@click.option("--retries", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_obj
def describe_cmd(obj, input_path, setup, backend_kind, definitions_path,
                 labels_path, headline_prob, styles, max_workers, retries,
                 seed, out_path):
    """Verbalize facts or fact bundles into dataset examples."""
    setup = obj.resolve("describe", "setup", setup, "single")
    backend_kind = obj.resolve("describe", "backend", backend_kind, "template")
    definitions_path = _require(
        obj.path("relation_definitions", definitions_path), "relation definitions"
    )
    labels_path = obj.path("labels", labels_path)
    definitions = read_json(definitions_path)
    if not isinstance(definitions, dict):
        raise DataError(f"{definitions_path} must hold a JSON object")
    labels = load_labels(labels_path) if labels_path else {}

    input_path = str(input_path)
    groups: list[list[Quadruple]]
    if input_path.endswith(".json"):
        payload = read_json(input_path)
        if setup == "multi":
            groups = [
                [_quad_from_json(q) for q in group]
                for group in payload.get("clusters", [])
            ]
        else:
            groups = [[_quad_from_json(q)] for q in payload.get("singletons", [])]
        # Labels embedded in the clusters file complement the labels TSV.
        for entry in payload.get("singletons", []) + [
            q for group in payload.get("clusters", []) for q in group
        ]:
            if "subject_label" in entry:
                labels.setdefault(entry["subject"], entry["subject_label"])
            if "object_label" in entry:
                labels.setdefault(entry["object"], entry["object_label"])
    else:
        graph = load_facts(input_path, labels_path)
        labels = dict(graph.labels)
        if setup == "multi":
            raise ConfigError(
                "multi setup needs a clusters.json input; facts TSVs only "
                "support --setup single"
            )
        groups = [[f] for f in graph.facts]

    config = DescribeConfig(
        styles=tuple(
            _csv_list(obj.resolve("describe", "styles", styles, None))
            or TIMESTAMP_STYLES
        ),
        headline_prob=float(
            obj.resolve("describe", "headline_prob", headline_prob, 0.25)
        ),
        seed=obj.resolve_seed(seed),
        max_workers=int(obj.resolve("describe", "max_workers", max_workers, 4)),
        retries=int(obj.resolve("describe", "retries", retries, 2)),
        id_prefix=setup,
    )
    if backend_kind == "template":
        backend = TemplateBackend()
    else:
        backend = HttpBackend()
    result = describe_groups(groups, backend, definitions, labels, config)
    write_dataset(result.examples, out_path)
    flagged = sum(
        1 for ex in result.examples if not coverage_check(ex, config.styles).ok
    )
    if result.skipped:
        logger.warning(
            "%d items skipped: %s",
            len(result.skipped),
            "; ".join(f"#{s.index}: {s.reason}" for s in result.skipped[:5]),
        )
    write_manifest(
        out_path, "describe",
        {
            "setup": setup,
            "backend": backend_kind,
            "headline_prob": config.headline_prob,
            "styles": list(config.styles),
            "seed": config.seed,
        },
        [input_path, definitions_path, labels_path],
        {
            "examples": len(result.examples),
            "skipped": len(result.skipped),
            "coverage_flagged": flagged,
        },
    )
    click.echo(
        f"wrote {len(result.examples)} examples -> {out_path} "
        f"({len(result.skipped)} skipped, {flagged} coverage-flagged)"
    )


@main_group.command("evaluate")
@click.option("--candidates", "cand_path", type=click.Path(), required=True)
@click.option("--references", "ref_path", type=click.Path(), required=True)
@click.option("--modes", default=None, help="Comma-separated evaluation modes.")
@click.option("--baseline", "baseline_path", type=click.Path(), default=None,
              help="Second candidates file; enables the permutation test.")
@click.option("--permutation-test", "resamples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--report", "report_path", type=click.Path(), required=True)
@click.pass_obj
def evaluate_cmd(obj, cand_path, ref_path, modes, baseline_path, resamples,
                 seed, report_path):
    """Score candidate extractions against references in all four modes."""
    modes = tuple(
        _csv_list(obj.resolve("evaluate", "modes", modes, None)) or MODES
    )
    resamples = int(
        obj.resolve("evaluate", "permutation_test", resamples, 10000)
    )
    seed = obj.resolve_seed(seed)
    candidates = read_dataset(cand_path)
    references = read_dataset(ref_path)
    report = evaluate_datasets(candidates, references, modes)
    if baseline_path:
        baseline = read_dataset(baseline_path)
        baseline_report = evaluate_datasets(baseline, references, modes)
        report.p_values = compare_reports(
            report, baseline_report, resamples=resamples, seed=seed
        )
    write_json(report.to_json_dict(), report_path)
    write_manifest(
        report_path, "evaluate",
        {
            "modes": list(modes),
            "permutation_test": resamples if baseline_path else None,
            "seed": seed,
        },
        [cand_path, ref_path, baseline_path],
        {
            mode: round(res.f1, 6) for mode, res in report.modes.items()
        },
    )
    for mode in modes:
        res = report.modes[mode]
        line = (
            f"{mode:8s} P {res.precision:.4f}  R {res.recall:.4f}  "
            f"F1 {res.f1:.4f}"
        )
        if mode in report.p_values:
            line += f"  p {report.p_values[mode]:.4f}"
        click.echo(line)


@main_group.command("retime")
@click.option("--input", "input_path", type=click.Path(), required=True,
              help="dataset JSONL or facts TSV.")
@click.option("--year", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.pass_obj
def retime_cmd(obj, input_path, year, out_path):
    """Rewrite every quadruple timestamp's year (Feb 29 -> Feb 28)."""
    input_path = str(input_path)
    if input_path.endswith(".jsonl"):
        examples = read_dataset(input_path)
        write_dataset(retime(examples, year), out_path)
        count = len(examples)
    else:
        graph = load_facts(input_path)
        retimed = retime(graph, year)
        write_facts(retimed.facts, out_path)
        count = len(retimed)
    write_manifest(
        out_path, "retime", {"year": year}, [input_path], {"items": count}
    )
    click.echo(f"retimed {count} items -> {out_path}")


@main_group.command("resample")
@click.option("--a", "a_path", type=click.Path(), required=True)
@click.option("--b", "b_path", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None)
@click.option("--out-a", "out_a", type=click.Path(), required=True)
@click.option("--out-b", "out_b", type=click.Path(), required=True)
@click.pass_obj
def resample_cmd(obj, a_path, b_path, seed, out_a, out_b):
    """Resample two datasets to matched relation/timestamp distributions."""
    seed = obj.resolve_seed(seed)
    a = read_dataset(a_path)
    b = read_dataset(b_path)
    sub_a, sub_b = resample_matched(a, b, seed=seed)
    write_dataset(sub_a, out_a)
    write_dataset(sub_b, out_b)
    write_manifest(
        out_a, "resample", {"seed": seed}, [a_path, b_path],
        {"a": len(sub_a), "b": len(sub_b)},
    )
    click.echo(f"kept {len(sub_a)} + {len(sub_b)} examples -> {out_a}, {out_b}")


def main(argv=None):
    """Entry point with exit-code mapping."""
    try:
        main_group.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 130
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 3
    except (DataError, TkgBenchError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"data error: file not found: {exc.filename}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
