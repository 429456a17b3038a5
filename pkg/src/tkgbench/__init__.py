"""tkgbench: renewable temporal-knowledge-extraction benchmarks.

Pipeline: ingest a temporal knowledge graph, mine temporal rules, forecast
schema-valid future facts, cluster them into small bundles, verbalize the
bundles into text/fact example pairs, and score extraction systems with
corrected quadruple-matching metrics.
"""

__version__ = "0.1.0"

from ._kernels import backend_name
from .facts import (
    IntervalFact,
    Quadruple,
    TemporalKnowledgeGraph,
    base_relation,
    end_relation,
    linearize,
    prune_rare_entities,
    relation_kind,
    start_relation,
)
from .io import (
    DatasetExample,
    load_facts,
    load_labels,
    read_dataset,
    write_dataset,
    write_facts,
)
from .schema import Schema
from .rules import (
    Candidate,
    QueryAnswer,
    RuleAtom,
    TemporalRule,
    WalkConfig,
    apply_rules,
    evaluate_forecasting,
    load_rules,
    mine_rules,
    save_rules,
)
from .generator import (
    GeneratorConfig,
    OpenRelationLedger,
    RelationWeights,
    derive_weights,
    generate_fact,
    generate_range,
)
from .clustering import (
    ClusterConfig,
    ClusterResult,
    cluster,
    distance_matrix,
    fact_distance,
)
from .describe import (
    DescribeConfig,
    HttpBackend,
    PromptSpec,
    TemplateBackend,
    build_prompt,
    coverage_check,
    describe,
    sample_style,
)
from .metrics import (
    EvalReport,
    ScoredElement,
    compare_reports,
    element_match,
    evaluate,
    example_score,
    permutation_test,
    quad_score,
    tuple_score,
)
from .transforms import resample_matched, retime

__all__ = [name for name in dir() if not name.startswith("_")]
