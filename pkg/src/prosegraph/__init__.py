"""prosegraph: nested entity-relationship graphs for close reading.

Converts medium-length passages into nested graph documents, computes
reading-order-aware layouts, and compiles progressive-reveal timelines for
an interactive reader.
"""

from .model import (
    ATOMIC,
    COMPOSITE,
    Document,
    Edge,
    Membership,
    Node,
    Sentence,
    TextSpan,
    descendant_atoms,
    level_subgraph,
    validate_document,
)
from .decomposition import (
    ComplexityRule,
    Metrics,
    Subgraph,
    TripleSet,
    canonical_key,
    decompose_entity,
    extract_top_level,
    match_entities,
    merge_sentence,
    repair_extraction,
    score_extraction,
    select_decomposition_targets,
)
from .layout import (
    LayoutConfig,
    LayoutState,
    compute_forces,
    discretize,
    find_longest_cycle,
    initial_layout,
    run_layout,
    step,
)
from .review import EntityRank, neighborhood, node_for_span, rank_entities
from .service import BundleStore, DocumentBundle, IngestConfig, export_svg, ingest
from .timeline import Timeline, assign_columns, compile_timeline, split_plan

__version__ = "0.1.0"

__all__ = [
    "ATOMIC", "COMPOSITE", "Document", "Edge", "Membership", "Node",
    "Sentence", "TextSpan", "descendant_atoms", "level_subgraph",
    "validate_document", "ComplexityRule", "Metrics", "Subgraph", "TripleSet",
    "canonical_key", "decompose_entity", "extract_top_level", "match_entities",
    "merge_sentence", "repair_extraction", "score_extraction",
    "select_decomposition_targets", "LayoutConfig", "LayoutState",
    "compute_forces", "discretize", "find_longest_cycle", "initial_layout",
    "run_layout", "step", "EntityRank", "neighborhood", "node_for_span",
    "rank_entities", "BundleStore", "DocumentBundle", "IngestConfig",
    "export_svg", "ingest", "Timeline", "assign_columns", "compile_timeline",
    "split_plan",
]
