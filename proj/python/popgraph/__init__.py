"""Population-graph construction and GNN benchmarks for age regression."""

from popgraph._core import (
    Cohort,
    Graph,
    Split,
    TrainedModel,
    benchmark,
    budget_edge_count,
    build_graph,
    degree_stats,
    export_graph,
    generate_synthetic,
    homophily,
    layout,
    load_cohort,
    load_graph_csv,
    split,
    train,
    write_cohort,
)

__all__ = [
    "Cohort",
    "Graph",
    "Split",
    "TrainedModel",
    "benchmark",
    "budget_edge_count",
    "build_graph",
    "degree_stats",
    "export_graph",
    "generate_synthetic",
    "homophily",
    "layout",
    "load_cohort",
    "load_graph_csv",
    "split",
    "train",
    "write_cohort",
]
