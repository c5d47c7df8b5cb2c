"""Seed-based user matching across two partial copies of a network."""

from .evaluate import DegreeBucket, Metrics, degree_breakdown, evaluate
from .generators import (
    BipartiteAffiliation,
    ParameterError,
    affiliation_to_graph,
    gen_affiliation,
    gen_er,
    gen_pa,
    gen_rmat,
)
from .graph import Graph, GraphError, build_graph, induced_subgraph, neighbors
from .links import LinkError, LinkSet
from .matching import (
    MatchConfig,
    MatchResult,
    ScoreTable,
    baseline_match,
    brute_force_scores,
    count_witnesses,
    reference_matching,
    run_matching,
    select_matches,
    user_matching,
)
from .perturb import (
    CopyPair,
    add_sybils,
    affiliation_pair,
    cascade_pair,
    copy_affiliation_correlated,
    copy_cascade,
    copy_independent,
    inject_sybils,
    sample_seeds,
)
from .rng import Rng, derive_seeds, splitmix64

__version__ = "0.1.0"
