"""Embedding-space analytics for ideation sets.

Thin wrapper over the C++ core. Arrays are NumPy float64; points are (n, 2).
"""

import json

from ._ideaspace import (
    DomainError,
    IdeaspaceError,
    ParameterError,
    ParseError,
    PreconditionError,
    TransportError,
    UndefinedScoreError,
    ValidationError,
    __version__,
    cluster_sparsity,
    convex_hull,
    dbscan,
    distribution_score,
    embed_offline,
    flatness,
    idea_space_metrics,
    idea_sparsity,
    offline_embed,
    pca_eigenvalues,
    polygon_area,
    sampling_score,
    similarity_matrix,
    spider_polygon_area,
    suggest_eps,
    trustworthiness,
    umap,
)
from . import _ideaspace


def analyze(corpus_path, dim=512, seed=42, union=False):
    """Run the offline pipeline on a corpus file.

    Returns (reports, errors): decoded report documents, and one dict per
    failed set naming the stage that failed.
    """
    texts, errors = _ideaspace._analyze(str(corpus_path), dim, seed, union)
    return [json.loads(t) for t in texts], errors


def recompute_deviation(report):
    """Largest difference between stored and recomputed metrics."""
    text = report if isinstance(report, str) else json.dumps(report)
    return _ideaspace._recompute_deviation(text)


def synthesize_corpus(n_sets=6, ideas_per_set=100, seed=1):
    """Deterministic synthetic corpus as JSON text."""
    return _ideaspace._synthesize_corpus(n_sets, ideas_per_set, seed)
