"""
Similarity measurement between samples.
"""

from r2d2.distance.similarity import (
    MAX_MSE,
    DEFAULT_CAP,
    SimilarityReport,
    FamilySimilarity,
    levenshtein,
    mse,
    rms,
    similarity_percent,
    similarity_from_mse,
    align_sizes,
    compare,
    family_similarity,
)

__all__ = [
    'MAX_MSE',
    'DEFAULT_CAP',
    'SimilarityReport',
    'FamilySimilarity',
    'levenshtein',
    'mse',
    'rms',
    'similarity_percent',
    'similarity_from_mse',
    'align_sizes',
    'compare',
    'family_similarity',
]
