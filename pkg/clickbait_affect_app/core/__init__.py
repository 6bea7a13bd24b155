"""
Core module for the clickbait affect toolkit.

This module contains the closed vocabularies, data models, error hierarchy,
configuration and the pure computations (VAD mapping, Curiosity Gap, alignment,
metrics, ranking). Backend-facing operations live in ``annotation`` and
``stylization`` and are imported from there directly.
"""

from .affect import (
    AggregationMode,
    classify_framing,
    curiosity_gap,
    delta_cg,
    map_emotion_to_vad,
    score_pair,
)

from .alignment import one_to_one_align, top1_align

from .config import PipelineConfig, load_config

from .errors import ToolkitError

from .models import (
    AlignedPair,
    AlignmentReport,
    CgRecord,
    EmotionDistribution,
    Framing,
    MetricRow,
    PredictionRecord,
    StyledVariant,
    VadLexicon,
    VadVector,
)

from .taxonomy import StyleLabel, Taxonomy, get_style, style_rank

__all__ = [
    # Affect
    'AggregationMode',
    'classify_framing',
    'curiosity_gap',
    'delta_cg',
    'map_emotion_to_vad',
    'score_pair',
    # Alignment
    'one_to_one_align',
    'top1_align',
    # Configuration
    'PipelineConfig',
    'load_config',
    # Errors
    'ToolkitError',
    # Models
    'AlignedPair',
    'AlignmentReport',
    'CgRecord',
    'EmotionDistribution',
    'Framing',
    'MetricRow',
    'PredictionRecord',
    'StyledVariant',
    'VadLexicon',
    'VadVector',
    # Taxonomy
    'StyleLabel',
    'Taxonomy',
    'get_style',
    'style_rank',
]
