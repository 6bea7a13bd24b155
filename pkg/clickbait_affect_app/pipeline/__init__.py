"""
Pipeline package for the clickbait affect toolkit.

This package chains the stages (ingest, embed, align, stylize, annotate,
score, evaluate) with on-disk checkpoints and writes the report bundle.
"""

from .report import emit_report
from .runner import STAGE_ORDER, find_attack_candidates, run_pipeline, run_stage
from .state import PipelineState

__all__ = [
    'emit_report',
    'STAGE_ORDER',
    'find_attack_candidates',
    'run_pipeline',
    'run_stage',
    'PipelineState',
]
