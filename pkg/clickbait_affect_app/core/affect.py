"""
Curiosity Gap analysis in Valence-Arousal-Dominance space.

    CG(x)  = A_x * (1 - D_x) + V_x                  in [0, 2]
    ΔCG    = CG(post) - CG(comment)                 in [-2, 2]
    framing = Positive if ΔCG >= 0 else Negative

All functions are pure; inputs are immutable value objects.
"""

import math
from enum import Enum
from typing import Union

import numpy as np

from .errors import EmptyDistribution, OutOfRange, UnknownLabel
from .models import CgRecord, EmotionDistribution, Framing, VadLexicon, VadVector

DELTA_TOLERANCE = 1e-9


class AggregationMode(str, Enum):
    """Cómo se combina una distribución de emociones en un único punto VAD."""

    WEIGHTED_MEAN = "weighted_mean"
    TOP1 = "top1"


def map_emotion_to_vad(
    dist: EmotionDistribution,
    lex: VadLexicon,
    mode: Union[AggregationMode, str] = AggregationMode.WEIGHTED_MEAN,
    floor: float = 0.0,
) -> VadVector:
    """
    Map an emotion distribution to a point in VAD space.

    Args:
        dist: Per-label scores (unnormalized)
        lex: Emotion -> VAD lexicon
        mode: WEIGHTED_MEAN (normalized weighted mean of lexicon vectors) or
              TOP1 (vector of the max-weight label, ties to the smallest label)
        floor: WEIGHTED_MEAN only keeps labels with weight >= floor, then renormalizes

    Returns:
        VadVector: The aggregated point

    Raises:
        UnknownLabel: A label of the distribution is not in the lexicon
        EmptyDistribution: No weight remains after applying the floor
    """
    mode = AggregationMode(mode)
    for label in dist.labels:
        if label not in lex:
            raise UnknownLabel(label)

    if mode is AggregationMode.TOP1:
        return lex[dist.top_label()]

    kept = [(label, w) for label, w in sorted(dist.weights.items()) if w >= floor and w > 0.0]
    total = math.fsum(w for _, w in kept)
    if not kept or total <= 0.0:
        raise EmptyDistribution(f"No emotion weight >= {floor} to aggregate")

    weights = np.array([w for _, w in kept], dtype=np.float64) / total
    points = np.array([lex[label].as_tuple() for label, _ in kept], dtype=np.float64)
    mean = np.clip(weights @ points, 0.0, 1.0)
    return VadVector(float(mean[0]), float(mean[1]), float(mean[2]))


def curiosity_gap(v: VadVector) -> float:
    """CG(v) = A * (1 - D) + V, in [0, 2]."""
    return v.arousal * (1.0 - v.dominance) + v.valence


def delta_cg(post_vad: VadVector, comment_vad: VadVector) -> float:
    """ΔCG = CG(post) - CG(comment), in [-2, 2]. Positive when the post has the larger gap."""
    return curiosity_gap(post_vad) - curiosity_gap(comment_vad)


def classify_framing(delta: float) -> Framing:
    """
    Framing class of a ΔCG value; 0 is Positive.

    Raises:
        OutOfRange: |delta| exceeds 2 (plus rounding tolerance) or is not finite
    """
    delta = float(delta)
    if not math.isfinite(delta) or abs(delta) > 2.0 + DELTA_TOLERANCE:
        raise OutOfRange(f"ΔCG must lie in [-2, 2], got {delta!r}")
    return Framing.POSITIVE if delta >= 0 else Framing.NEGATIVE


def vad_drift(a: VadVector, b: VadVector) -> float:
    """
    Euclidean distance between two VAD points, in [0, √3].

    Placeholder for emotional drift: no reference definition exists, so outputs
    label the value ``vad_drift_placeholder``.
    """
    return float(np.linalg.norm(np.subtract(a.as_tuple(), b.as_tuple())))


def score_pair(
    text_id: str,
    post_id: str,
    style: str,
    post_vad: VadVector,
    comment_vad: VadVector,
) -> CgRecord:
    """Build the CgRecord of a (post, styled comment) pair."""
    cg_post = curiosity_gap(post_vad)
    cg_comment = curiosity_gap(comment_vad)
    delta = cg_post - cg_comment
    return CgRecord(
        text_id=text_id,
        post_id=post_id,
        style=style,
        cg_post=cg_post,
        cg_comment=cg_comment,
        delta_cg=delta,
        framing=classify_framing(delta),
        post_vad=post_vad,
        comment_vad=comment_vad,
        vad_drift_placeholder=vad_drift(post_vad, comment_vad),
    )
