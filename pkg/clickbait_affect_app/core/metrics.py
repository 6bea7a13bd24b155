"""
Binary detector metrics per style and per ΔCG framing group.

"clickbait" is the positive class everywhere. Precision or recall with an
empty denominator is reported as 0.0 and flagged on the row.
"""

import logging
from collections import Counter, OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from ..utils.hashing import natural_key
from .affect import classify_framing
from .errors import EmptyInput
from .models import CgRecord, ConfusionCounts, Framing, MetricRow, PredictionRecord
from .taxonomy import HIGHEST_GROUP, LOWEST_GROUP, ORIGINAL_STYLE, style_rank

logger = logging.getLogger(__name__)

# Report group name of each framing class
GROUP_NAMES = {Framing.POSITIVE: HIGHEST_GROUP, Framing.NEGATIVE: LOWEST_GROUP}

JoinedRecord = Tuple[PredictionRecord, CgRecord]


def confusion_counts(records: Sequence[PredictionRecord]) -> ConfusionCounts:
    """
    Tally a confusion matrix.

    Raises:
        EmptyInput: No records
    """
    if not records:
        raise EmptyInput("Cannot count an empty prediction set")
    truth = np.fromiter((r.is_true_positive_class for r in records), dtype=bool, count=len(records))
    pred = np.fromiter((r.is_predicted_positive for r in records), dtype=bool, count=len(records))
    return ConfusionCounts(
        tp=int(np.sum(truth & pred)),
        fp=int(np.sum(~truth & pred)),
        tn=int(np.sum(~truth & ~pred)),
        fn=int(np.sum(truth & ~pred)),
    )


def metrics_from_counts(c: ConfusionCounts) -> MetricRow:
    """
    Accuracy, precision, recall and F1 of a confusion matrix.

    Raises:
        EmptyInput: total == 0
    """
    total = c.total
    if total == 0:
        raise EmptyInput("Cannot score an empty confusion matrix")
    accuracy = (c.tp + c.tn) / total
    degenerate_precision = (c.tp + c.fp) == 0
    degenerate_recall = (c.tp + c.fn) == 0
    precision = 0.0 if degenerate_precision else c.tp / (c.tp + c.fp)
    recall = 0.0 if degenerate_recall else c.tp / (c.tp + c.fn)
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return MetricRow(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        support=total,
        degenerate_precision=degenerate_precision,
        degenerate_recall=degenerate_recall,
    )


def score(records: Sequence[PredictionRecord]) -> MetricRow:
    return metrics_from_counts(confusion_counts(records))


def evaluate_per_style(records: Sequence[PredictionRecord]) -> "OrderedDict[str, MetricRow]":
    """
    One MetricRow per style present, in table order (original first).

    Raises:
        EmptyInput: No records
    """
    if not records:
        raise EmptyInput("No predictions to evaluate")
    by_style: Dict[str, List[PredictionRecord]] = {}
    for record in records:
        by_style.setdefault(record.style, []).append(record)
    return OrderedDict((style, score(by_style[style])) for style in sorted(by_style, key=style_rank))


def evaluate_by_classifier(records: Sequence[PredictionRecord]) -> "OrderedDict[str, OrderedDict[str, MetricRow]]":
    """Per-style tables keyed by classifier id (classifiers in natural id order)."""
    if not records:
        raise EmptyInput("No predictions to evaluate")
    by_classifier: Dict[str, List[PredictionRecord]] = {}
    for record in records:
        by_classifier.setdefault(record.classifier_id, []).append(record)
    return OrderedDict(
        (cid, evaluate_per_style(by_classifier[cid])) for cid in sorted(by_classifier, key=natural_key)
    )


def degradation(per_style: Mapping[str, MetricRow]) -> Dict[str, float]:
    """
    Accuracy lost relative to the "original" row, per style.

    Returns an empty map when no original row exists.
    """
    original = per_style.get(ORIGINAL_STYLE)
    if original is None:
        return {}
    return {style: original.accuracy - row.accuracy for style, row in per_style.items()}


@dataclass
class JoinResult:
    """
    Predictions joined with CG records by text id.

    Attributes:
        joined: (prediction, CgRecord) pairs in prediction order
        unmatched_predictions: Predictions without a CG record (e.g. originals)
        unmatched_records: CG records no prediction refers to
    """
    joined: List[JoinedRecord] = field(default_factory=list)
    unmatched_predictions: int = 0
    unmatched_records: int = 0


def join_predictions(predictions: Sequence[PredictionRecord], cg_records: Iterable[CgRecord]) -> JoinResult:
    """Join predictions to CG records on ``text_id``."""
    by_id = {r.text_id: r for r in cg_records}
    result = JoinResult()
    used = set()
    for prediction in predictions:
        record = by_id.get(prediction.text_id)
        if record is None:
            result.unmatched_predictions += 1
            continue
        used.add(record.text_id)
        result.joined.append((prediction, record))
    result.unmatched_records = len(set(by_id) - used)
    if result.unmatched_predictions:
        logger.info("%d predictions have no CG record", result.unmatched_predictions)
    return result


def split_by_framing(joined: Sequence[JoinedRecord]) -> "OrderedDict[str, MetricRow]":
    """
    MetricRow per framing group ("Highest" = Positive, "Lowest" = Negative).

    Empty groups are absent from the result.
    """
    groups: Dict[Framing, List[PredictionRecord]] = {Framing.POSITIVE: [], Framing.NEGATIVE: []}
    for prediction, record in joined:
        groups[classify_framing(record.delta_cg)].append(prediction)
    return OrderedDict(
        (GROUP_NAMES[framing], score(groups[framing]))
        for framing in (Framing.NEGATIVE, Framing.POSITIVE)
        if groups[framing]
    )


def split_by_framing_per_classifier(joined: Sequence[JoinedRecord]) -> "OrderedDict[str, OrderedDict[str, MetricRow]]":
    by_classifier: Dict[str, List[JoinedRecord]] = {}
    for item in joined:
        by_classifier.setdefault(item[0].classifier_id, []).append(item)
    return OrderedDict((cid, split_by_framing(by_classifier[cid])) for cid in sorted(by_classifier, key=natural_key))


def group_by_framing(records: Iterable[CgRecord]) -> Dict[str, List[CgRecord]]:
    """CG records per framing group name."""
    groups: Dict[str, List[CgRecord]] = {HIGHEST_GROUP: [], LOWEST_GROUP: []}
    for record in records:
        groups[GROUP_NAMES[classify_framing(record.delta_cg)]].append(record)
    return groups


def style_distribution(group: Sequence[Union[str, object]]) -> "OrderedDict[str, float]":
    """
    Percentage of each style in a group, rounded to one decimal.

    Rounding uses the largest-remainder method so the values sum to exactly
    100.0; remainder ties go to the style earlier in table order.

    Args:
        group: Records with a ``style`` attribute, or style names

    Raises:
        EmptyInput: Empty group
    """
    if not group:
        raise EmptyInput("Cannot compute a style distribution of an empty group")
    counts = Counter(item if isinstance(item, str) else getattr(item, "style") for item in group)
    total = sum(counts.values())
    styles = sorted(counts, key=style_rank)
    exact = {s: counts[s] * 1000 / total for s in styles}  # in tenths of a percent
    tenths = {s: int(exact[s]) for s in styles}
    missing = 1000 - sum(tenths.values())
    for s in sorted(styles, key=lambda s: (-(exact[s] - tenths[s]), style_rank(s)))[:missing]:
        tenths[s] += 1
    return OrderedDict((s, tenths[s] / 10) for s in styles)
