"""
Tests for the detector metrics.

Tests confusion counting, metric formulas on positive-only sets, per-style and
per-framing evaluation, degradation and the style distribution.
"""

import math
import random
import unittest

from clickbait_affect_app.core.errors import EmptyInput
from clickbait_affect_app.core.metrics import (
    confusion_counts,
    degradation,
    evaluate_by_classifier,
    evaluate_per_style,
    group_by_framing,
    join_predictions,
    metrics_from_counts,
    score,
    split_by_framing,
    split_by_framing_per_classifier,
    style_distribution,
)
from clickbait_affect_app.core.models import CgRecord, ConfusionCounts, Framing, PredictionRecord, VadVector

F1_TOLERANCE = 5e-5
# 2r/(1+r) at r = 0.7272 is 0.842056; its reference value 0.8420 is truncated, not rounded
TRUNCATED_F1_TOLERANCE = 1e-4

# (accuracy, F1) rows of detectors scored on clickbait-only test sets
POSITIVE_ONLY_ROWS = [
    (0.7370, 0.8486),
    (0.9770, 0.9884),
    (0.7272, 0.8420),
    (0.6937, 0.8192),
    (0.9742, 0.9870),
    (0.9474, 0.9730),
]


def prediction(text_id, style="formal", truth="clickbait", predicted="clickbait", classifier="roberta"):
    return PredictionRecord(text_id, style, truth, predicted, classifier)


def cg_record(text_id, cg_post, cg_comment, style="formal"):
    delta = cg_post - cg_comment
    framing = Framing.POSITIVE if delta >= 0 else Framing.NEGATIVE
    vad = VadVector(0.5, 0.5, 0.5)
    return CgRecord(text_id, "p1", style, cg_post, cg_comment, delta, framing, vad, vad)


class TestConfusionCounts(unittest.TestCase):
    """Tests for confusion_counts."""

    def test_tally(self):
        records = [
            prediction("a"),
            prediction("b", predicted="non-clickbait"),
            prediction("c", truth="non-clickbait"),
            prediction("d", truth="non-clickbait", predicted="non-clickbait"),
            prediction("e"),
        ]
        self.assertEqual(confusion_counts(records), ConfusionCounts(tp=2, fp=1, tn=1, fn=1))

    def test_empty(self):
        with self.assertRaises(EmptyInput):
            confusion_counts([])

    def test_counts_add_over_partitions(self):
        rng = random.Random(3)
        labels = ("clickbait", "non-clickbait")
        records = [prediction(str(i), truth=rng.choice(labels), predicted=rng.choice(labels)) for i in range(300)]
        whole = confusion_counts(records)
        parts = confusion_counts(records[:120]) + confusion_counts(records[120:])
        self.assertEqual(whole, parts)


class TestMetricsFromCounts(unittest.TestCase):
    """Tests for metrics_from_counts."""

    def test_positive_only_example(self):
        row = metrics_from_counts(ConfusionCounts(tp=7370, fn=2630))
        self.assertAlmostEqual(row.accuracy, 0.7370)
        self.assertEqual(row.precision, 1.0)
        self.assertAlmostEqual(row.recall, 0.7370)
        self.assertLessEqual(abs(row.f1 - 0.8486), F1_TOLERANCE)
        self.assertAlmostEqual(row.misclassification, 0.2630)
        self.assertFalse(row.degenerate_precision)

    def test_published_rows_reproduce(self):
        # printed accuracies are rounded to four decimals, so search the counts they round from
        n = 100_000
        for accuracy, expected_f1 in POSITIVE_ONLY_ROWS:
            low = math.ceil((accuracy - 5e-5) * n)
            high = math.floor((accuracy + 5e-5) * n)
            f1_values = [metrics_from_counts(ConfusionCounts(tp=tp, fn=n - tp)).f1 for tp in range(low, high + 1)]
            closest = min(f1_values, key=lambda f1: abs(f1 - expected_f1))
            self.assertLessEqual(abs(closest - expected_f1), F1_TOLERANCE, msg=f"accuracy {accuracy}")

    def test_random_positive_only_sets(self):
        rng = random.Random(42)
        for _ in range(1000):
            tp = rng.randint(1, 5000)
            fn = rng.randint(0, 5000)
            row = metrics_from_counts(ConfusionCounts(tp=tp, fn=fn))
            self.assertEqual(row.precision, 1.0)
            self.assertAlmostEqual(row.recall, row.accuracy)
            self.assertAlmostEqual(row.f1, 2 * row.accuracy / (1 + row.accuracy))

    def test_degenerate_precision(self):
        row = metrics_from_counts(ConfusionCounts(tn=5, fn=3))
        self.assertTrue(row.degenerate_precision)
        self.assertFalse(row.degenerate_recall)
        self.assertEqual(row.precision, 0.0)
        self.assertEqual(row.f1, 0.0)
        self.assertAlmostEqual(row.accuracy, 5 / 8)

    def test_degenerate_recall(self):
        row = metrics_from_counts(ConfusionCounts(fp=2, tn=6))
        self.assertTrue(row.degenerate_recall)
        self.assertEqual(row.recall, 0.0)

    def test_empty_matrix(self):
        with self.assertRaises(EmptyInput):
            metrics_from_counts(ConfusionCounts())

    def test_metrics_in_unit_range(self):
        rng = random.Random(8)
        for _ in range(500):
            counts = ConfusionCounts(*(rng.randint(0, 50) for _ in range(4)))
            if counts.total == 0:
                continue
            row = metrics_from_counts(counts)
            for value in (row.accuracy, row.precision, row.recall, row.f1):
                self.assertGreaterEqual(value, 0.0)
                self.assertLessEqual(value, 1.0)


class TestPerStyle(unittest.TestCase):
    """Tests for per-style evaluation and degradation."""

    def setUp(self):
        self.records = (
            [prediction(f"o{i}", style="original", predicted="clickbait" if i < 9 else "non-clickbait")
             for i in range(10)]
            + [prediction(f"f{i}", style="formal", predicted="clickbait" if i < 4 else "non-clickbait")
               for i in range(10)]
            + [prediction(f"c{i}", style="clickbait") for i in range(5)]
        )

    def test_rows_in_table_order(self):
        rows = evaluate_per_style(self.records)
        self.assertEqual(list(rows), ["original", "clickbait", "formal"])
        self.assertAlmostEqual(rows["original"].accuracy, 0.9)
        self.assertAlmostEqual(rows["formal"].accuracy, 0.4)
        self.assertEqual(rows["clickbait"].support, 5)

    def test_degradation(self):
        drops = degradation(evaluate_per_style(self.records))
        self.assertAlmostEqual(drops["original"], 0.0)
        self.assertAlmostEqual(drops["formal"], 0.5)
        self.assertAlmostEqual(drops["clickbait"], -0.1)

    def test_degradation_without_original(self):
        rows = evaluate_per_style([prediction("f1")])
        self.assertEqual(degradation(rows), {})

    def test_by_classifier(self):
        records = [prediction("a", classifier="roberta"), prediction("b", classifier="deberta", predicted="non-clickbait")]
        tables = evaluate_by_classifier(records)
        self.assertEqual(list(tables), ["deberta", "roberta"])
        self.assertAlmostEqual(tables["deberta"]["formal"].accuracy, 0.0)

    def test_empty(self):
        with self.assertRaises(EmptyInput):
            evaluate_per_style([])


class TestFraming(unittest.TestCase):
    """Tests for the join and the framing split."""

    def test_join(self):
        predictions = [prediction("h1", style="original"), prediction("h1:p1:formal"), prediction("h2:p4:formal")]
        records = [cg_record("h1:p1:formal", 1.0, 0.5), cg_record("h9:p9:humor", 0.5, 0.5, style="humor")]
        result = join_predictions(predictions, records)
        self.assertEqual([p.text_id for p, _ in result.joined], ["h1:p1:formal"])
        self.assertEqual(result.unmatched_predictions, 2)
        self.assertEqual(result.unmatched_records, 1)

    def test_zero_delta_is_highest(self):
        groups = group_by_framing([cg_record("a", 0.5, 0.5), cg_record("b", 0.25, 0.75)])
        self.assertEqual([r.text_id for r in groups["Highest"]], ["a"])
        self.assertEqual([r.text_id for r in groups["Lowest"]], ["b"])

    def test_group_accuracies(self):
        joined = []
        for i in range(10_000):
            record = cg_record(f"pos{i}", 1.0, 0.5)
            joined.append((prediction(record.text_id, predicted="clickbait" if i < 6937 else "non-clickbait"), record))
        for i in range(10_000):
            record = cg_record(f"neg{i}", 0.5, 1.0)
            joined.append((prediction(record.text_id, predicted="clickbait" if i < 7272 else "non-clickbait"), record))
        rows = split_by_framing(joined)
        self.assertEqual(list(rows), ["Lowest", "Highest"])
        self.assertAlmostEqual(rows["Lowest"].accuracy, 0.7272)
        self.assertAlmostEqual(rows["Highest"].accuracy, 0.6937)
        self.assertLessEqual(abs(rows["Lowest"].f1 - 0.8420), TRUNCATED_F1_TOLERANCE)
        self.assertAlmostEqual(rows["Lowest"].f1, 2 * 0.7272 / 1.7272, places=12)
        self.assertLessEqual(abs(rows["Highest"].f1 - 0.8192), F1_TOLERANCE)

    def test_empty_group_absent(self):
        record = cg_record("x", 1.0, 0.0)
        rows = split_by_framing([(prediction("x"), record)])
        self.assertEqual(list(rows), ["Highest"])

    def test_per_classifier(self):
        record = cg_record("x", 0.0, 1.0)
        joined = [(prediction("x", classifier="roberta"), record), (prediction("x", classifier="deberta"), record)]
        tables = split_by_framing_per_classifier(joined)
        self.assertEqual(list(tables), ["deberta", "roberta"])
        self.assertEqual(list(tables["roberta"]), ["Lowest"])


class TestStyleDistribution(unittest.TestCase):
    """Tests for style_distribution."""

    def test_known_split(self):
        group = ["clickbait"] * 68 + ["formal"] * 29 + ["humor"] * 3
        dist = style_distribution(group)
        self.assertEqual(dict(dist), {"clickbait": 68.0, "formal": 29.0, "humor": 3.0})

    def test_records_with_style_attribute(self):
        dist = style_distribution([cg_record("a", 1, 0, style="casual"), cg_record("b", 1, 0, style="neutral")])
        self.assertEqual(list(dist), ["neutral", "casual"])

    def test_sums_to_hundred(self):
        rng = random.Random(12)
        styles = ["clickbait", "neutral", "formal", "casual", "inspirational", "humor"]
        for _ in range(200):
            group = [rng.choice(styles) for _ in range(rng.randint(1, 97))]
            dist = style_distribution(group)
            self.assertAlmostEqual(sum(dist.values()), 100.0, places=6)
            for value in dist.values():
                self.assertAlmostEqual(value * 10, round(value * 10))

    def test_remainder_tie_goes_to_table_order(self):
        dist = style_distribution(["humor", "formal", "clickbait"])
        self.assertEqual(dict(dist), {"clickbait": 33.4, "formal": 33.3, "humor": 33.3})

    def test_empty(self):
        with self.assertRaises(EmptyInput):
            style_distribution([])


class TestScore(unittest.TestCase):
    """score is confusion_counts followed by metrics_from_counts."""

    def test_all_correct(self):
        row = score([prediction("a"), prediction("b", truth="non-clickbait", predicted="non-clickbait")])
        self.assertEqual((row.accuracy, row.precision, row.recall, row.f1), (1.0, 1.0, 1.0, 1.0))


if __name__ == '__main__':
    unittest.main()
