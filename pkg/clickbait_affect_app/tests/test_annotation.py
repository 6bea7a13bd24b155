"""
Tests for emotion annotation and the emotion backends.
"""

import json
import os
import tempfile
import unittest
from unittest.mock import MagicMock, patch

import requests

from clickbait_affect_app.core.annotation import annotate, annotate_batch
from clickbait_affect_app.core.errors import (
    AggregateFailure,
    BackendUnavailable,
    EmptyText,
    OfflineViolation,
    TaxonomyMismatch,
)
from clickbait_affect_app.core.lexicon import DEFAULT_KEYWORDS_PATH, load_keyword_lexicon
from clickbait_affect_app.core.models import ErrorLedger
from clickbait_affect_app.core.taxonomy import DEFAULT_TAXONOMY, Taxonomy
from clickbait_affect_app.network.emotion import (
    EmotionBackend,
    FileEmotionBackend,
    HttpEmotionBackend,
    KeywordFallbackBackend,
    parse_scores,
)
from clickbait_affect_app.network.endpoint_guard import EndpointGuard
from clickbait_affect_app.utils.hashing import text_hash


class ScriptedBackend(EmotionBackend):
    """Fails whole batches larger than one item when a text contains "fail"."""

    backend_id = "scripted"
    model_id = "scripted-v1"

    def __init__(self, endpoint="local"):
        self.endpoint = endpoint
        self.calls = []

    def classify(self, texts, ids=None):
        self.calls.append(list(texts))
        if any("fail" in t for t in texts):
            if len(texts) > 1 or "always" in texts[0]:
                raise BackendUnavailable("scripted outage")
        return [{"joy": 0.8, "surprise": 0.1} if "happy" in t else {"neutral": 0.9} for t in texts]


class TestKeywordFallbackBackend(unittest.TestCase):
    """Tests for KeywordFallbackBackend."""

    def setUp(self):
        self.backend = KeywordFallbackBackend(load_keyword_lexicon(DEFAULT_KEYWORDS_PATH))

    def test_keywords_map_to_labels(self):
        scores = self.backend.scores_for("A SHOCKING secret, lol")
        self.assertEqual(scores, {"surprise": 1.0, "curiosity": 1.0, "amusement": 1.0})

    def test_no_keyword_is_neutral(self):
        self.assertEqual(self.backend.scores_for("The committee met on Tuesday"), {"neutral": 1.0})

    def test_model_id_carries_version(self):
        self.assertEqual(KeywordFallbackBackend({}, version="2").model_id, "keywords-2")


class TestParseScores(unittest.TestCase):
    """Tests for parse_scores."""

    def test_results_mapping(self):
        self.assertEqual(parse_scores({"results": [{"joy": 0.5}]}), [{"joy": 0.5}])

    def test_pipeline_style_lists(self):
        payload = [[{"label": "joy", "score": 0.7}, {"label": "fear", "score": 0.1}]]
        self.assertEqual(parse_scores(payload), [{"joy": 0.7, "fear": 0.1}])

    def test_unexpected_shape(self):
        with self.assertRaises(BackendUnavailable):
            parse_scores({"error": "model loading"})
        with self.assertRaises(BackendUnavailable):
            parse_scores(["joy"])


class TestHttpEmotionBackend(unittest.TestCase):
    """Tests for HttpEmotionBackend with a mocked session."""

    def setUp(self):
        self.backend = HttpEmotionBackend("http://localhost:9000/classify", max_retries=0)

    def test_classify(self):
        response = MagicMock()
        response.json.return_value = {"results": [{"joy": 0.9}, {"anger": 0.4}]}
        with patch.object(self.backend.session, "post", return_value=response) as mock_post:
            scores = self.backend.classify(["yay", "grr"])
        self.assertEqual(scores, [{"joy": 0.9}, {"anger": 0.4}])
        body = mock_post.call_args.kwargs["json"]
        self.assertEqual(body["inputs"], ["yay", "grr"])

    def test_transport_error(self):
        with patch.object(self.backend.session, "post", side_effect=requests.ConnectionError("refused")):
            with self.assertRaises(BackendUnavailable):
                self.backend.classify(["text"])

    def test_result_count_mismatch(self):
        response = MagicMock()
        response.json.return_value = [{"joy": 0.9}]
        with patch.object(self.backend.session, "post", return_value=response):
            with self.assertRaises(BackendUnavailable):
                self.backend.classify(["one", "two"])


class TestFileEmotionBackend(unittest.TestCase):
    """Tests for FileEmotionBackend."""

    def test_lookup_by_id_and_hash(self):
        with tempfile.TemporaryDirectory() as temp_dir:
            path = os.path.join(temp_dir, "scores.jsonl")
            with open(path, "w", encoding="utf-8") as f:
                f.write(json.dumps({"text_id": "p1", "scores": {"joy": 0.6}}) + "\n")
                f.write(json.dumps({"text_hash": text_hash("hello"), "scores": {"fear": 0.2}}) + "\n")
            backend = FileEmotionBackend(path)
            self.assertEqual(backend.classify(["x", "hello"], ids=["p1", "p2"]), [{"joy": 0.6}, {"fear": 0.2}])
            with self.assertRaises(BackendUnavailable):
                backend.classify(["missing"], ids=["p9"])


class TestAnnotate(unittest.TestCase):
    """Tests for annotate."""

    def test_single_text(self):
        record = annotate("so happy", ScriptedBackend(), DEFAULT_TAXONOMY, text_id="p1")
        self.assertEqual(record.text_id, "p1")
        self.assertEqual(record.backend_id, "scripted")
        self.assertEqual(record.taxonomy, DEFAULT_TAXONOMY.name)
        self.assertAlmostEqual(record.distribution.weights["joy"], 0.8)

    def test_scores_are_not_normalized(self):
        record = annotate("so happy", ScriptedBackend(), DEFAULT_TAXONOMY)
        self.assertAlmostEqual(record.distribution.total(), 0.9)

    def test_empty_text(self):
        backend = ScriptedBackend()
        with self.assertRaises(EmptyText):
            annotate("  ", backend, DEFAULT_TAXONOMY)
        self.assertEqual(backend.calls, [])

    def test_backend_taxonomy_mismatch(self):
        backend = ScriptedBackend()
        backend.taxonomy_name = "ekman-7"
        with self.assertRaises(TaxonomyMismatch):
            annotate("text", backend, DEFAULT_TAXONOMY)

    def test_label_outside_taxonomy(self):
        small = Taxonomy(name=DEFAULT_TAXONOMY.name, labels=("neutral",))
        with self.assertRaises(TaxonomyMismatch):
            annotate("happy day", ScriptedBackend(), small)

    def test_offline_guard(self):
        backend = ScriptedBackend(endpoint="http://localhost:9000/classify")
        with self.assertRaises(OfflineViolation):
            annotate("text", backend, DEFAULT_TAXONOMY, guard=EndpointGuard(offline=True))
        self.assertEqual(backend.calls, [])


class TestAnnotateBatch(unittest.TestCase):
    """Tests for annotate_batch."""

    def test_order_and_batching(self):
        backend = ScriptedBackend()
        records = annotate_batch(["happy a", "b", "happy c"], backend, 2, DEFAULT_TAXONOMY,
                                 ids=["p1", "p2", "p3"], max_in_flight=2)
        self.assertEqual([r.text_id for r in records], ["p1", "p2", "p3"])
        self.assertEqual(len(backend.calls), 2)
        self.assertEqual(records[1].distribution.top_label(), "neutral")

    def test_empty_input(self):
        self.assertEqual(annotate_batch([], ScriptedBackend(), 4, DEFAULT_TAXONOMY), [])

    def test_without_ledger_first_failure_raises(self):
        with self.assertRaises(EmptyText):
            annotate_batch(["ok", ""], ScriptedBackend(), 4, DEFAULT_TAXONOMY)
        with self.assertRaises(BackendUnavailable):
            annotate_batch(["ok", "fail"], ScriptedBackend(), 4, DEFAULT_TAXONOMY)

    def test_failed_batch_retried_item_by_item(self):
        ledger = ErrorLedger()
        backend = ScriptedBackend()
        records = annotate_batch(["happy", "fail once", "fail always", ""], backend, 4, DEFAULT_TAXONOMY,
                                 ids=["p1", "p2", "p3", "p4"], ledger=ledger)
        self.assertEqual([r.text_id for r in records], ["p1", "p2"])
        self.assertEqual([(e.item_id, e.error_type) for e in ledger],
                         [("p3", "BackendUnavailable"), ("p4", "EmptyText")])

    def test_all_failed(self):
        with self.assertRaises(AggregateFailure) as ctx:
            annotate_batch(["fail always"], ScriptedBackend(), 4, DEFAULT_TAXONOMY, ledger=ErrorLedger())
        self.assertEqual(len(ctx.exception.ledger), 1)

    def test_offline_violation_not_recorded(self):
        backend = ScriptedBackend(endpoint="http://localhost:9000/classify")
        with self.assertRaises(OfflineViolation):
            annotate_batch(["a"], backend, 4, DEFAULT_TAXONOMY,
                           guard=EndpointGuard(offline=True), ledger=ErrorLedger())


if __name__ == '__main__':
    unittest.main()
