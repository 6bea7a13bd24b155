"""
Tests for the storage layer.

Tests corpus ingestion, newline-delimited record files, the run manifest and
the append-only caches.
"""

import json
import os
import tempfile
import unittest
from pathlib import Path

from clickbait_affect_app.core.errors import MissingField, ParseError
from clickbait_affect_app.storage.cache import EmbeddingCache, GenerationCache
from clickbait_affect_app.storage.corpus import (
    FieldMapping,
    ingest_headlines,
    ingest_posts,
    load_predictions,
)
from clickbait_affect_app.storage.manifest import RunManifest
from clickbait_affect_app.storage.records import JsonlStore, dumps_record, file_hash


def write_lines(path, rows):
    with open(path, "w", encoding="utf-8") as f:
        for row in rows:
            f.write((row if isinstance(row, str) else json.dumps(row)) + "\n")


class StorageTestCase(unittest.TestCase):
    """Base class providing a temporary directory."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.root = Path(self.temp_dir.name)

    def tearDown(self):
        self.temp_dir.cleanup()


class TestIngestHeadlines(StorageTestCase):
    """Tests for ingest_headlines."""

    def test_default_mapping(self):
        path = self.root / "headlines.jsonl"
        write_lines(path, [
            {"id": "h1", "postText": ["You won't believe this"], "truthMean": 0.9},
            {"id": "h2", "postText": ["Council meets Tuesday"], "truthMean": 0.1},
        ])
        headlines = ingest_headlines(path)
        self.assertEqual([h.id for h in headlines], ["h1", "h2"])
        self.assertEqual(headlines[0].text, "You won't believe this")
        self.assertTrue(headlines[0].is_clickbait)
        self.assertFalse(headlines[1].is_clickbait)

    def test_clickbait_only_and_class_labels(self):
        path = self.root / "headlines.jsonl"
        write_lines(path, [
            {"uid": "a", "title": "Shocking!", "class": "clickbait"},
            {"uid": "b", "title": "Budget report", "class": "no-clickbait"},
        ])
        mapping = FieldMapping(id="uid", text="title", label="class")
        headlines = ingest_headlines(path, mapping, clickbait_only=True)
        self.assertEqual([h.id for h in headlines], ["a"])
        self.assertEqual(headlines[0].score, 1.0)

    def test_missing_field_reports_line(self):
        path = self.root / "headlines.jsonl"
        write_lines(path, [{"id": "h1", "postText": "ok", "truthMean": 1}, {"id": "h2", "truthMean": 1}])
        with self.assertRaises(MissingField) as ctx:
            ingest_headlines(path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_malformed_line(self):
        path = self.root / "headlines.jsonl"
        write_lines(path, [{"id": "h1", "postText": "ok", "truthMean": 1}, "{not json"])
        with self.assertRaises(ParseError) as ctx:
            ingest_headlines(path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_duplicate_id(self):
        path = self.root / "headlines.jsonl"
        row = {"id": "h1", "postText": "ok", "truthMean": 1}
        write_lines(path, [row, row])
        with self.assertRaises(ParseError):
            ingest_headlines(path)

    def test_bad_label(self):
        path = self.root / "headlines.jsonl"
        write_lines(path, [{"id": "h1", "postText": "ok", "truthMean": "maybe"}])
        with self.assertRaises(ParseError):
            ingest_headlines(path)

    def test_empty_text(self):
        path = self.root / "headlines.jsonl"
        write_lines(path, [{"id": "h1", "postText": ["  "], "truthMean": 1}])
        with self.assertRaises(ParseError):
            ingest_headlines(path)

    def test_unknown_mapping_key(self):
        with self.assertRaises(ValueError):
            FieldMapping.from_dict({"headline": "x"})


class TestIngestPosts(StorageTestCase):
    """Tests for ingest_posts."""

    def setUp(self):
        super().setUp()
        self.path = self.root / "posts.jsonl"
        write_lines(self.path, [
            {"id": "p1", "title": "My cat", "selftext": "", "subreddit": "cats"},
            {"id": "p2", "title": "  ", "selftext": "[removed]"},
            {"id": "p3", "title": "", "selftext": "Body only"},
            {"id": "p4", "title": "[deleted]", "selftext": "[deleted]"},
            {"id": "p5", "title": "Late post", "selftext": "text"},
        ])

    def test_validity_filter(self):
        posts, counts = ingest_posts(self.path)
        self.assertEqual([p.id for p in posts], ["p1", "p3", "p5"])
        self.assertEqual((counts.read, counts.kept), (5, 3))
        self.assertEqual(posts[0].source, "cats")
        self.assertEqual(posts[1].text, "Body only")

    def test_limit_applies_before_filter(self):
        posts, counts = ingest_posts(self.path, limit=4)
        self.assertEqual([p.id for p in posts], ["p1", "p3"])
        self.assertEqual(counts.to_dict(), {"read": 4, "kept": 2})

    def test_duplicate_id(self):
        write_lines(self.path, [{"id": "p1", "title": "a"}, {"id": "p1", "title": "b"}])
        with self.assertRaises(ParseError):
            ingest_posts(self.path)

    def test_missing_id(self):
        write_lines(self.path, [{"title": "a"}])
        with self.assertRaises(MissingField):
            ingest_posts(self.path)


class TestLoadPredictions(StorageTestCase):
    """Tests for load_predictions."""

    def test_load(self):
        path = self.root / "predictions.jsonl"
        write_lines(path, [{"text_id": "h1", "style": "Original", "true_label": "clickbait",
                            "predicted_label": "non-clickbait", "classifier_id": "roberta"}])
        predictions = load_predictions(path)
        self.assertEqual(predictions[0].style, "original")
        self.assertFalse(predictions[0].is_predicted_positive)

    def test_invalid_label(self):
        path = self.root / "predictions.jsonl"
        write_lines(path, [{"text_id": "h1", "style": "formal", "true_label": "yes",
                            "predicted_label": "clickbait", "classifier_id": "roberta"}])
        with self.assertRaises(ParseError) as ctx:
            load_predictions(path)
        self.assertEqual(ctx.exception.line_number, 1)

    def test_missing_field(self):
        path = self.root / "predictions.jsonl"
        write_lines(path, [{"text_id": "h1", "style": "formal"}])
        with self.assertRaises(MissingField):
            load_predictions(path)


class TestJsonlStore(StorageTestCase):
    """Tests for JsonlStore."""

    def test_write_returns_file_hash(self):
        store = JsonlStore(self.root / "sub" / "records.jsonl")
        digest = store.write([{"b": 1, "a": "ü"}, {"a": 2}])
        self.assertEqual(digest, file_hash(store.path))
        self.assertEqual(store.read(), [{"a": "ü", "b": 1}, {"a": 2}])
        with open(store.path, "r", encoding="utf-8") as f:
            self.assertEqual(f.readline().strip(), dumps_record({"a": "ü", "b": 1}))

    def test_rewrite_is_deterministic(self):
        store = JsonlStore(self.root / "records.jsonl")
        first = store.write([{"x": 1.5, "y": [1, 2]}])
        second = store.write([{"y": [1, 2], "x": 1.5}])
        self.assertEqual(first, second)
        self.assertEqual(os.listdir(self.root), ["records.jsonl"])

    def test_append_and_lenient_read(self):
        store = JsonlStore(self.root / "cache.jsonl")
        store.append({"key": "a"})
        with open(store.path, "a", encoding="utf-8") as f:
            f.write('{"key": "torn')
        self.assertEqual(store.read(strict=False), [{"key": "a"}])
        with self.assertRaises(ParseError):
            store.read()

    def test_append_after_torn_line_starts_new_line(self):
        store = JsonlStore(self.root / "cache.jsonl")
        store.append({"key": "a"})
        with open(store.path, "a", encoding="utf-8") as f:
            f.write('{"key": "torn')
        store.append({"key": "b"})
        self.assertEqual(store.read(strict=False), [{"key": "a"}, {"key": "b"}])
        with self.assertRaises(ParseError) as ctx:
            store.read()
        self.assertEqual(ctx.exception.line_number, 2)

    def test_missing_file(self):
        store = JsonlStore(self.root / "missing.jsonl")
        self.assertFalse(store.exists())
        self.assertEqual(store.read(), [])
        self.assertIsNone(store.content_hash())


class TestRunManifest(StorageTestCase):
    """Tests for RunManifest."""

    def test_stage_round_trip(self):
        path = self.root / "run_manifest.json"
        manifest = RunManifest(path)
        manifest.load()
        manifest.set("seed", 7)
        manifest.set_stage("ingest", {"status": "complete", "artifacts": {"headlines": "abc"}})

        reloaded = RunManifest(path)
        reloaded.load()
        self.assertEqual(reloaded.get("seed"), 7)
        self.assertTrue(reloaded.is_complete("ingest"))
        self.assertFalse(reloaded.is_complete("embed"))
        self.assertEqual(reloaded.stage("ingest")["artifacts"], {"headlines": "abc"})

    def test_clear_stage(self):
        manifest = RunManifest(self.root / "run_manifest.json")
        manifest.set_stage("align", {"status": "failed"})
        self.assertTrue(manifest.clear_stage("align"))
        self.assertFalse(manifest.clear_stage("align"))
        self.assertEqual(manifest.stage("align"), {})

    def test_corrupted_file_starts_empty(self):
        path = self.root / "run_manifest.json"
        path.write_text("{broken", encoding="utf-8")
        manifest = RunManifest(path)
        self.assertEqual(manifest.load(), {})

    def test_update(self):
        manifest = RunManifest(self.root / "run_manifest.json")
        manifest.update({"a": 1, "b": 2}, auto_save=False)
        self.assertFalse(manifest.path.exists())
        self.assertTrue(manifest.save())
        self.assertEqual(json.loads(manifest.path.read_text(encoding="utf-8")), {"a": 1, "b": 2})


class TestCaches(StorageTestCase):
    """Tests for GenerationCache and EmbeddingCache."""

    def test_generation_cache_put_once(self):
        cache = GenerationCache(self.root / "generation.jsonl")
        key = GenerationCache.make_key("v1", "formal", "m", {"temperature": 0.0}, "text")
        self.assertIsNone(cache.get(key))
        self.assertTrue(cache.put(key, "formal", '"raw"', "raw", {"model_id": "m"}))
        self.assertFalse(cache.put(key, "formal", "other", "other", {}))
        self.assertEqual(cache.get(key)["text"], "raw")
        self.assertIn(key, cache)
        self.assertEqual(len(GenerationCache(self.root / "generation.jsonl")), 1)

    def test_generation_key_inputs(self):
        base = GenerationCache.make_key("v1", "formal", "m", {"temperature": 0.0}, "text")
        self.assertNotEqual(base, GenerationCache.make_key("v2", "formal", "m", {"temperature": 0.0}, "text"))
        self.assertNotEqual(base, GenerationCache.make_key("v1", "humor", "m", {"temperature": 0.0}, "text"))
        self.assertNotEqual(base, GenerationCache.make_key("v1", "formal", "m", {"temperature": 0.5}, "text"))
        self.assertNotEqual(base, GenerationCache.make_key("v1", "formal", "m", {"temperature": 0.0}, "other"))

    def test_embedding_cache(self):
        path = self.root / "embeddings.jsonl"
        cache = EmbeddingCache(path)
        cache.put("hash", "hash-8", "hello", [1.0, 2.0])
        self.assertEqual(EmbeddingCache(path).get("hash", "hash-8", "hello"), [1.0, 2.0])
        self.assertIsNone(cache.get("hash", "hash-16", "hello"))

    def test_torn_last_line_is_ignored(self):
        path = self.root / "embeddings.jsonl"
        EmbeddingCache(path).put("hash", "m", "a", [1.0])
        with open(path, "a", encoding="utf-8") as f:
            f.write('{"key": "x", "vec')
        cache = EmbeddingCache(path)
        self.assertEqual(len(cache), 1)
        self.assertEqual(cache.get("hash", "m", "a"), [1.0])

        cache.put("hash", "m", "b", [2.0])
        reloaded = EmbeddingCache(path)
        self.assertEqual(len(reloaded), 2)
        self.assertEqual(reloaded.get("hash", "m", "b"), [2.0])


if __name__ == '__main__':
    unittest.main()
