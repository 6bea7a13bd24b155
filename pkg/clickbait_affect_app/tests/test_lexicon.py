"""
Tests for the lexicon and taxonomy loaders.

Tests the file formats, the closure checks against the taxonomy and the
bundled data files.
"""

import os
import tempfile
import unittest

from clickbait_affect_app.core.errors import OutOfRange, ParseError, TaxonomyMismatch, UnknownStyle
from clickbait_affect_app.core.lexicon import (
    DEFAULT_KEYWORDS_PATH,
    DEFAULT_LEXICON_PATH,
    DEFAULT_TAXONOMY_PATH,
    load_keyword_lexicon,
    load_lexicon,
)
from clickbait_affect_app.core.models import VadVector
from clickbait_affect_app.core.taxonomy import (
    DEFAULT_TAXONOMY,
    TABLE_ORDER,
    Taxonomy,
    get_all_style_names,
    get_style,
    load_taxonomy,
    style_rank,
)


class TempFileMixin:
    """Writes throwaway files under a temporary directory."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def write(self, name, content):
        path = os.path.join(self.temp_dir.name, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(content)
        return path


class TestLoadLexicon(TempFileMixin, unittest.TestCase):
    """Tests for load_lexicon."""

    TAXONOMY = Taxonomy("tiny", ("joy", "fear"))

    def test_load(self):
        path = self.write("lex.tsv", "# taxonomy=tiny version=3\njoy\t0.9\t0.7\t0.6\nfear,0.1,0.8,0.2\n")
        lex = load_lexicon(path, self.TAXONOMY)
        self.assertEqual(lex.version, "3")
        self.assertEqual(lex["fear"], VadVector(0.1, 0.8, 0.2))

    def test_missing_header(self):
        path = self.write("lex.tsv", "joy 0.9 0.7 0.6\n")
        with self.assertRaises(ParseError):
            load_lexicon(path)

    def test_duplicate_label_names_line(self):
        path = self.write("lex.tsv", "# taxonomy=tiny version=1\njoy 0.9 0.7 0.6\njoy 0.1 0.1 0.1\n")
        with self.assertRaises(ParseError) as ctx:
            load_lexicon(path)
        self.assertIn("3", str(ctx.exception))

    def test_coordinate_out_of_range(self):
        path = self.write("lex.tsv", "# taxonomy=tiny version=1\njoy 1.2 0.7 0.6\nfear 0.1 0.8 0.2\n")
        with self.assertRaises(OutOfRange):
            load_lexicon(path)

    def test_not_closed_over_taxonomy(self):
        path = self.write("lex.tsv", "# taxonomy=tiny version=1\njoy 0.9 0.7 0.6\n")
        with self.assertRaises(TaxonomyMismatch):
            load_lexicon(path, self.TAXONOMY)

    def test_labels_outside_taxonomy_are_dropped(self):
        path = self.write("lex.tsv", "# taxonomy=tiny version=1\njoy 0.9 0.7 0.6\nfear 0.1 0.8 0.2\nbliss 1 1 1\n")
        with self.assertLogs("clickbait_affect_app.core.lexicon", level="WARNING"):
            lex = load_lexicon(path, self.TAXONOMY)
        self.assertEqual(lex.labels, ["fear", "joy"])
        self.assertEqual(lex.version, "1")
        self.assertEqual(len(load_lexicon(path)), 3)

    def test_other_taxonomy(self):
        path = self.write("lex.tsv", "# taxonomy=other version=1\njoy 0.9 0.7 0.6\nfear 0.1 0.8 0.2\n")
        with self.assertRaises(TaxonomyMismatch):
            load_lexicon(path, self.TAXONOMY)


class TestKeywordLexicon(TempFileMixin, unittest.TestCase):
    """Tests for load_keyword_lexicon."""

    def test_load(self):
        path = self.write("kw.tsv", "# comment\nHappy\tjoy\nscary fear\n")
        self.assertEqual(load_keyword_lexicon(path), {"happy": "joy", "scary": "fear"})

    def test_label_outside_taxonomy(self):
        path = self.write("kw.tsv", "happy\tbliss\n")
        with self.assertRaises(TaxonomyMismatch):
            load_keyword_lexicon(path, DEFAULT_TAXONOMY)

    def test_conflicting_token(self):
        path = self.write("kw.tsv", "happy joy\nhappy relief\n")
        with self.assertRaises(ParseError):
            load_keyword_lexicon(path)


class TestTaxonomy(TempFileMixin, unittest.TestCase):
    """Tests for the taxonomy file and the style vocabulary."""

    def test_load(self):
        path = self.write("tax.txt", "# taxonomy: tiny\njoy\nfear\n")
        taxonomy = load_taxonomy(path)
        self.assertEqual(taxonomy.name, "tiny")
        self.assertEqual(taxonomy.labels, ("joy", "fear"))

    def test_duplicate(self):
        path = self.write("tax.txt", "# taxonomy: tiny\njoy\njoy\n")
        with self.assertRaises(ParseError):
            load_taxonomy(path)

    def test_styles(self):
        self.assertEqual(get_all_style_names(), list(TABLE_ORDER[1:]))
        self.assertEqual(get_style(" Formal ").value, "formal")
        with self.assertRaises(UnknownStyle):
            get_style("poetic")

    def test_style_rank_table_order(self):
        names = ["humor", "original", "formal", "clickbait", "zzz"]
        self.assertEqual(sorted(names, key=style_rank), ["original", "clickbait", "formal", "humor", "zzz"])


class TestBundledData(unittest.TestCase):
    """The bundled taxonomy, lexicon and keyword files are mutually consistent."""

    def test_taxonomy(self):
        taxonomy = load_taxonomy(DEFAULT_TAXONOMY_PATH)
        self.assertEqual(taxonomy, DEFAULT_TAXONOMY)
        self.assertEqual(len(taxonomy), 28)

    def test_lexicon_covers_taxonomy(self):
        lex = load_lexicon(DEFAULT_LEXICON_PATH, DEFAULT_TAXONOMY)
        self.assertEqual(len(lex), 28)
        self.assertEqual(lex.taxonomy_name, "goemotions-28")

    def test_keywords_inside_taxonomy(self):
        keywords = load_keyword_lexicon(DEFAULT_KEYWORDS_PATH, DEFAULT_TAXONOMY)
        self.assertEqual(keywords["shocking"], "surprise")
        self.assertEqual(keywords["grateful"], "gratitude")


if __name__ == '__main__':
    unittest.main()
