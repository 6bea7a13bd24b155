"""
Tests for the command line application.
"""

import io
import json
import logging
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

from clickbait_affect_app.cli import create_parser, main

DESK_CONFIG = str(Path(__file__).resolve().parent.parent / "data" / "desk" / "config.json")


class TestCli(unittest.TestCase):
    """Tests for main()."""

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.output = str(Path(self.temp_dir.name) / "out")

    def tearDown(self):
        self.temp_dir.cleanup()
        logging.getLogger().setLevel(logging.WARNING)

    def invoke(self, *args):
        stdout, stderr = io.StringIO(), io.StringIO()
        argv = ["--config", DESK_CONFIG, "--output-dir", self.output, "--no-progress", "--log-level", "ERROR", *args]
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(argv)
        return code, stdout.getvalue(), stderr.getvalue()

    def test_parser_commands(self):
        parser = create_parser()
        args = parser.parse_args(["--offline", "attack-candidates", "--post-id", "p3", "--k", "2"])
        self.assertTrue(args.offline)
        self.assertEqual(args.post_id, "p3")
        self.assertEqual(args.k, 2)
        self.assertIsNone(parser.parse_args(["run"]).offline)

    def test_missing_command(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                create_parser().parse_args([])

    def test_stage_command_runs_upstream_stages(self):
        code, out, _ = self.invoke("align")
        self.assertEqual(code, 0)
        self.assertIn("ingest", out)
        self.assertIn("align", out)
        self.assertIn("network calls: 0", out)
        self.assertNotIn("stylize", out)

    def test_run_report_and_attack_candidates(self):
        code, out, _ = self.invoke("run")
        self.assertEqual(code, 0)
        self.assertIn("report:", out)

        code, out, _ = self.invoke("report")
        self.assertEqual(code, 0)
        self.assertIn("report_manifest.json", out)

        cg_path = Path(self.output) / "stages" / "score" / "cg_records.jsonl"
        with open(cg_path, "r", encoding="utf-8") as f:
            post_id = json.loads(f.readline())["post_id"]
        code, out, _ = self.invoke("attack-candidates", "--post-id", post_id, "--k", "2")
        self.assertEqual(code, 0)
        data = json.loads(out)
        self.assertEqual(data["post_id"], post_id)
        self.assertEqual(len(data["max_delta_cg"]), 2)

    def test_zero_k_fails(self):
        self.invoke("run")
        cg_path = Path(self.output) / "stages" / "score" / "cg_records.jsonl"
        with open(cg_path, "r", encoding="utf-8") as f:
            post_id = json.loads(f.readline())["post_id"]
        code, _, err = self.invoke("attack-candidates", "--post-id", post_id, "--k", "0")
        self.assertEqual(code, 1)
        self.assertIn("k must be >= 1", err)

    def test_unknown_post_fails(self):
        self.invoke("run")
        code, _, err = self.invoke("attack-candidates", "--post-id", "missing")
        self.assertEqual(code, 1)
        self.assertIn("error:", err)

    def test_report_before_run_fails(self):
        code, _, err = self.invoke("report")
        self.assertEqual(code, 1)
        self.assertIn("evaluate", err)

    def test_invalid_config_fails(self):
        bad = Path(self.temp_dir.name) / "bad.json"
        bad.write_text(json.dumps({"ranking": {"k": 0}}), encoding="utf-8")
        stderr = io.StringIO()
        with redirect_stdout(io.StringIO()), redirect_stderr(stderr):
            code = main(["--config", str(bad), "--no-progress", "--log-level", "ERROR", "run"])
        self.assertEqual(code, 1)
        self.assertIn("ranking.k", stderr.getvalue())


if __name__ == '__main__':
    unittest.main()
