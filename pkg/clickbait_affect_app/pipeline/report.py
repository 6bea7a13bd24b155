"""
Report bundle writer.

Builds the tables, distribution chart and alignment summary of a completed run
under ``<output_dir>/report/``. Everything written here is a pure function of
the evaluate checkpoint and the run versions, so two runs with the same inputs
and configuration produce byte-identical bundles. Timings and host facts stay in
the run manifest.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ..core.config import PipelineConfig
from ..core.errors import IncompleteRun
from ..core.models import AlignmentReport
from ..core.taxonomy import TABLE_ORDER
from ..storage.records import file_hash
from ..utils.hashing import content_hash
from .runner import STAGE_ORDER
from .state import PipelineState

logger = logging.getLogger(__name__)

PER_STYLE_TABLE = "table_per_style.csv"
FRAMING_TABLE = "table_framing.csv"
DISTRIBUTION_JSON = "style_distribution.json"
DISTRIBUTION_PNG = "style_distribution.png"
ALIGNMENT_RANGE = "alignment_range.txt"
REPORT_MANIFEST = "report_manifest.json"

METRIC_COLUMNS = ("support", "accuracy", "precision", "recall", "f1", "misclassification")
PER_STYLE_COLUMNS = ("classifier", "style") + METRIC_COLUMNS + ("degradation", "degenerate_precision", "degenerate_recall")
FRAMING_COLUMNS = ("classifier", "group") + METRIC_COLUMNS + ("degenerate_precision", "degenerate_recall")


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def _write_table(path: Path, columns: Sequence[str], rows: List[dict], key_map: Dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _fmt(row.get(key_map.get(c, c))) for c in columns})


def _plot_distribution(path: Path, distribution: List[dict]) -> None:
    """Grouped bars: one group per framing class, one bar per style."""
    styles = [s for s in TABLE_ORDER if any(s in g["percentages"] for g in distribution)]
    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.8 / max(len(distribution), 1)
    for offset, group in enumerate(distribution):
        positions = [i + offset * width for i in range(len(styles))]
        values = [group["percentages"].get(s, 0.0) for s in styles]
        ax.bar(positions, values, width=width, label=f"{group['group']} (n={group['count']})")
    ax.set_xticks([i + width * (len(distribution) - 1) / 2 for i in range(len(styles))])
    ax.set_xticklabels(styles)
    ax.set_ylabel("% of styled texts")
    ax.set_ylim(0, 100)
    ax.set_title("Style distribution per framing group")
    if distribution:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="png", dpi=100, metadata={"Software": None})
    plt.close(fig)


def _stable_artifacts(state: PipelineState) -> Dict[str, Dict[str, str]]:
    """
    Artifact hashes per stage, with the variant file replaced by a hash of its
    ids and texts (variants carry generation timestamps).
    """
    stages = {name: state.manifest.stage(name).get("artifacts", {}) for name in STAGE_ORDER}
    variants = state.store("stylize", "variants")
    if "variants" in stages.get("stylize", {}):
        stages["stylize"] = dict(stages["stylize"])
        stages["stylize"]["variants"] = content_hash(
            [[r["variant_id"], r["style"], r["text"]] for r in variants.read()]
        )
    return stages


def emit_report(config: PipelineConfig, state: Optional[PipelineState] = None) -> Dict[str, str]:
    """
    Write the report bundle of a completed run.

    Returns:
        Dict[str, str]: sha256 of each written file

    Raises:
        IncompleteRun: The evaluate stage has not completed
    """
    state = state or PipelineState(config)
    if not state.manifest.is_complete("evaluate"):
        raise IncompleteRun("Stage 'evaluate' has not completed; run the pipeline first")

    per_style = state.store("evaluate", "per_style").read()
    framing = state.store("evaluate", "framing").read()
    distribution = state.store("evaluate", "style_distribution").read()
    summary = state.store("evaluate", "summary").read()[0]
    alignment = AlignmentReport.from_dict(summary["alignment"])

    out = state.report_dir
    out.mkdir(parents=True, exist_ok=True)
    _write_table(out / PER_STYLE_TABLE, PER_STYLE_COLUMNS, per_style, {"classifier": "classifier_id"})
    _write_table(out / FRAMING_TABLE, FRAMING_COLUMNS, framing, {"classifier": "classifier_id"})
    with open(out / DISTRIBUTION_JSON, "w", encoding="utf-8") as f:
        json.dump(distribution, f, indent=2)
        f.write("\n")
    _plot_distribution(out / DISTRIBUTION_PNG, distribution)
    with open(out / ALIGNMENT_RANGE, "w", encoding="utf-8") as f:
        f.write(f"{alignment.pair_count} aligned pairs, cosine similarity {alignment.describe()}\n")
        if alignment.mean_similarity is not None:
            f.write(f"mean {alignment.mean_similarity:.4f}, unmatched headlines {alignment.unmatched_headlines}\n")

    files = {
        name: file_hash(out / name)
        for name in (PER_STYLE_TABLE, FRAMING_TABLE, DISTRIBUTION_JSON, DISTRIBUTION_PNG, ALIGNMENT_RANGE)
    }
    bundle = {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "versions": state.manifest.get("versions", state.versions()),
        "stages": _stable_artifacts(state),
        "join": summary["join"],
        "files": files,
    }
    with open(out / REPORT_MANIFEST, "w", encoding="utf-8") as f:
        json.dump(bundle, f, indent=4, sort_keys=True)
        f.write("\n")
    files[REPORT_MANIFEST] = file_hash(out / REPORT_MANIFEST)
    logger.info("Report written to %s", out)
    return files
