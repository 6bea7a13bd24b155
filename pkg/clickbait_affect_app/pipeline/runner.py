"""
Stage runner with checkpointing and resume.

Stages run in a fixed order. Each one reads the checkpoints of the stages
before it from disk, writes its own records as JSONL under
``<output_dir>/stages/<stage>/`` and registers their hashes in the run
manifest. A stage is skipped when the manifest marks it complete, its input
fingerprint is unchanged and every artifact still hashes to the recorded
value; anything else makes it run again.
"""

import logging
import platform
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import psutil

from .. import __version__
from ..core.affect import map_emotion_to_vad, score_pair
from ..core.alignment import build_report, cosine_similarity, one_to_one_align, top1_align
from ..core.annotation import annotate_batch
from ..core.config import PipelineConfig
from ..core.errors import (
    AggregateFailure,
    EmptyCorpus,
    IncompleteRun,
    StageFailed,
    ToolkitError,
    UnknownPost,
)
from ..core.metrics import (
    degradation,
    evaluate_by_classifier,
    group_by_framing,
    join_predictions,
    split_by_framing_per_classifier,
    style_distribution,
)
from ..core.models import (
    AlignedPair,
    AlignmentReport,
    AnnotationRecord,
    CgRecord,
    EmbeddedRecord,
    ErrorLedger,
    HeadlineRecord,
    PostRecord,
    StyledVariant,
)
from ..core.ranking import CandidateInput, RankedCandidates, attack_candidates
from ..core.stylization import semantic_gate, stylize_corpus
from ..network.dispatcher import ProgressCallback
from ..network.embedding import embed_records
from ..storage.corpus import FieldMapping, ingest_headlines, ingest_posts, load_predictions
from ..storage.records import file_hash
from ..utils.hashing import content_hash, natural_key
from .state import PipelineState

logger = logging.getLogger(__name__)

STAGE_ORDER = ("ingest", "embed", "align", "stylize", "annotate", "score", "evaluate")

ERRORS_ARTIFACT = "errors"

StageOutput = Tuple[Dict[str, List[dict]], Dict[str, Any]]
StageCallback = Callable[[int, int, str], None]


# ==================== Checkpoint access ====================

def _read(state: PipelineState, stage: str, name: str, factory):
    if not state.manifest.is_complete(stage):
        raise IncompleteRun(f"Stage '{stage}' has not completed; run it first")
    return [factory(record) for record in state.store(stage, name).read()]


def _headlines(state: PipelineState) -> List[HeadlineRecord]:
    return _read(state, "ingest", "headlines", HeadlineRecord.from_dict)


def _posts(state: PipelineState) -> List[PostRecord]:
    return _read(state, "ingest", "posts", PostRecord.from_dict)


def _pairs(state: PipelineState) -> List[AlignedPair]:
    return _read(state, "align", "pairs", AlignedPair.from_dict)


def _variants(state: PipelineState) -> List[StyledVariant]:
    return _read(state, "stylize", "variants", StyledVariant.from_dict)


def _cg_records(state: PipelineState) -> List[CgRecord]:
    return _read(state, "score", "cg_records", CgRecord.from_dict)


def _embedding_kwargs(state: PipelineState) -> Dict[str, Any]:
    e = state.config.embedding
    return {
        "max_in_flight": e.max_in_flight,
        "rate_limit_per_sec": e.rate_limit_per_sec,
        "guard": state.guard,
        "cache": state.embedding_cache,
    }


# ==================== Stages ====================

def run_ingest(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    corpus = state.config.corpus
    if not corpus.headlines_path or not corpus.posts_path:
        raise EmptyCorpus("corpus.headlines_path and corpus.posts_path must be configured")
    headlines = ingest_headlines(
        corpus.headlines_path,
        FieldMapping.from_dict(corpus.headline_fields),
        clickbait_only=corpus.clickbait_only,
        threshold=corpus.label_threshold,
    )
    posts, post_counts = ingest_posts(
        corpus.posts_path,
        FieldMapping.from_dict(corpus.post_fields),
        limit=corpus.post_limit,
        removed_markers=corpus.removed_markers,
    )
    if not headlines:
        raise EmptyCorpus(f"No headlines kept from {corpus.headlines_path}")
    if not posts:
        raise EmptyCorpus(f"No valid posts kept from {corpus.posts_path}")
    counts = {"headlines": len(headlines), "posts_read": post_counts.read, "posts_kept": post_counts.kept}
    return {
        "headlines": [h.to_dict() for h in headlines],
        "posts": [p.to_dict() for p in posts],
    }, counts


def run_embed(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    backend = state.embedding_backend
    batch_size = state.config.embedding.batch_size
    kwargs = _embedding_kwargs(state)
    headlines = embed_records([(h.id, h.text) for h in _headlines(state)], backend, batch_size, callback=callback, **kwargs)
    posts = embed_records([(p.id, p.text) for p in _posts(state)], backend, batch_size, callback=callback, **kwargs)
    dims = {r.vector.dim for r in headlines + posts}
    return {
        "headline_embeddings": [r.to_dict() for r in headlines],
        "post_embeddings": [r.to_dict() for r in posts],
    }, {"headlines": len(headlines), "posts": len(posts), "dim": dims.pop() if len(dims) == 1 else None}


def run_align(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    cfg = state.config.alignment
    headlines = _read(state, "embed", "headline_embeddings", EmbeddedRecord.from_dict)
    posts = _read(state, "embed", "post_embeddings", EmbeddedRecord.from_dict)
    if cfg.mode == "one_to_one":
        pairs, report = one_to_one_align(headlines, posts, cfg.min_similarity, cfg.max_matrix_entries)
    else:
        pairs = top1_align(headlines, posts, cfg.max_matrix_entries)
        if cfg.min_similarity is not None:
            pairs = [p for p in pairs if p.similarity >= cfg.min_similarity]
        matched = {p.headline_id for p in pairs}
        unmatched = sorted((h.record_id for h in headlines if h.record_id not in matched), key=natural_key)
        report = build_report(pairs, unmatched)
    if not pairs:
        raise EmptyCorpus("Alignment produced no pairs")
    return {
        "pairs": [p.to_dict() for p in pairs],
        "report": [report.to_dict()],
    }, {"pairs": report.pair_count, "unmatched_headlines": report.unmatched_headlines}


def _stylize_sources(state: PipelineState) -> Dict[str, str]:
    """Source text per pair id (the headline, or the aligned post)."""
    pairs = _pairs(state)
    if state.config.generation.source == "post":
        posts = {p.id: p for p in _posts(state)}
        return {pair.pair_id: posts[pair.post_id].text for pair in pairs}
    headlines = {h.id: h for h in _headlines(state)}
    return {pair.pair_id: headlines[pair.headline_id].text for pair in pairs}


def run_stylize(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    cfg = state.config.generation
    sources = _stylize_sources(state)
    ledger = ErrorLedger()
    variants = stylize_corpus(
        sorted(sources.items(), key=lambda item: natural_key(item[0])),
        cfg.styles,
        state.generation_backend,
        state.decode_params,
        state.templates,
        cache=state.generation_cache,
        guard=state.guard,
        ledger=ledger,
        max_in_flight=cfg.max_in_flight,
        rate_limit_per_sec=cfg.rate_limit_per_sec,
        callback=callback,
    )
    if cfg.semantic_floor is not None:
        variants = semantic_gate(
            variants, sources, state.embedding_backend, cfg.semantic_floor,
            batch_size=state.config.embedding.batch_size, guard=state.guard, cache=state.embedding_cache,
        )
    counts = {
        "pairs": len(sources),
        "variants": len(variants),
        "failed": len(ledger),
        "flagged": sum(1 for v in variants if v.flagged),
    }
    return {
        "variants": [v.to_dict() for v in variants],
        ERRORS_ARTIFACT: ledger.to_list(),
    }, counts


def run_annotate(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    cfg = state.config.emotion
    posts = {p.id: p for p in _posts(state)}
    post_ids = sorted({pair.post_id for pair in _pairs(state)}, key=natural_key)
    variants = _variants(state)
    ledger = ErrorLedger()

    def run(ids: Sequence[str], texts: Sequence[str]) -> List[AnnotationRecord]:
        return annotate_batch(
            texts,
            state.emotion_backend,
            cfg.batch_size,
            state.taxonomy,
            ids=ids,
            guard=state.guard,
            ledger=ledger,
            max_in_flight=cfg.max_in_flight,
            rate_limit_per_sec=cfg.rate_limit_per_sec,
            callback=callback,
        )

    post_records = run(post_ids, [posts[i].text_for(cfg.post_text) for i in post_ids])
    variant_records = run([v.variant_id for v in variants], [v.text for v in variants])
    if not variant_records:
        raise AggregateFailure("No variant could be annotated", ledger)
    counts = {
        "posts": len(post_records),
        "variants": len(variant_records),
        "failed": len(ledger),
    }
    return {
        "post_annotations": [r.to_dict() for r in post_records],
        "variant_annotations": [r.to_dict() for r in variant_records],
        ERRORS_ARTIFACT: ledger.to_list(),
    }, counts


def run_score(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    cfg = state.config.affect
    pairs = {pair.pair_id: pair for pair in _pairs(state)}
    variants = _variants(state)
    post_dists = {r.text_id: r.distribution for r in _read(state, "annotate", "post_annotations", AnnotationRecord.from_dict)}
    variant_dists = {
        r.text_id: r.distribution for r in _read(state, "annotate", "variant_annotations", AnnotationRecord.from_dict)
    }
    ledger = ErrorLedger()
    stage = "score"

    post_vad = {}
    for post_id, dist in post_dists.items():
        try:
            post_vad[post_id] = map_emotion_to_vad(dist, state.lexicon, cfg.aggregation, cfg.floor)
        except ToolkitError as e:
            ledger.record(post_id, stage, e)

    records: List[CgRecord] = []
    scored: List[StyledVariant] = []
    for variant in variants:
        post_id = pairs[variant.source_pair_id].post_id
        dist = variant_dists.get(variant.variant_id)
        if dist is None or post_id not in post_vad:
            ledger.record(variant.variant_id, stage, IncompleteRun(f"No annotation for {variant.variant_id} or {post_id}"))
            continue
        try:
            comment_vad = map_emotion_to_vad(dist, state.lexicon, cfg.aggregation, cfg.floor)
        except ToolkitError as e:
            ledger.record(variant.variant_id, stage, e)
            continue
        records.append(score_pair(variant.variant_id, post_id, variant.style, post_vad[post_id], comment_vad))
        scored.append(variant)

    if not records:
        raise AggregateFailure("No variant could be scored", ledger)

    # Embeddings of the scored variants feed attack-candidate similarity
    embedded = embed_records(
        [(v.variant_id, v.text) for v in scored],
        state.embedding_backend,
        state.config.embedding.batch_size,
        callback=callback,
        **_embedding_kwargs(state),
    )
    counts = {
        "records": len(records),
        "positive": sum(1 for r in records if r.delta_cg >= 0),
        "failed": len(ledger),
    }
    return {
        "cg_records": [r.to_dict() for r in records],
        "variant_embeddings": [r.to_dict() for r in embedded],
        ERRORS_ARTIFACT: ledger.to_list(),
    }, counts


def run_evaluate(state: PipelineState, callback: Optional[ProgressCallback] = None) -> StageOutput:
    cg_records = _cg_records(state)
    report = AlignmentReport.from_dict(_read(state, "align", "report", dict)[0])

    distribution = []
    for group, members in group_by_framing(cg_records).items():
        if not members:
            continue
        distribution.append({
            "group": group,
            "count": len(members),
            "percentages": dict(style_distribution(members)),
        })

    per_style_rows: List[dict] = []
    framing_rows: List[dict] = []
    join_summary = {"predictions": 0, "joined": 0, "unmatched_predictions": 0, "unmatched_records": 0}
    predictions_path = state.config.corpus.predictions_path
    if predictions_path:
        predictions = load_predictions(predictions_path)
        if predictions:
            for classifier_id, per_style in evaluate_by_classifier(predictions).items():
                lost = degradation(per_style)
                for style, row in per_style.items():
                    per_style_rows.append(
                        {"classifier_id": classifier_id, "style": style, "degradation": lost.get(style), **row.to_dict()}
                    )
            joined = join_predictions(predictions, cg_records)
            for classifier_id, groups in split_by_framing_per_classifier(joined.joined).items():
                for group, row in groups.items():
                    framing_rows.append({"classifier_id": classifier_id, "group": group, **row.to_dict()})
            join_summary = {
                "predictions": len(predictions),
                "joined": len(joined.joined),
                "unmatched_predictions": joined.unmatched_predictions,
                "unmatched_records": joined.unmatched_records,
            }
    else:
        logger.info("No predictions configured; detector tables stay empty")

    return {
        "per_style": per_style_rows,
        "framing": framing_rows,
        "style_distribution": distribution,
        "summary": [{"alignment": report.to_dict(), "join": join_summary}],
    }, {"per_style_rows": len(per_style_rows), "framing_rows": len(framing_rows), **join_summary}


STAGES: Dict[str, Callable[[PipelineState, Optional[ProgressCallback]], StageOutput]] = {
    "ingest": run_ingest,
    "embed": run_embed,
    "align": run_align,
    "stylize": run_stylize,
    "annotate": run_annotate,
    "score": run_score,
    "evaluate": run_evaluate,
}


# ==================== Fingerprints and resume ====================

def _hash_or_none(path: Optional[str]) -> Optional[str]:
    return file_hash(path) if path else None


def _upstream_artifacts(state: PipelineState, stages: Sequence[str]) -> Dict[str, Any]:
    return {name: state.manifest.stage(name).get("artifacts", {}) for name in stages}


def stage_fingerprint(state: PipelineState, stage: str) -> str:
    """
    Hash of everything a stage's output depends on.

    Covers the relevant configuration sections, the seed, input file hashes,
    resource versions and the artifact hashes of the upstream stages.
    """
    config = state.config.semantic_dict()
    inputs: Dict[str, Any] = {"stage": stage, "toolkit": __version__}
    if stage == "ingest":
        inputs["corpus"] = {k: v for k, v in config["corpus"].items() if k != "predictions_path"}
        inputs["files"] = [_hash_or_none(state.config.corpus.headlines_path),
                           _hash_or_none(state.config.corpus.posts_path)]
    elif stage == "embed":
        inputs.update(embedding=config["embedding"], seed=state.config.seed)
        inputs["upstream"] = _upstream_artifacts(state, ["ingest"])
    elif stage == "align":
        inputs["alignment"] = config["alignment"]
        inputs["upstream"] = _upstream_artifacts(state, ["embed"])
    elif stage == "stylize":
        inputs["generation"] = config["generation"]
        inputs["templates"] = file_hash(state.templates_path)
        if state.config.generation.semantic_floor is not None:
            inputs.update(embedding=config["embedding"], seed=state.config.seed)
        inputs["upstream"] = _upstream_artifacts(state, ["ingest", "align"])
    elif stage == "annotate":
        inputs["emotion"] = config["emotion"]
        inputs["resources"] = [file_hash(state.taxonomy_path), file_hash(state.keywords_path)]
        inputs["upstream"] = _upstream_artifacts(state, ["ingest", "align", "stylize"])
    elif stage == "score":
        inputs.update(affect=config["affect"], embedding=config["embedding"], seed=state.config.seed)
        inputs["resources"] = [file_hash(state.lexicon_path)]
        inputs["upstream"] = _upstream_artifacts(state, ["align", "stylize", "annotate"])
    elif stage == "evaluate":
        inputs["predictions"] = _hash_or_none(state.config.corpus.predictions_path)
        inputs["upstream"] = _upstream_artifacts(state, ["align", "score"])
    return content_hash(inputs)


def is_stage_current(state: PipelineState, stage: str, fingerprint: str) -> bool:
    """True if the recorded checkpoint of ``stage`` can be reused as is."""
    entry = state.manifest.stage(stage)
    if entry.get("status") != "complete" or entry.get("fingerprint") != fingerprint:
        return False
    for name, expected in entry.get("artifacts", {}).items():
        actual = state.store(stage, name).content_hash()
        if actual != expected:
            logger.warning("Checkpoint %s/%s.jsonl does not match the manifest, re-running '%s'", stage, name, stage)
            return False
    return True


def run_stage(state: PipelineState, stage: str, callback: Optional[ProgressCallback] = None) -> bool:
    """
    Run one stage unless its checkpoint is current.

    Returns:
        bool: True if the stage ran, False if it was skipped

    Raises:
        StageFailed: The stage raised a toolkit error; the manifest marks it failed
    """
    fingerprint = stage_fingerprint(state, stage)
    if is_stage_current(state, stage, fingerprint):
        logger.info("Stage '%s' is up to date, skipping", stage)
        return False

    logger.info("Running stage '%s'", stage)
    # Downstream checkpoints become stale as soon as this stage reruns
    for later in STAGE_ORDER[STAGE_ORDER.index(stage) + 1:]:
        state.manifest.clear_stage(later, auto_save=False)
    state.manifest.clear_stage(stage)

    started = time.perf_counter()
    try:
        artifacts, counts = STAGES[stage](state, callback)
    except ToolkitError as e:
        state.manifest.set_stage(stage, {
            "status": "failed",
            "fingerprint": fingerprint,
            "error": f"{type(e).__name__}: {e}",
            "seconds": round(time.perf_counter() - started, 3),
        })
        if isinstance(e, AggregateFailure) and e.ledger is not None:
            state.store(stage, ERRORS_ARTIFACT).write(e.ledger.to_list())
        raise StageFailed(stage, e) from e

    hashes = {name: state.store(stage, name).write(records) for name, records in artifacts.items()}
    state.manifest.set_stage(stage, {
        "status": "complete",
        "fingerprint": fingerprint,
        "artifacts": hashes,
        "counts": counts,
        "seconds": round(time.perf_counter() - started, 3),
    })
    logger.info("Stage '%s' complete: %s", stage, counts)
    return True


def host_facts() -> Dict[str, Any]:
    """Machine facts recorded in the manifest (never in the report)."""
    return {
        "python": platform.python_version(),
        "platform": platform.platform(),
        "cpu_count": psutil.cpu_count(logical=True),
        "memory_total": psutil.virtual_memory().total,
    }


def run_pipeline(
    config: PipelineConfig,
    until: Optional[str] = None,
    callback: Optional[StageCallback] = None,
    state: Optional[PipelineState] = None,
) -> PipelineState:
    """
    Run every stage up to and including ``until`` (default: all).

    Args:
        config: Validated configuration
        until: Last stage to run
        callback: Called as ``callback(done, total, stage)`` after each stage
        state: Existing run state (tests inject backends through it)

    Returns:
        PipelineState: The run state, with its manifest saved

    Raises:
        ValueError: Unknown stage name
        StageFailed: A stage failed
    """
    if until is not None and until not in STAGE_ORDER:
        raise ValueError(f"Unknown stage '{until}'. Stages: {list(STAGE_ORDER)}")
    stages = STAGE_ORDER[:STAGE_ORDER.index(until) + 1] if until else STAGE_ORDER
    state = state or PipelineState(config)
    state.check_resources()
    state.manifest.update({
        "toolkit": __version__,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "offline": config.offline,
        "versions": state.versions(),
        "host": host_facts(),
    }, auto_save=False)

    try:
        for done, stage in enumerate(stages, start=1):
            ran = run_stage(state, stage)
            if callback:
                callback(done, len(stages), f"{stage} ({'ran' if ran else 'cached'})")
    finally:
        state.manifest.update({
            "call_log": state.guard.call_log(),
            "network_calls": state.guard.network_calls(),
        })
    return state


# ==================== Queries ====================

def find_attack_candidates(
    config: PipelineConfig,
    post_id: str,
    k: Optional[int] = None,
    state: Optional[PipelineState] = None,
) -> RankedCandidates:
    """
    Rank the scored variants of a completed run for injection into one post.

    The pool is every variant that was scored; each is compared against the
    VAD point and the embedding of the target post.

    Raises:
        IncompleteRun: The score stage has not completed
        UnknownPost: The post was not annotated in this run
        NoCandidates: No variant reaches the similarity floor
    """
    state = state or PipelineState(config)
    cg_records = _cg_records(state)
    post_vad = next((r.post_vad for r in cg_records if r.post_id == post_id), None)
    if post_vad is None:
        raise UnknownPost(f"Post '{post_id}' has no VAD point in this run")

    post_vectors = {
        r.record_id: r.vector for r in _read(state, "embed", "post_embeddings", EmbeddedRecord.from_dict)
    }
    variant_vectors = {
        r.record_id: r.vector for r in _read(state, "score", "variant_embeddings", EmbeddedRecord.from_dict)
    }
    variants = {v.variant_id: v for v in _variants(state)}
    target = post_vectors[post_id]
    pool = [
        CandidateInput(
            variant=variants[r.text_id],
            comment_vad=r.comment_vad,
            similarity=cosine_similarity(variant_vectors[r.text_id], target),
        )
        for r in cg_records
        if r.text_id in variants and r.text_id in variant_vectors
    ]
    ranking = state.config.ranking
    return attack_candidates(post_id, post_vad, pool, ranking.k if k is None else k, ranking.similarity_floor)
