"""
Stylistic rewrites of aligned texts.

Prompts come from a versioned template file rendered with Jinja2; generations
go through a pluggable chat backend and a content-addressed cache, so a given
(template version, style, model, decode params, source text) is generated at
most once.
"""

import json
import logging
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from jinja2 import Environment, StrictUndefined, Template, TemplateError

from ..network.dispatcher import BatchDispatcher, ProgressCallback
from ..network.embedding import EmbeddingBackend, embed_batch
from ..network.endpoint_guard import EndpointGuard
from ..network.generation import GenerationBackend, Messages, estimate_tokens
from ..storage.cache import EmbeddingCache, GenerationCache
from ..utils.hashing import content_hash, natural_key
from .alignment import cosine_similarity
from .errors import (
    AggregateFailure,
    ContextOverflow,
    EmptyGeneration,
    EmptyInput,
    EmptyText,
    OfflineViolation,
    ParseError,
    TemplateMissing,
)
from .lexicon import DATA_DIR
from .models import DecodeParams, ErrorLedger, StyledVariant
from .taxonomy import StyleLabel, get_style, style_rank

logger = logging.getLogger(__name__)

DEFAULT_TEMPLATES_PATH = DATA_DIR / "templates" / "stylize_v1.json"

STAGE = "stylize"

_QUOTE_PAIRS = {'"': '"', "'": "'", "“": "”", "‘": "’", "«": "»", "`": "`"}
_WHITESPACE = re.compile(r"\s+")

_ENV = Environment(undefined=StrictUndefined, autoescape=False, keep_trailing_newline=False)


@dataclass(frozen=True)
class TemplateSet:
    """
    Versioned prompt templates.

    Attributes:
        version: Template version recorded on every variant
        system: System message
        user: Jinja2 source of the user message (``instruction``, ``source_text``)
        styles: Style instruction per style label
    """
    version: str
    system: str
    user: str
    styles: Dict[str, str]

    @property
    def user_template(self) -> Template:
        return _ENV.from_string(self.user)

    def instruction(self, style: Union[str, StyleLabel]) -> str:
        style = get_style(style)
        if style.value not in self.styles:
            raise TemplateMissing(f"Templates {self.version} have no entry for style '{style.value}'")
        return self.styles[style.value]


def load_templates(path: Union[str, Path, None] = None) -> TemplateSet:
    """
    Load a template file (bundled ``stylize_v1.json`` by default).

    Raises:
        ParseError: Unreadable file or missing keys
    """
    path = Path(path) if path else DEFAULT_TEMPLATES_PATH
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        templates = TemplateSet(
            version=str(data["version"]),
            system=str(data["system"]),
            user=str(data["user"]),
            styles={str(k).lower(): str(v) for k, v in data["styles"].items()},
        )
        _ENV.from_string(templates.user)
    except (OSError, json.JSONDecodeError, KeyError, TemplateError) as e:
        raise ParseError(f"Invalid template file: {e}", str(path)) from None
    return templates


def render_messages(source_text: str, style: Union[str, StyleLabel], templates: TemplateSet) -> Messages:
    """
    Chat messages asking for ``source_text`` rewritten in ``style``.

    Raises:
        EmptyText: Blank source
        UnknownStyle: Style outside the closed set
        TemplateMissing: No template entry for the style
    """
    if not source_text or not source_text.strip():
        raise EmptyText("Cannot stylize an empty text")
    instruction = templates.instruction(style)
    user = templates.user_template.render(instruction=instruction, source_text=source_text.strip())
    return [{"role": "system", "content": templates.system}, {"role": "user", "content": user}]


def render_prompt(source_text: str, style: Union[str, StyleLabel], templates: TemplateSet) -> str:
    """Rendered prompt as one string (system and user messages joined by a blank line)."""
    return "\n\n".join(m["content"] for m in render_messages(source_text, style, templates))


def normalize_generation(raw: str) -> str:
    """Strip whitespace and surrounding quote marks, collapse inner whitespace."""
    text = (raw or "").strip()
    while len(text) >= 2 and _QUOTE_PAIRS.get(text[0]) == text[-1]:
        text = text[1:-1].strip()
    return _WHITESPACE.sub(" ", text).strip()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def variant_id_for(pair_id: str, style: Union[str, StyleLabel]) -> str:
    return f"{pair_id}:{get_style(style).value}"


def stylize(
    source_text: str,
    style: Union[str, StyleLabel],
    backend: GenerationBackend,
    params: DecodeParams,
    templates: TemplateSet,
    pair_id: str = "",
    cache: Optional[GenerationCache] = None,
    guard: Optional[EndpointGuard] = None,
    clock: Callable[[], str] = _now,
) -> StyledVariant:
    """
    Rewrite one text in one style.

    Args:
        source_text: Text to rewrite
        style: Target style
        backend: Generation backend
        params: Decode parameters, recorded verbatim
        templates: Prompt templates
        pair_id: Source pair id (variant id is "<pair_id>:<style>")
        cache: Generation cache; a hit issues no backend call
        guard: Endpoint guard checked and logged before a backend call
        clock: Timestamp source for ``created_at``

    Raises:
        ContextOverflow: Prompt plus generation budget exceeds the context window
        EmptyGeneration: The backend returned blank text
        BackendUnavailable: Transport failure after bounded retries
    """
    style = get_style(style)
    messages = render_messages(source_text, style, templates)
    prompt = "\n\n".join(m["content"] for m in messages)
    needed = estimate_tokens(prompt) + params.max_new_tokens
    if needed > backend.context_window:
        raise ContextOverflow(
            f"Prompt needs ~{needed} tokens, {backend.model_id} allows {backend.context_window}"
        )

    source_text = source_text.strip()
    key = GenerationCache.make_key(templates.version, style.value, backend.model_id, params.to_dict(), source_text)
    prompt_hash = content_hash(prompt)

    def build(raw_text: str, text: str, provenance: Mapping) -> StyledVariant:
        return StyledVariant(
            variant_id=variant_id_for(pair_id, style),
            source_pair_id=pair_id,
            style=style.value,
            text=text,
            raw_text=raw_text,
            backend_id=provenance.get("backend_id", backend.backend_id),
            model_id=provenance.get("model_id", backend.model_id),
            decode_params=params,
            prompt_hash=prompt_hash,
            template_version=templates.version,
            created_at=provenance.get("created_at", ""),
            cache_key=key,
        )

    if cache is None:
        return build(*_generate(messages, style, source_text, backend, params, guard), {"created_at": clock()})

    with cache.key_lock(key):
        hit = cache.get(key)
        if hit is not None:
            logger.debug("Cache hit for %s", variant_id_for(pair_id, style))
            return build(hit["raw_text"], hit["text"], hit.get("provenance", {}))
        raw_text, text = _generate(messages, style, source_text, backend, params, guard)
        provenance = {
            "backend_id": backend.backend_id,
            "model_id": backend.model_id,
            "template_version": templates.version,
            "decode_params": params.to_dict(),
            "prompt_hash": prompt_hash,
            "created_at": clock(),
        }
        cache.put(key, style.value, raw_text, text, provenance)
    return build(raw_text, text, provenance)


def _generate(
    messages: Messages,
    style: StyleLabel,
    source_text: str,
    backend: GenerationBackend,
    params: DecodeParams,
    guard: Optional[EndpointGuard],
) -> Tuple[str, str]:
    if guard is not None:
        guard.record(backend.backend_id, backend.endpoint, 1)
    raw_text = backend.generate(messages, params, hints={"style": style.value, "source_text": source_text})
    text = normalize_generation(raw_text)
    if not text:
        raise EmptyGeneration(f"{backend.backend_id} returned blank text for style '{style.value}'")
    return raw_text, text


def stylize_corpus(
    items: Sequence[Tuple[str, str]],
    styles: Sequence[Union[str, StyleLabel]],
    backend: GenerationBackend,
    params: DecodeParams,
    templates: TemplateSet,
    cache: Optional[GenerationCache] = None,
    guard: Optional[EndpointGuard] = None,
    ledger: Optional[ErrorLedger] = None,
    max_in_flight: int = 1,
    rate_limit_per_sec: float = 0.0,
    callback: Optional[ProgressCallback] = None,
    clock: Callable[[], str] = _now,
) -> List[StyledVariant]:
    """
    Rewrite every ``(pair_id, source_text)`` in every style.

    Per-item failures go to ``ledger`` and do not stop the run.

    Returns:
        List[StyledVariant]: Successful variants ordered by (pair id, style)

    Raises:
        EmptyInput: No items or no styles
        AggregateFailure: Every item failed
        OfflineViolation: The backend endpoint is not permitted
    """
    if not items or not styles:
        raise EmptyInput("stylize_corpus needs at least one pair and one style")
    ledger = ledger if ledger is not None else ErrorLedger()
    style_labels = sorted({get_style(s) for s in styles}, key=lambda s: style_rank(s.value))
    jobs = [
        (pair_id, text, style)
        for pair_id, text in sorted(items, key=lambda item: natural_key(item[0]))
        for style in style_labels
    ]

    def worker(job):
        pair_id, text, style = job
        return stylize(text, style, backend, params, templates, pair_id=pair_id, cache=cache, guard=guard, clock=clock)

    dispatcher = BatchDispatcher(max_in_flight=max_in_flight, rate_limit_per_sec=rate_limit_per_sec)
    outcomes = dispatcher.dispatch(jobs, worker, callback)

    variants: List[StyledVariant] = []
    for (pair_id, _, style), outcome in zip(jobs, outcomes):
        if outcome.ok:
            variants.append(outcome.result)
            continue
        if isinstance(outcome.error, OfflineViolation):
            raise outcome.error
        ledger.record(variant_id_for(pair_id, style), STAGE, outcome.error)
        logger.warning("Stylization of %s failed: %s", variant_id_for(pair_id, style), outcome.error)

    if not variants:
        raise AggregateFailure(f"All {len(jobs)} stylizations failed", ledger)
    logger.info("Stylized %d/%d items", len(variants), len(jobs))
    return variants


def semantic_gate(
    variants: Sequence[StyledVariant],
    sources: Mapping[str, str],
    backend: EmbeddingBackend,
    floor: float,
    batch_size: int = 32,
    guard: Optional[EndpointGuard] = None,
    cache: Optional[EmbeddingCache] = None,
) -> List[StyledVariant]:
    """
    Flag variants whose cosine to their source text falls below ``floor``.

    Flagged variants are kept; ``semantic_similarity`` is set on every variant.

    Args:
        variants: Variants to check
        sources: Source text per pair id
        backend: Embedding backend
        floor: Minimum cosine similarity
    """
    if not variants:
        return []
    source_ids = sorted({v.source_pair_id for v in variants}, key=natural_key)
    source_vectors = dict(zip(
        source_ids,
        embed_batch([sources[i] for i in source_ids], backend, batch_size, ids=source_ids, guard=guard, cache=cache),
    ))
    variant_vectors = embed_batch(
        [v.text for v in variants], backend, batch_size, ids=[v.variant_id for v in variants], guard=guard, cache=cache,
    )
    gated = []
    for variant, vector in zip(variants, variant_vectors):
        source = source_vectors[variant.source_pair_id]
        similarity = cosine_similarity(source, vector)
        gated.append(replace(variant, semantic_similarity=similarity, flagged=similarity < floor))
    flagged = sum(v.flagged for v in gated)
    if flagged:
        logger.warning("%d variants fall below the semantic floor %.4f", flagged, floor)
    return gated
