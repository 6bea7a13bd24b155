"""
Run state for the pipeline.

This module provides centralized access to everything a stage needs: the
validated configuration, the output layout, the run manifest, the endpoint
guard, the caches and the lazily loaded resources (taxonomy, lexicons,
templates, backends).
"""

import logging
from pathlib import Path
from typing import Any, Dict

from ..core.config import PipelineConfig
from ..core.lexicon import (
    DEFAULT_KEYWORDS_PATH,
    DEFAULT_LEXICON_PATH,
    DEFAULT_TAXONOMY_PATH,
    load_keyword_lexicon,
    load_lexicon,
)
from ..core.models import DecodeParams, VadLexicon
from ..core.stylization import DEFAULT_TEMPLATES_PATH, TemplateSet, load_templates
from ..core.taxonomy import Taxonomy, load_taxonomy
from ..network.embedding import EmbeddingBackend
from ..network.emotion import EmotionBackend
from ..network.endpoint_guard import EndpointGuard
from ..network.factory import (
    build_embedding_backend,
    build_emotion_backend,
    build_generation_backend,
    build_guard,
)
from ..network.generation import GenerationBackend
from ..storage.cache import EmbeddingCache, GenerationCache
from ..storage.manifest import RunManifest
from ..storage.records import JsonlStore, file_hash

logger = logging.getLogger(__name__)

MANIFEST_FILE = "run_manifest.json"
STAGES_DIR = "stages"
CACHE_DIR = "cache"
REPORT_DIR = "report"


class PipelineState:
    """
    Gestiona el estado de una corrida del pipeline.

    Los recursos se cargan una sola vez y en el primer uso; cargar la
    taxonomía, el léxico VAD y el léxico de palabras clave valida además la
    clausura de la taxonomía antes de que corra cualquier etapa.
    """

    def __init__(self, config: PipelineConfig):
        """
        Inicializa el PipelineState.

        Args:
            config: Configuración ya validada
        """
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.manifest = RunManifest(self.output_dir / MANIFEST_FILE)
        self.manifest.load()
        self.guard: EndpointGuard = build_guard(config)
        self.generation_cache = GenerationCache(self.output_dir / CACHE_DIR / "generation.jsonl")
        self.embedding_cache = EmbeddingCache(self.output_dir / CACHE_DIR / "embeddings.jsonl")
        self._resources: Dict[str, Any] = {}

    # ==================== Layout ====================

    def stage_dir(self, stage: str) -> Path:
        return self.output_dir / STAGES_DIR / stage

    def store(self, stage: str, name: str) -> JsonlStore:
        """Checkpoint file ``<output_dir>/stages/<stage>/<name>.jsonl``."""
        return JsonlStore(self.stage_dir(stage) / f"{name}.jsonl")

    @property
    def report_dir(self) -> Path:
        return self.output_dir / REPORT_DIR

    # ==================== Resources ====================

    def _cached(self, name: str, factory):
        if name not in self._resources:
            self._resources[name] = factory()
        return self._resources[name]

    @property
    def taxonomy_path(self) -> Path:
        return Path(self.config.emotion.taxonomy_path or DEFAULT_TAXONOMY_PATH)

    @property
    def lexicon_path(self) -> Path:
        return Path(self.config.affect.lexicon_path or DEFAULT_LEXICON_PATH)

    @property
    def keywords_path(self) -> Path:
        return Path(self.config.emotion.keywords_path or DEFAULT_KEYWORDS_PATH)

    @property
    def templates_path(self) -> Path:
        return Path(self.config.generation.templates_path or DEFAULT_TEMPLATES_PATH)

    @property
    def taxonomy(self) -> Taxonomy:
        return self._cached("taxonomy", lambda: load_taxonomy(self.taxonomy_path))

    @property
    def lexicon(self) -> VadLexicon:
        return self._cached("lexicon", lambda: load_lexicon(self.lexicon_path, self.taxonomy))

    @property
    def keywords(self) -> Dict[str, str]:
        return self._cached("keywords", lambda: load_keyword_lexicon(self.keywords_path, self.taxonomy))

    @property
    def templates(self) -> TemplateSet:
        return self._cached("templates", lambda: load_templates(self.templates_path))

    @property
    def decode_params(self) -> DecodeParams:
        g = self.config.generation
        return DecodeParams(temperature=g.temperature, top_p=g.top_p, max_new_tokens=g.max_new_tokens)

    @property
    def embedding_backend(self) -> EmbeddingBackend:
        return self._cached(
            "embedding_backend", lambda: build_embedding_backend(self.config.embedding, seed=self.config.seed)
        )

    @property
    def generation_backend(self) -> GenerationBackend:
        return self._cached("generation_backend", lambda: build_generation_backend(self.config.generation))

    @property
    def emotion_backend(self) -> EmotionBackend:
        def build():
            keywords = self.keywords if self.config.emotion.backend == "keywords" else None
            version = (file_hash(self.keywords_path) or "")[:12] if keywords is not None else ""
            return build_emotion_backend(self.config.emotion, self.taxonomy, keywords, version)
        return self._cached("emotion_backend", build)

    def check_resources(self) -> None:
        """
        Load every resource the configuration names.

        Raises:
            ParseError / TaxonomyMismatch: A resource is malformed or not closed over the taxonomy
        """
        _ = self.taxonomy, self.lexicon, self.templates
        if self.config.emotion.backend == "keywords":
            _ = self.keywords

    def versions(self) -> Dict[str, Any]:
        """Backend, model, template, taxonomy and lexicon versions of the run."""
        return {
            "taxonomy": self.taxonomy.name,
            "taxonomy_sha256": file_hash(self.taxonomy_path),
            "lexicon": self.lexicon.version,
            "lexicon_sha256": file_hash(self.lexicon_path),
            "keywords_sha256": file_hash(self.keywords_path) if self.config.emotion.backend == "keywords" else None,
            "templates": self.templates.version,
            "templates_sha256": file_hash(self.templates_path),
            "embedding": {"backend": self.embedding_backend.backend_id, "model": self.embedding_backend.model_id},
            "generation": {"backend": self.generation_backend.backend_id, "model": self.generation_backend.model_id},
            "emotion": {"backend": self.emotion_backend.backend_id, "model": self.emotion_backend.model_id},
        }

    def __repr__(self) -> str:
        return f"PipelineState(output_dir='{self.output_dir}', offline={self.config.offline})"
