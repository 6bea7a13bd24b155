"""
Pipeline configuration.

A run is configured by a single JSON file loaded into nested dataclasses. Every
section rejects unknown keys and every value is validated before any stage
runs. Relative paths resolve against the directory of the config file; paths
left unset fall back to the data bundled with the package.
"""

import json
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type, TypeVar, Union

from ..utils.hashing import content_hash
from .errors import ConfigError
from .taxonomy import get_all_style_names, is_valid_style

logger = logging.getLogger(__name__)

S = TypeVar("S")

EMBEDDING_BACKENDS = ("hash", "file", "openai")
GENERATION_BACKENDS = ("echo", "affix", "openai")
EMOTION_BACKENDS = ("keywords", "file", "http")
ALIGNMENT_MODES = ("one_to_one", "top1")
AGGREGATIONS = ("weighted_mean", "top1")
POST_TEXT_PARTS = ("both", "title", "body")
STYLIZE_SOURCES = ("headline", "post")
MAPPING_KEYS = ("id", "text", "label", "title", "body", "source")


def _section(cls: Type[S], data: Any, name: str) -> S:
    if data is None:
        return cls()
    if not isinstance(data, Mapping):
        raise ConfigError(f"Section '{name}' must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown keys in '{name}': {unknown}")
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"Invalid section '{name}': {e}") from None


def _positive_int(name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ConfigError(f"{name} must be a positive integer, got {value!r}")


def _non_negative(name: str, value: Any) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
        raise ConfigError(f"{name} must be a non-negative number, got {value!r}")


def _choice(name: str, value: Any, choices: Tuple[str, ...]) -> None:
    if value not in choices:
        raise ConfigError(f"{name} must be one of {list(choices)}, got {value!r}")


@dataclass
class CorpusConfig:
    """Corpus inputs and ingestion rules."""
    headlines_path: Optional[str] = None
    posts_path: Optional[str] = None
    predictions_path: Optional[str] = None
    headline_fields: Dict[str, str] = field(default_factory=dict)
    post_fields: Dict[str, str] = field(default_factory=dict)
    clickbait_only: bool = True
    label_threshold: float = 0.5
    post_limit: Optional[int] = None
    removed_markers: List[str] = field(default_factory=lambda: ["[removed]", "[deleted]"])

    def validate(self) -> None:
        if not 0.0 <= float(self.label_threshold) <= 1.0:
            raise ConfigError(f"corpus.label_threshold must lie in [0, 1], got {self.label_threshold!r}")
        if self.post_limit is not None:
            _positive_int("corpus.post_limit", self.post_limit)
        for name in ("headline_fields", "post_fields"):
            unknown = sorted(set(getattr(self, name)) - set(MAPPING_KEYS))
            if unknown:
                raise ConfigError(f"Unknown keys in 'corpus.{name}': {unknown}")


@dataclass
class EmbeddingConfig:
    """Embedding backend and batching."""
    backend: str = "hash"
    model_id: Optional[str] = None
    base_url: Optional[str] = None
    api_key_env: Optional[str] = None
    path: Optional[str] = None
    dim: int = 64
    batch_size: int = 32
    max_in_flight: int = 1
    rate_limit_per_sec: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3

    def validate(self) -> None:
        _choice("embedding.backend", self.backend, EMBEDDING_BACKENDS)
        _positive_int("embedding.dim", self.dim)
        _positive_int("embedding.batch_size", self.batch_size)
        _positive_int("embedding.max_in_flight", self.max_in_flight)
        _non_negative("embedding.rate_limit_per_sec", self.rate_limit_per_sec)
        _non_negative("embedding.max_retries", self.max_retries)
        if self.backend == "openai" and not self.base_url:
            raise ConfigError("embedding.base_url is required for the openai backend")
        if self.backend == "file" and not self.path:
            raise ConfigError("embedding.path is required for the file backend")


@dataclass
class AlignmentConfig:
    """Alignment mode and thresholds."""
    mode: str = "one_to_one"
    min_similarity: Optional[float] = 0.0
    max_matrix_entries: int = 400_000_000

    def validate(self) -> None:
        _choice("alignment.mode", self.mode, ALIGNMENT_MODES)
        _positive_int("alignment.max_matrix_entries", self.max_matrix_entries)
        if self.min_similarity is not None and not -1.0 <= float(self.min_similarity) <= 1.0:
            raise ConfigError(f"alignment.min_similarity must lie in [-1, 1], got {self.min_similarity!r}")


@dataclass
class GenerationConfig:
    """Stylization backend, templates and decode parameters."""
    backend: str = "affix"
    model_id: Optional[str] = None
    base_url: Optional[str] = None
    api_key_env: Optional[str] = None
    templates_path: Optional[str] = None
    styles: List[str] = field(default_factory=get_all_style_names)
    source: str = "headline"
    temperature: float = 0.0
    top_p: float = 1.0
    max_new_tokens: int = 400
    context_window: int = 4096
    max_in_flight: int = 1
    rate_limit_per_sec: float = 0.0
    timeout: float = 120.0
    max_retries: int = 3
    semantic_floor: Optional[float] = None

    def validate(self) -> None:
        _choice("generation.backend", self.backend, GENERATION_BACKENDS)
        _choice("generation.source", self.source, STYLIZE_SOURCES)
        if not self.styles:
            raise ConfigError("generation.styles must not be empty")
        for style in self.styles:
            if not is_valid_style(style):
                raise ConfigError(f"generation.styles contains unknown style {style!r}")
        if len(set(self.styles)) != len(self.styles):
            raise ConfigError("generation.styles contains duplicates")
        _non_negative("generation.temperature", self.temperature)
        if not 0.0 < float(self.top_p) <= 1.0:
            raise ConfigError(f"generation.top_p must lie in (0, 1], got {self.top_p!r}")
        _positive_int("generation.max_new_tokens", self.max_new_tokens)
        _positive_int("generation.context_window", self.context_window)
        _positive_int("generation.max_in_flight", self.max_in_flight)
        _non_negative("generation.rate_limit_per_sec", self.rate_limit_per_sec)
        _non_negative("generation.max_retries", self.max_retries)
        if self.backend == "openai" and not self.base_url:
            raise ConfigError("generation.base_url is required for the openai backend")
        if self.semantic_floor is not None and not -1.0 <= float(self.semantic_floor) <= 1.0:
            raise ConfigError(f"generation.semantic_floor must lie in [-1, 1], got {self.semantic_floor!r}")


@dataclass
class EmotionConfig:
    """Emotion backend, taxonomy and keyword lexicon."""
    backend: str = "keywords"
    url: Optional[str] = None
    model_id: Optional[str] = None
    api_key_env: Optional[str] = None
    path: Optional[str] = None
    keywords_path: Optional[str] = None
    taxonomy_path: Optional[str] = None
    batch_size: int = 32
    max_in_flight: int = 1
    rate_limit_per_sec: float = 0.0
    timeout: float = 60.0
    max_retries: int = 3
    post_text: str = "both"

    def validate(self) -> None:
        _choice("emotion.backend", self.backend, EMOTION_BACKENDS)
        _choice("emotion.post_text", self.post_text, POST_TEXT_PARTS)
        _positive_int("emotion.batch_size", self.batch_size)
        _positive_int("emotion.max_in_flight", self.max_in_flight)
        _non_negative("emotion.rate_limit_per_sec", self.rate_limit_per_sec)
        _non_negative("emotion.max_retries", self.max_retries)
        if self.backend == "http" and not self.url:
            raise ConfigError("emotion.url is required for the http backend")
        if self.backend == "file" and not self.path:
            raise ConfigError("emotion.path is required for the file backend")


@dataclass
class AffectConfig:
    """VAD lexicon and aggregation."""
    lexicon_path: Optional[str] = None
    aggregation: str = "weighted_mean"
    floor: float = 0.0

    def validate(self) -> None:
        _choice("affect.aggregation", self.aggregation, AGGREGATIONS)
        _non_negative("affect.floor", self.floor)


@dataclass
class RankingConfig:
    """Attack-candidate ranking."""
    similarity_floor: float = 0.0
    k: int = 5

    def validate(self) -> None:
        _positive_int("ranking.k", self.k)
        if not -1.0 <= float(self.similarity_floor) <= 1.0:
            raise ConfigError(f"ranking.similarity_floor must lie in [-1, 1], got {self.similarity_floor!r}")


_PATH_KEYS = (
    ("corpus", "headlines_path"),
    ("corpus", "posts_path"),
    ("corpus", "predictions_path"),
    ("embedding", "path"),
    ("generation", "templates_path"),
    ("emotion", "path"),
    ("emotion", "keywords_path"),
    ("emotion", "taxonomy_path"),
    ("affect", "lexicon_path"),
)


@dataclass
class PipelineConfig:
    """
    Complete run configuration.

    Attributes:
        output_dir: Directory receiving checkpoints, manifest and report
        seed: Seed for every seeded backend
        offline: Forbid every network endpoint
    """
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    alignment: AlignmentConfig = field(default_factory=AlignmentConfig)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    emotion: EmotionConfig = field(default_factory=EmotionConfig)
    affect: AffectConfig = field(default_factory=AffectConfig)
    ranking: RankingConfig = field(default_factory=RankingConfig)
    output_dir: str = "output"
    seed: int = 0
    offline: bool = False

    SECTIONS = {
        "corpus": CorpusConfig,
        "embedding": EmbeddingConfig,
        "alignment": AlignmentConfig,
        "generation": GenerationConfig,
        "emotion": EmotionConfig,
        "affect": AffectConfig,
        "ranking": RankingConfig,
    }
    SCALARS = ("output_dir", "seed", "offline")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: Union[str, Path, None] = None) -> 'PipelineConfig':
        """
        Build and validate a configuration.

        Args:
            data: Parsed JSON object
            base_dir: Directory relative paths resolve against (default: cwd)

        Raises:
            ConfigError: Unknown key, wrong type or invalid value
        """
        if not isinstance(data, Mapping):
            raise ConfigError("Configuration must be a JSON object")
        unknown = sorted(set(data) - set(cls.SECTIONS) - set(cls.SCALARS))
        if unknown:
            raise ConfigError(f"Unknown top-level keys: {unknown}")
        kwargs: Dict[str, Any] = {
            name: _section(section_cls, data.get(name), name) for name, section_cls in cls.SECTIONS.items()
        }
        for name in cls.SCALARS:
            if name in data:
                kwargs[name] = data[name]
        config = cls(**kwargs)
        config.resolve_paths(Path(base_dir) if base_dir is not None else Path.cwd())
        config.validate()
        return config

    def resolve_paths(self, base_dir: Path) -> None:
        for section_name, key in _PATH_KEYS:
            section = getattr(self, section_name)
            value = getattr(section, key)
            if value:
                setattr(section, key, str((base_dir / value).resolve()))
        self.output_dir = str((base_dir / self.output_dir).resolve())

    def validate(self) -> None:
        """
        Validate every section.

        Raises:
            ConfigError: First invalid value found
        """
        for name in self.SECTIONS:
            getattr(self, name).validate()
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not isinstance(self.offline, bool):
            raise ConfigError(f"offline must be a boolean, got {self.offline!r}")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a non-empty string")

    def with_overrides(
        self,
        output_dir: Optional[str] = None,
        seed: Optional[int] = None,
        offline: Optional[bool] = None,
    ) -> 'PipelineConfig':
        """Copy with CLI overrides applied (None keeps the configured value)."""
        config = replace(self)
        if output_dir is not None:
            config.output_dir = str(Path(output_dir).resolve())
        if seed is not None:
            config.seed = int(seed)
        if offline is not None:
            config.offline = bool(offline) or self.offline
        config.validate()
        return config

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            name: {f.name: getattr(getattr(self, name), f.name) for f in fields(section_cls)}
            for name, section_cls in self.SECTIONS.items()
        }
        for name in self.SCALARS:
            data[name] = getattr(self, name)
        return data

    def semantic_dict(self) -> Dict[str, Any]:
        """Configuration without run-location fields, for fingerprints."""
        data = self.to_dict()
        data.pop("output_dir", None)
        return data

    def config_hash(self) -> str:
        return content_hash(self.semantic_dict())


def load_config(path: Union[str, Path, None] = None) -> PipelineConfig:
    """
    Load a configuration file (or the defaults when ``path`` is None).

    Raises:
        ConfigError: Unreadable file, invalid JSON or invalid value
    """
    if path is None:
        return PipelineConfig.from_dict({})
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config '{path}': {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in '{path}' at line {e.lineno}: {e.msg}") from None
    config = PipelineConfig.from_dict(data, base_dir=path.parent)
    logger.info("Loaded config %s (hash %s)", path, config.config_hash()[:12])
    return config
