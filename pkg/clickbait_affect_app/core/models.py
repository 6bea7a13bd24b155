"""
Data models for the clickbait affect toolkit.

This module defines the core data structures using dataclasses for type safety
and better code organization. Value types are frozen: they validate on
construction and are safe to share between worker threads.
"""

import math
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Mapping, Optional, Tuple

from .errors import (
    EmptyDistribution,
    OutOfRange,
    UnknownLabel,
    ValidationError,
    ZeroVector,
)
from .taxonomy import BINARY_LABELS, ORIGINAL_STYLE, POSITIVE_LABEL, is_valid_style

NORM_TOLERANCE = 1e-6


def _unit_interval(name: str, value: Any) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0.0 or value > 1.0:
        raise OutOfRange(f"{name} must lie in [0, 1], got {value!r}")
    return value


# ==================== Affect ====================

class Framing(str, Enum):
    """Clase de signo de ΔCG: Positive si ΔCG >= 0, Negative en otro caso."""

    POSITIVE = "positive"
    NEGATIVE = "negative"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class VadVector:
    """
    Punto del espacio Valence-Arousal-Dominance.

    Attributes:
        valence: Valencia en [0, 1]
        arousal: Activación en [0, 1]
        dominance: Dominancia (sensación de control / cierre) en [0, 1]
    """
    valence: float
    arousal: float
    dominance: float

    def __post_init__(self):
        object.__setattr__(self, "valence", _unit_interval("valence", self.valence))
        object.__setattr__(self, "arousal", _unit_interval("arousal", self.arousal))
        object.__setattr__(self, "dominance", _unit_interval("dominance", self.dominance))

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.valence, self.arousal, self.dominance)

    def to_dict(self) -> dict:
        return {"valence": self.valence, "arousal": self.arousal, "dominance": self.dominance}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'VadVector':
        return VadVector(data["valence"], data["arousal"], data["dominance"])


@dataclass(frozen=True)
class EmotionDistribution:
    """
    Puntajes por etiqueta de emoción, tal como los entrega el backend.

    Los pesos no necesitan sumar 1 (clasificadores multi-etiqueta); la vista
    normalizada se obtiene con ``normalized()``.

    Attributes:
        weights: {etiqueta: puntaje >= 0}
    """
    weights: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        clean: Dict[str, float] = {}
        for label, weight in self.weights.items():
            weight = float(weight)
            if not math.isfinite(weight) or weight < 0.0:
                raise OutOfRange(f"Weight for {label!r} must be finite and >= 0, got {weight!r}")
            clean[str(label)] = weight
        if not any(w > 0.0 for w in clean.values()):
            raise EmptyDistribution("Emotion distribution has no positive weight")
        object.__setattr__(self, "weights", clean)

    @property
    def labels(self) -> List[str]:
        return sorted(self.weights)

    def total(self) -> float:
        return math.fsum(self.weights.values())

    def normalized(self) -> Dict[str, float]:
        """Pesos divididos por su suma (suma 1 ± 1e-9)."""
        total = self.total()
        return {label: w / total for label, w in sorted(self.weights.items())}

    def top_label(self) -> str:
        """Etiqueta de mayor peso; empates por la etiqueta lexicográficamente menor."""
        return min(self.weights.items(), key=lambda kv: (-kv[1], kv[0]))[0]

    def to_dict(self) -> dict:
        return dict(sorted(self.weights.items()))

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'EmotionDistribution':
        return EmotionDistribution(weights=dict(data))


@dataclass(frozen=True)
class VadLexicon:
    """
    Léxico emoción -> VAD, versionado.

    Attributes:
        entries: {etiqueta: VadVector}
        taxonomy_name: Taxonomía que cubre el léxico
        version: Versión del archivo de léxico
    """
    entries: Dict[str, VadVector]
    taxonomy_name: str
    version: str

    def __contains__(self, label: object) -> bool:
        return label in self.entries

    def __getitem__(self, label: str) -> VadVector:
        return self.entries[label]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def labels(self) -> List[str]:
        return sorted(self.entries)

    def missing(self, labels) -> List[str]:
        """Etiquetas que no están cubiertas por el léxico."""
        return sorted(set(labels) - set(self.entries))

    def subset(self, labels) -> 'VadLexicon':
        """
        Léxico restringido a ``labels``.

        Raises:
            UnknownLabel: Alguna etiqueta no está en el léxico
        """
        for label in labels:
            if label not in self.entries:
                raise UnknownLabel(label)
        return VadLexicon({label: self.entries[label] for label in labels}, self.taxonomy_name, self.version)


@dataclass(frozen=True)
class CgRecord:
    """
    Curiosity Gap de un par (post, comentario estilizado).

    Attributes:
        text_id: Id del texto comentario (variante)
        post_id: Id del post de referencia
        style: Estilo del comentario
        cg_post: CG(p) en [0, 2]
        cg_comment: CG(c) en [0, 2]
        delta_cg: CG(p) - CG(c) en [-2, 2]
        framing: Positive si delta_cg >= 0
        post_vad: VAD del post
        comment_vad: VAD del comentario
        vad_drift_placeholder: Distancia euclidiana VAD (marcador, sin definición de referencia)
    """
    text_id: str
    post_id: str
    style: str
    cg_post: float
    cg_comment: float
    delta_cg: float
    framing: Framing
    post_vad: VadVector
    comment_vad: VadVector
    vad_drift_placeholder: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "framing", Framing(self.framing))
        if self.delta_cg != self.cg_post - self.cg_comment:
            raise ValidationError(
                f"delta_cg {self.delta_cg!r} != cg_post - cg_comment for {self.text_id}"
            )
        expected = Framing.POSITIVE if self.delta_cg >= 0 else Framing.NEGATIVE
        if self.framing is not expected:
            raise ValidationError(f"framing {self.framing} inconsistent with delta_cg {self.delta_cg!r}")

    def to_dict(self) -> dict:
        return {
            "text_id": self.text_id,
            "post_id": self.post_id,
            "style": self.style,
            "cg_post": self.cg_post,
            "cg_comment": self.cg_comment,
            "delta_cg": self.delta_cg,
            "framing": self.framing.value,
            "post_vad": self.post_vad.to_dict(),
            "comment_vad": self.comment_vad.to_dict(),
            "vad_drift_placeholder": self.vad_drift_placeholder,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'CgRecord':
        return CgRecord(
            text_id=data["text_id"],
            post_id=data["post_id"],
            style=data["style"],
            cg_post=data["cg_post"],
            cg_comment=data["cg_comment"],
            delta_cg=data["delta_cg"],
            framing=Framing(data["framing"]),
            post_vad=VadVector.from_dict(data["post_vad"]),
            comment_vad=VadVector.from_dict(data["comment_vad"]),
            vad_drift_placeholder=data.get("vad_drift_placeholder", 0.0),
        )


# ==================== Alignment ====================

@dataclass(frozen=True)
class EmbeddingVector:
    """
    Vector de embedding de dimensión fija.

    Attributes:
        values: Componentes del vector
        normalized: Si el vector tiene norma L2 igual a 1
    """
    values: Tuple[float, ...]
    normalized: bool = False

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValidationError("Embedding vector must have at least one component")
        object.__setattr__(self, "values", values)
        if self.normalized:
            norm = math.sqrt(math.fsum(v * v for v in values))
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise ValidationError(f"Vector flagged normalized has norm {norm!r}")

    @property
    def dim(self) -> int:
        return len(self.values)

    @staticmethod
    def unit(values) -> 'EmbeddingVector':
        """
        Crea un vector normalizado a partir de componentes crudos.

        Raises:
            ZeroVector: Si todas las componentes son cero
        """
        values = [float(v) for v in values]
        norm = math.sqrt(math.fsum(v * v for v in values))
        if norm == 0.0 or not math.isfinite(norm):
            raise ZeroVector("Cannot normalize a zero vector")
        return EmbeddingVector(values=tuple(v / norm for v in values), normalized=True)

    def to_list(self) -> List[float]:
        return list(self.values)


@dataclass(frozen=True)
class EmbeddedRecord:
    """Registro (titular o post) con su embedding."""
    record_id: str
    vector: EmbeddingVector

    def to_dict(self) -> dict:
        return {"id": self.record_id, "vector": self.vector.to_list(), "normalized": self.vector.normalized}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'EmbeddedRecord':
        return EmbeddedRecord(
            record_id=str(data["id"]),
            vector=EmbeddingVector(tuple(data["vector"]), normalized=bool(data.get("normalized", False))),
        )


@dataclass(frozen=True)
class AlignedPair:
    """
    Par alineado titular -> post.

    Attributes:
        headline_id: Id del titular
        post_id: Id del post
        similarity: Similitud coseno en [-1, 1]
    """
    headline_id: str
    post_id: str
    similarity: float

    @property
    def pair_id(self) -> str:
        return self.headline_id

    def to_dict(self) -> dict:
        return {"headline_id": self.headline_id, "post_id": self.post_id, "similarity": self.similarity}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'AlignedPair':
        return AlignedPair(str(data["headline_id"]), str(data["post_id"]), float(data["similarity"]))


@dataclass(frozen=True)
class AlignmentReport:
    """
    Resumen de una alineación.

    Attributes:
        pair_count: Pares emitidos
        min_similarity: Mínima similitud (None si no hay pares)
        max_similarity: Máxima similitud
        mean_similarity: Media de similitudes
        unmatched_headlines: Titulares sin par
        unmatched_ids: Ids de los titulares sin par
    """
    pair_count: int
    min_similarity: Optional[float]
    max_similarity: Optional[float]
    mean_similarity: Optional[float]
    unmatched_headlines: int = 0
    unmatched_ids: Tuple[str, ...] = ()

    def describe(self) -> str:
        """Rango de similitud con 4 decimales (ej: "ranging from 0.5889 to 0.8923")."""
        if not self.pair_count:
            return "no aligned pairs"
        return f"ranging from {self.min_similarity:.4f} to {self.max_similarity:.4f}"

    def to_dict(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "min_similarity": self.min_similarity,
            "max_similarity": self.max_similarity,
            "mean_similarity": self.mean_similarity,
            "unmatched_headlines": self.unmatched_headlines,
            "unmatched_ids": list(self.unmatched_ids),
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'AlignmentReport':
        return AlignmentReport(
            pair_count=int(data["pair_count"]),
            min_similarity=data.get("min_similarity"),
            max_similarity=data.get("max_similarity"),
            mean_similarity=data.get("mean_similarity"),
            unmatched_headlines=int(data.get("unmatched_headlines", 0)),
            unmatched_ids=tuple(data.get("unmatched_ids", ())),
        )


# ==================== Stylization ====================

@dataclass(frozen=True)
class DecodeParams:
    """
    Parámetros de decodificación (por defecto greedy: 0.0 / 1.0 / 400).
    """
    temperature: float = 0.0
    top_p: float = 1.0
    max_new_tokens: int = 400

    def __post_init__(self):
        if float(self.temperature) < 0.0:
            raise OutOfRange(f"temperature must be >= 0, got {self.temperature!r}")
        if not 0.0 < float(self.top_p) <= 1.0:
            raise OutOfRange(f"top_p must lie in (0, 1], got {self.top_p!r}")
        if int(self.max_new_tokens) <= 0:
            raise OutOfRange(f"max_new_tokens must be positive, got {self.max_new_tokens!r}")
        object.__setattr__(self, "temperature", float(self.temperature))
        object.__setattr__(self, "top_p", float(self.top_p))
        object.__setattr__(self, "max_new_tokens", int(self.max_new_tokens))

    def to_dict(self) -> dict:
        return {"temperature": self.temperature, "top_p": self.top_p, "max_new_tokens": self.max_new_tokens}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'DecodeParams':
        return DecodeParams(
            temperature=data.get("temperature", 0.0),
            top_p=data.get("top_p", 1.0),
            max_new_tokens=data.get("max_new_tokens", 400),
        )


@dataclass(frozen=True)
class StyledVariant:
    """
    Reescritura de un texto alineado bajo un estilo, con su procedencia.

    Attributes:
        variant_id: "<pair_id>:<style>"
        source_pair_id: Par de origen
        style: Estilo aplicado
        text: Texto normalizado
        raw_text: Respuesta cruda del backend
        backend_id: Backend de generación
        model_id: Modelo usado
        decode_params: Parámetros registrados tal cual
        prompt_hash: Hash del prompt renderizado
        template_version: Versión de las plantillas
        created_at: Marca de tiempo ISO-8601 de la generación
        cache_key: Clave del caché de generación
        flagged: Marcada por la compuerta semántica
        semantic_similarity: Coseno fuente/variante si la compuerta se evaluó
    """
    variant_id: str
    source_pair_id: str
    style: str
    text: str
    raw_text: str
    backend_id: str
    model_id: str
    decode_params: DecodeParams
    prompt_hash: str
    template_version: str
    created_at: str
    cache_key: str = ""
    flagged: bool = False
    semantic_similarity: Optional[float] = None

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError(f"Variant {self.variant_id} has empty text")

    def to_dict(self) -> dict:
        return {
            "variant_id": self.variant_id,
            "source_pair_id": self.source_pair_id,
            "style": self.style,
            "text": self.text,
            "raw_text": self.raw_text,
            "backend_id": self.backend_id,
            "model_id": self.model_id,
            "decode_params": self.decode_params.to_dict(),
            "prompt_hash": self.prompt_hash,
            "template_version": self.template_version,
            "created_at": self.created_at,
            "cache_key": self.cache_key,
            "flagged": self.flagged,
            "semantic_similarity": self.semantic_similarity,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'StyledVariant':
        return StyledVariant(
            variant_id=data["variant_id"],
            source_pair_id=data["source_pair_id"],
            style=data["style"],
            text=data["text"],
            raw_text=data.get("raw_text", data["text"]),
            backend_id=data["backend_id"],
            model_id=data["model_id"],
            decode_params=DecodeParams.from_dict(data["decode_params"]),
            prompt_hash=data["prompt_hash"],
            template_version=data["template_version"],
            created_at=data["created_at"],
            cache_key=data.get("cache_key", ""),
            flagged=bool(data.get("flagged", False)),
            semantic_similarity=data.get("semantic_similarity"),
        )


# ==================== Annotation ====================

@dataclass(frozen=True)
class AnnotationRecord:
    """Distribución de emociones de un texto y el backend que la produjo."""
    text_id: str
    distribution: EmotionDistribution
    backend_id: str
    taxonomy: str

    def to_dict(self) -> dict:
        return {
            "text_id": self.text_id,
            "distribution": self.distribution.to_dict(),
            "backend_id": self.backend_id,
            "taxonomy": self.taxonomy,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'AnnotationRecord':
        return AnnotationRecord(
            text_id=str(data["text_id"]),
            distribution=EmotionDistribution.from_dict(data["distribution"]),
            backend_id=data["backend_id"],
            taxonomy=data["taxonomy"],
        )


# ==================== Evaluation ====================

@dataclass(frozen=True)
class PredictionRecord:
    """
    Predicción externa de un detector de clickbait.

    Attributes:
        text_id: Id del texto evaluado
        style: Estilo o "original"
        true_label: "clickbait" o "non-clickbait"
        predicted_label: "clickbait" o "non-clickbait"
        classifier_id: Detector que produjo la predicción
    """
    text_id: str
    style: str
    true_label: str
    predicted_label: str
    classifier_id: str

    def __post_init__(self):
        for name in ("true_label", "predicted_label"):
            value = getattr(self, name)
            if value not in BINARY_LABELS:
                raise ValidationError(f"{name} must be one of {BINARY_LABELS}, got {value!r}")
        if self.style != ORIGINAL_STYLE and not is_valid_style(self.style):
            raise ValidationError(f"Unknown prediction style {self.style!r}")

    @property
    def is_true_positive_class(self) -> bool:
        return self.true_label == POSITIVE_LABEL

    @property
    def is_predicted_positive(self) -> bool:
        return self.predicted_label == POSITIVE_LABEL

    def to_dict(self) -> dict:
        return {
            "text_id": self.text_id,
            "style": self.style,
            "true_label": self.true_label,
            "predicted_label": self.predicted_label,
            "classifier_id": self.classifier_id,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'PredictionRecord':
        return PredictionRecord(
            text_id=str(data["text_id"]),
            style=str(data["style"]).lower(),
            true_label=data["true_label"],
            predicted_label=data["predicted_label"],
            classifier_id=str(data["classifier_id"]),
        )


@dataclass(frozen=True)
class ConfusionCounts:
    """Conteos de confusión binaria con clickbait como clase positiva."""
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if int(getattr(self, name)) < 0:
                raise OutOfRange(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: 'ConfusionCounts') -> 'ConfusionCounts':
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricRow:
    """
    Fila de métricas (Accuracy / Precision / Recall / F1).

    Attributes:
        degenerate_precision: tp + fp == 0, la precisión se reporta como 0.0
        degenerate_recall: tp + fn == 0, el recall se reporta como 0.0
    """
    accuracy: float
    precision: float
    recall: float
    f1: float
    support: int
    degenerate_precision: bool = False
    degenerate_recall: bool = False

    @property
    def misclassification(self) -> float:
        return 1.0 - self.accuracy

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
            "misclassification": self.misclassification,
            "degenerate_precision": self.degenerate_precision,
            "degenerate_recall": self.degenerate_recall,
        }

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'MetricRow':
        return MetricRow(
            accuracy=data["accuracy"],
            precision=data["precision"],
            recall=data["recall"],
            f1=data["f1"],
            support=int(data["support"]),
            degenerate_precision=bool(data.get("degenerate_precision", False)),
            degenerate_recall=bool(data.get("degenerate_recall", False)),
        )


# ==================== Corpus ====================

@dataclass(frozen=True)
class HeadlineRecord:
    """
    Titular del corpus de clickbait.

    Attributes:
        id: Id único dentro del corpus
        text: Texto del titular
        score: Puntaje de clickbait en [0, 1]
        is_clickbait: Clase binaria derivada (score >= umbral)
    """
    id: str
    text: str
    score: float
    is_clickbait: bool

    def __post_init__(self):
        if not self.text or not self.text.strip():
            raise ValidationError(f"Headline {self.id} has empty text")
        object.__setattr__(self, "score", _unit_interval("score", self.score))

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "score": self.score, "is_clickbait": self.is_clickbait}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'HeadlineRecord':
        return HeadlineRecord(str(data["id"]), data["text"], data["score"], bool(data["is_clickbait"]))


@dataclass(frozen=True)
class PostRecord:
    """
    Post de red social (título + cuerpo).

    Attributes:
        id: Id único dentro del corpus
        title: Título del post
        body: Cuerpo del post
        source: Comunidad o fuente
    """
    id: str
    title: str
    body: str
    source: str = ""

    def __post_init__(self):
        if not self.title.strip() and not self.body.strip():
            raise ValidationError(f"Post {self.id} has neither title nor body")

    @property
    def text(self) -> str:
        """Título y cuerpo separados por un salto de línea (se omiten partes vacías)."""
        return "\n".join(part for part in (self.title.strip(), self.body.strip()) if part)

    def text_for(self, part: str) -> str:
        """
        Texto del post restringido a "both", "title" o "body".

        Si la parte pedida está vacía se usa el texto completo.
        """
        if part == "title" and self.title.strip():
            return self.title.strip()
        if part == "body" and self.body.strip():
            return self.body.strip()
        return self.text

    def to_dict(self) -> dict:
        return {"id": self.id, "title": self.title, "body": self.body, "source": self.source}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'PostRecord':
        return PostRecord(str(data["id"]), data.get("title", ""), data.get("body", ""), data.get("source", ""))


@dataclass(frozen=True)
class AttackCandidate:
    """
    Variante candidata para inyección hipotética en la discusión de un post.

    Attributes:
        post_id: Post objetivo
        variant: Variante estilizada
        similarity: Coseno variante/post
        cg_comment: CG de la variante
        delta_cg: CG(post) - CG(variante)
        framing: Framing de delta_cg
        rank: Posición (1 = primero) dentro de su lista
        objective: "max_delta_cg" o "min_delta_cg"
    """
    post_id: str
    variant: StyledVariant
    similarity: float
    cg_comment: float
    delta_cg: float
    framing: Framing
    rank: int
    objective: str

    def to_dict(self) -> dict:
        return {
            "post_id": self.post_id,
            "variant_id": self.variant.variant_id,
            "style": self.variant.style,
            "text": self.variant.text,
            "similarity": self.similarity,
            "cg_comment": self.cg_comment,
            "delta_cg": self.delta_cg,
            "framing": self.framing.value,
            "rank": self.rank,
            "objective": self.objective,
        }


# ==================== Error ledger ====================

@dataclass(frozen=True)
class LedgerEntry:
    """Fallo de un ítem durante una operación sobre el corpus."""
    item_id: str
    stage: str
    error_type: str
    message: str

    def to_dict(self) -> dict:
        return {"item_id": self.item_id, "stage": self.stage, "error_type": self.error_type, "message": self.message}

    @staticmethod
    def from_dict(data: Mapping[str, Any]) -> 'LedgerEntry':
        return LedgerEntry(data["item_id"], data["stage"], data["error_type"], data["message"])


class ErrorLedger:
    """
    Registro thread-safe de fallos por ítem.

    Las operaciones de corpus anotan aquí los ítems que fallan en lugar de abortar.
    """

    def __init__(self):
        self._entries: List[LedgerEntry] = []
        self._lock = threading.Lock()

    def record(self, item_id: str, stage: str, error: BaseException) -> LedgerEntry:
        entry = LedgerEntry(str(item_id), stage, type(error).__name__, str(error))
        with self._lock:
            self._entries.append(entry)
        return entry

    @property
    def entries(self) -> List[LedgerEntry]:
        """Entradas ordenadas por (etapa, ítem) para una salida determinista."""
        with self._lock:
            return sorted(self._entries, key=lambda e: (e.stage, e.item_id))

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def __iter__(self) -> Iterator[LedgerEntry]:
        return iter(self.entries)

    def to_list(self) -> List[dict]:
        return [entry.to_dict() for entry in self.entries]
