"""
Closed vocabularies used across the toolkit.

This module defines the rewrite styles, the table order used in reports, the binary
label space of the clickbait detectors and the emotion taxonomy file format.
"""

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Tuple, Union

from .errors import ParseError, TaxonomyMismatch, UnknownStyle


class StyleLabel(str, Enum):
    """Estilos de reescritura soportados (serializados en minúsculas)."""

    CLICKBAIT = "clickbait"
    NEUTRAL = "neutral"
    FORMAL = "formal"
    CASUAL = "casual"
    INSPIRATIONAL = "inspirational"
    HUMOR = "humor"

    def __str__(self) -> str:
        return self.value


# Estilo de las predicciones sobre el titular sin reescribir
ORIGINAL_STYLE = "original"

# Orden de filas de la tabla por estilo
TABLE_ORDER: Tuple[str, ...] = (ORIGINAL_STYLE,) + tuple(s.value for s in StyleLabel)

# Espacio de etiquetas binario de los detectores
POSITIVE_LABEL = "clickbait"
NEGATIVE_LABEL = "non-clickbait"
BINARY_LABELS = (POSITIVE_LABEL, NEGATIVE_LABEL)

# Nombre de los grupos de framing en los reportes
HIGHEST_GROUP = "Highest"
LOWEST_GROUP = "Lowest"

DEFAULT_TAXONOMY_NAME = "goemotions-28"
NEUTRAL_EMOTION = "neutral"

GOEMOTIONS_LABELS: Tuple[str, ...] = (
    "admiration", "amusement", "anger", "annoyance", "approval", "caring",
    "confusion", "curiosity", "desire", "disappointment", "disapproval", "disgust",
    "embarrassment", "excitement", "fear", "gratitude", "grief", "joy",
    "love", "nervousness", "optimism", "pride", "realization", "relief",
    "remorse", "sadness", "surprise", "neutral",
)


@dataclass(frozen=True)
class Taxonomy:
    """
    Taxonomía de emociones activa.

    Attributes:
        name: Nombre de la taxonomía (ej: "goemotions-28")
        labels: Etiquetas en el orden del archivo
    """
    name: str
    labels: Tuple[str, ...]

    def __contains__(self, label: object) -> bool:
        return label in self.labels

    def __len__(self) -> int:
        return len(self.labels)

    def check_labels(self, labels) -> None:
        """
        Verifica que todas las etiquetas pertenezcan a la taxonomía.

        Raises:
            TaxonomyMismatch: Si alguna etiqueta no existe
        """
        unknown = sorted(set(labels) - set(self.labels))
        if unknown:
            raise TaxonomyMismatch(
                f"Labels {unknown} are not part of taxonomy '{self.name}'"
            )


DEFAULT_TAXONOMY = Taxonomy(name=DEFAULT_TAXONOMY_NAME, labels=GOEMOTIONS_LABELS)


def get_style(name: Union[str, StyleLabel]) -> StyleLabel:
    """
    Obtiene el StyleLabel correspondiente a un nombre.

    Args:
        name: Nombre del estilo (ej: "formal")

    Returns:
        StyleLabel del estilo

    Raises:
        UnknownStyle: Si el estilo no existe
    """
    if isinstance(name, StyleLabel):
        return name
    try:
        return StyleLabel(str(name).strip().lower())
    except ValueError:
        raise UnknownStyle(f"Unknown style: {name!r}") from None


def is_valid_style(name: str) -> bool:
    """Verifica si un nombre de estilo es válido."""
    try:
        get_style(name)
        return True
    except UnknownStyle:
        return False


def get_all_style_names() -> List[str]:
    """Lista de todos los estilos en orden de tabla."""
    return [s.value for s in StyleLabel]


def style_rank(style: str) -> Tuple[int, str]:
    """
    Clave de orden de un estilo: primero el orden de tabla, luego alfabético.

    Args:
        style: Nombre del estilo (puede ser "original" o uno desconocido)
    """
    if style in TABLE_ORDER:
        return (TABLE_ORDER.index(style), style)
    return (len(TABLE_ORDER), style)


def load_taxonomy(path: Union[str, Path]) -> Taxonomy:
    """
    Carga una taxonomía desde archivo.

    Formato: una línea de cabecera ``# taxonomy: <nombre>`` y luego una etiqueta
    por línea. Líneas vacías se ignoran.

    Args:
        path: Ruta al archivo de taxonomía

    Returns:
        Taxonomy cargada

    Raises:
        ParseError: Si falta la cabecera, hay duplicados o no hay etiquetas
    """
    path = Path(path)
    name = None
    labels: List[str] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("#").partition(":")
                if key.strip() == "taxonomy":
                    name = value.strip()
                continue
            if line in labels:
                raise ParseError(f"Duplicate label {line!r}", str(path), line_number)
            labels.append(line)

    if not name:
        raise ParseError("Missing '# taxonomy: <name>' header", str(path))
    if not labels:
        raise ParseError("Taxonomy has no labels", str(path))
    return Taxonomy(name=name, labels=tuple(labels))
