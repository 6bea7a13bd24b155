"""
Clickbait Affect Toolkit

Alineación titular/post, reescritura por estilos, anotación emocional, análisis
de Curiosity Gap en el espacio VAD y evaluación de detectores de clickbait.
"""

__version__ = "1.0.0"
__author__ = "TID Team"
