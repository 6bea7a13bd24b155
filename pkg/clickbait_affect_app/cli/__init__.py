"""
Command line package for the clickbait affect toolkit.

An argparse application with one subcommand per pipeline stage.
"""

from .app import create_parser, main

__all__ = [
    'create_parser',
    'main',
]
