#!/usr/bin/env python3
"""
Main entry point for the clickbait affect toolkit.

Usage:
    python main.py --config clickbait_affect_app/data/desk/config.json --offline run

Or as a module:
    python -m clickbait_affect_app.main run
"""

import sys

from clickbait_affect_app.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
