"""
Main entry point for the clickbait affect toolkit.

This module can be run as:

    python -m clickbait_affect_app.main --config path/to/config.json run

Or directly:

    python clickbait_affect_app/main.py run
"""

import sys
import os

# Ensure the parent directory is in the path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from clickbait_affect_app.cli.app import main

if __name__ == "__main__":
    sys.exit(main())
