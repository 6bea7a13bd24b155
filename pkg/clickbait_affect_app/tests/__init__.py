"""Tests for the clickbait affect toolkit."""
