"""Actionable-sentence pipeline: ingest emails, filter, weak-label, train, evaluate."""

__version__ = "0.1.0"
