"""Embedding/attention bundle exporter for the stormtopics pipeline."""

__version__ = "0.1.0"
