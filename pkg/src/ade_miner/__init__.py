"""Semantic and visual mining of adverse drug events from clinical-trial
registries: taxonomy-level group queries over curated trial data, three
correction schemes, 26-dimensional ADE profiles and flower-glyph rendering
behind a JSON HTTP API."""

__version__ = "0.1.0"
