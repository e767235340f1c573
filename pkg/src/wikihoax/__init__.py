"""Forensic toolkit for separating hoax from legitimate Wikipedia articles.

Subpackages cover corpus handling, topic-matched negative sampling,
surface stylometry, revision-timeline analysis, a month-token timeline
classifier, evaluation metrics, MediaWiki ingestion, and a CLI that
wires them together.
"""

__version__ = "0.1.0"
