"""Keyword-driven discourse analysis of short social-media texts.

Submodules: corpus, seedex, relevance, sentiment, topics, analytics,
report (orchestration), svg (plots), cli.
"""

__version__ = "0.1.0"
