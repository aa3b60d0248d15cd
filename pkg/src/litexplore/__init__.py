"""Query-conditioned literature exploration engine.

Hybrid lexical + dense retrieval with reciprocal rank fusion, topic
modeling over the retrieved set, and a per-query citation knowledge graph,
exposed as a library, CLI and HTTP service.
"""

__version__ = "0.1.0"
