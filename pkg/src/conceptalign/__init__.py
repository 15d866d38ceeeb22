"""Crosslingual concept alignment over verse-aligned parallel corpora.

Builds a directed bipartite graph between source-language concepts and
target-language strings by exhaustive chi-square ngram association search,
then derives concept stability, crosslingual semantic fields and
conceptualization-based language similarity from the graph.
"""

__version__ = "0.1.0"

from conceptalign.errors import InputError, IntegrityError, ParseError

__all__ = ["InputError", "IntegrityError", "ParseError", "__version__"]
