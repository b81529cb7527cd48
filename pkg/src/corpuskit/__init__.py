"""corpuskit: curation pipeline for permissively licensed web corpora."""

__version__ = "0.1.0"
