"""Data-free rank-frequency word embeddings with MDL codelength probing."""

__version__ = "0.1.0"
