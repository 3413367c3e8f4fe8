"""Ontology-grounded uniform and contrastive explanations for binary classifiers."""

__version__ = "0.1.0"
