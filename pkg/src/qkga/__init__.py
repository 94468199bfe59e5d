"""Genetic design of quantum feature-map circuits for kernel SVM classification."""

__version__ = "0.1.0"
