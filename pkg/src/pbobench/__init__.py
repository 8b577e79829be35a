"""Discrete pseudo-Boolean benchmark suite: problems, algorithms, experiment runner, analyzer."""

__version__ = "0.1.0"
