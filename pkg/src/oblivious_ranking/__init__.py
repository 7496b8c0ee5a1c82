"""Ranking for oblivious matching: simulation, lemma checks and factor-revealing LPs."""

__version__ = "0.1.0"
