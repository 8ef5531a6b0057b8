"""Finite-scale workbench for term monads, consequence relations and algebraisation."""

__version__ = "0.1.0"
