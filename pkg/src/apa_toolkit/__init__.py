"""Workbench for abstract probabilistic automata: refinement, difference,
behavioral distance, and counterexample generation, with a brute-force
oracle for desk-scale validation."""

__version__ = "0.1.0"
