"""Flat model Lie (super)algebras over pseudo-Euclidean spaces, their
Spencer cohomology, and integration of admissible cocycles into filtered
deformations, all over exact rationals."""

__version__ = "0.1.0"

SCHEMA_VERSION = 1
