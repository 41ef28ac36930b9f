"""Exact desk-scale simulation of verifiable quantum secret sharing and
multi-party quantum computation over prime-dimensional qupits."""

__version__ = "0.1.0"
