"""Deterministic FR2 CHO / FCHO mobility simulator with multi-panel UE hand blockage."""

__version__ = "0.1.0"
