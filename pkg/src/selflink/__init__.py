"""Self-linking numbers of framed closed space curves, computed analytically and combinatorially."""

__version__ = "0.1.0"
