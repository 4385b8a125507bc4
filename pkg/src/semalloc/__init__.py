"""Joint user association and resource allocation for multi-cell networks with adaptive semantic communication."""

__version__ = "0.1.0"
