"""Total-correlation measures for multipartite quantum states."""

__version__ = "0.1.0"
