"""Structure-preserving solver and analysis toolkit for a doubly degenerate
fourth-order thin-film equation on spherical geometry."""

__version__ = "0.1.0"
