"""Design space characterization under parametric uncertainty."""

__version__ = "0.1.0"
