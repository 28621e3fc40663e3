"""profstream: streaming profiling-session pipeline and analyser backend."""

__version__ = "0.1.0"
