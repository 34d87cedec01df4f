"""Instanton search and error-floor analysis for LDPC codes."""

__version__ = "0.1.0"
