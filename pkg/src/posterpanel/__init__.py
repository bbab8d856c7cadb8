"""Audience persona agents that critique and edit advertisement posters."""

__version__ = "0.1.0"
