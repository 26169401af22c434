"""Version information for qpgreen."""

__version__ = "0.1.0"
