"""Real-time action-chunk trajectory engine and whole-body replay simulator."""

__version__ = "0.1.0"
