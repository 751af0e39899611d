"""Two-party bargaining simulator and benchmark harness."""

__version__ = "0.1.0"
