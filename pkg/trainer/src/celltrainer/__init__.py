"""Training side of the cell layout system."""

__version__ = "0.1.0"
