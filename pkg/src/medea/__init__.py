"""Capacity-expansion and hourly-dispatch LP model with a wind opportunity-cost sweep."""

__version__ = "0.1.0"
