"""Scan statistics over trajectory data: find the region whose recorded fraction departs most from baseline."""

__version__ = "0.1.0"
