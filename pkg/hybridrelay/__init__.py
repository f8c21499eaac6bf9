"""Outage analysis toolkit for a two-antenna hybrid HD/FD decode-and-forward relay."""

__version__ = "0.1.0"
