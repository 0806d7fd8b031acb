"""Exact decision procedures for expansive flows on surfaces."""

__version__ = "0.1.0"
