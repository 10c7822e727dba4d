"""Synthetic training data toolkit for slot filling and intent detection."""

__version__ = "0.1.0"
