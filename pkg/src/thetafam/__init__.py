"""Exact p-adic arithmetic for CM theta families and their L-value plumbing."""

__version__ = "0.1.0"
