"""Necessary conditions for local algebraizability of rigid tubes in C^n."""

__version__ = "0.1.0"
