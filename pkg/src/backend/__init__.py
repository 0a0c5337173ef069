"""
Backend package for stabkit.

This package provides the Flask JSON API over scans, certificates and
searches.
"""

from .server import create_app

__all__ = [
    'create_app'
]
