"""
Tests package for stabkit.
"""
