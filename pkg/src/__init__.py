"""
Source package for stabkit.
"""

from .stability import (
    Equation,
    TestFunction,
    Window,
    certify_cauchy,
    certify_jensen,
    sup_defect_scan,
)
from .database import DatabaseManager

__all__ = [
    'Equation',
    'TestFunction',
    'Window',
    'certify_cauchy',
    'certify_jensen',
    'sup_defect_scan',
    'DatabaseManager'
]
