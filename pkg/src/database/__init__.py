"""
Database package for stabkit.

This package provides the ledger of issued certificates and scan reports.
"""

from .models import (
    Base,
    CertificateRecord,
    ScanRecord,
    DatabaseManager,
    certificate_fingerprint
)

__all__ = [
    'Base',
    'CertificateRecord',
    'ScanRecord',
    'DatabaseManager',
    'certificate_fingerprint'
]
