"""
stabkit - Ledger models and manager

This module provides the database layer for storing issued certificates
and scan reports so they can be listed, fetched and re-audited later.
"""

from datetime import datetime
from typing import Optional, List, Dict, Any, Tuple
import json
import logging
import uuid

from sqlalchemy import create_engine, Column, String, Text, DateTime, Boolean
from sqlalchemy.orm import declarative_base, sessionmaker

from ..stability.audit import AuditResult, certificate_fingerprint, verify_certificate


logger = logging.getLogger(__name__)

Base = declarative_base()


class CertificateRecord(Base):
    """A stored certificate."""
    __tablename__ = 'certificates'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    kind = Column(String(20), nullable=False)  # cauchy, jensen, hyper-cauchy, hyper-jensen
    fingerprint = Column(String(64), unique=True, nullable=False)
    bound = Column(String(64), nullable=False)
    sound = Column(Boolean, nullable=False)
    payload = Column(Text, nullable=False)
    created_at = Column(DateTime, default=datetime.utcnow)

    def to_dict(self, include_payload: bool = True) -> Dict[str, Any]:
        """Convert the record to dictionary representation.

        Args:
            include_payload: Whether to embed the full certificate.

        Returns:
            Dict[str, Any]: id, kind, fingerprint, bound, sound, created_at
                and optionally the certificate itself.
        """
        data = {
            'id': self.id,
            'kind': self.kind,
            'fingerprint': self.fingerprint,
            'bound': self.bound,
            'sound': self.sound,
            'created_at': self.created_at.isoformat() if self.created_at else None
        }
        if include_payload:
            data['certificate'] = json.loads(self.payload)
        return data


class ScanRecord(Base):
    """A stored scan report."""
    __tablename__ = 'scans'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    equation = Column(String(20), nullable=False)
    window = Column(String(200), nullable=False)
    max_defect = Column(String(64), nullable=False)
    payload = Column(Text, nullable=False)
    created_at = Column(DateTime, default=datetime.utcnow)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'equation': self.equation,
            'window': self.window,
            'max_defect': self.max_defect,
            'report': json.loads(self.payload),
            'created_at': self.created_at.isoformat() if self.created_at else None
        }


class DatabaseManager:
    """Manages ledger connections and operations."""

    def __init__(self, database_url: str = "sqlite:///stabkit.db"):
        """Initialize the database manager.

        Args:
            database_url: SQLAlchemy database URL
        """
        self.engine = create_engine(database_url, echo=False)
        self.Session = sessionmaker(bind=self.engine)

    def create_tables(self) -> None:
        """Create all ledger tables if they do not already exist."""
        Base.metadata.create_all(self.engine)

    def drop_tables(self) -> None:
        """Drop all ledger tables.

        Warning: This will delete every stored certificate and scan.
        """
        Base.metadata.drop_all(self.engine)

    def get_session(self):
        """Get a new database session.

        Returns:
            Session: A new SQLAlchemy session instance.
        """
        return self.Session()

    # Certificate operations
    def record_certificate(self, payload: Dict[str, Any]) -> CertificateRecord:
        """Store a certificate; storing the same certificate twice returns the first row.

        Args:
            payload: Certificate dictionary as produced by to_dict().

        Returns:
            CertificateRecord: The stored (or already existing) record.
        """
        fingerprint = certificate_fingerprint(payload)
        existing = self.get_certificate_by_fingerprint(fingerprint)
        if existing:
            logger.debug("certificate %s already recorded as %s", fingerprint[:12], existing.id)
            return existing

        session = self.get_session()
        try:
            record = CertificateRecord(
                kind=payload['kind'],
                fingerprint=fingerprint,
                bound=payload['bound'],
                sound=bool(payload['sound']),
                payload=json.dumps(payload, sort_keys=True)
            )
            session.add(record)
            session.commit()
            session.refresh(record)
            return record
        finally:
            session.close()

    def get_certificate(self, certificate_id: str) -> Optional[CertificateRecord]:
        """Get a certificate by ID.

        Args:
            certificate_id: The ledger identifier.

        Returns:
            Optional[CertificateRecord]: The record if found, None otherwise.
        """
        session = self.get_session()
        try:
            return session.query(CertificateRecord)\
                .filter(CertificateRecord.id == certificate_id)\
                .first()
        finally:
            session.close()

    def get_certificate_by_fingerprint(self, fingerprint: str) -> Optional[CertificateRecord]:
        session = self.get_session()
        try:
            return session.query(CertificateRecord)\
                .filter(CertificateRecord.fingerprint == fingerprint)\
                .first()
        finally:
            session.close()

    def list_certificates(self, kind: Optional[str] = None, limit: Optional[int] = 50,
                          offset: int = 0) -> List[CertificateRecord]:
        """List stored certificates, oldest first.

        Args:
            kind: Optional certificate kind to filter on.
            limit: Maximum number of records to return, or None for all.
                Defaults to 50.
            offset: Number of records to skip for pagination. Defaults to 0.

        Returns:
            List[CertificateRecord]: The matching records.
        """
        session = self.get_session()
        try:
            query = session.query(CertificateRecord)
            if kind:
                query = query.filter(CertificateRecord.kind == kind)
            query = query.order_by(CertificateRecord.created_at, CertificateRecord.id).offset(offset)
            if limit is not None:
                query = query.limit(limit)
            return query.all()
        finally:
            session.close()

    def delete_certificate(self, certificate_id: str) -> bool:
        """Delete a certificate.

        Returns:
            bool: True if the record was found and deleted, False otherwise.
        """
        session = self.get_session()
        try:
            record = session.query(CertificateRecord)\
                .filter(CertificateRecord.id == certificate_id)\
                .first()
            if record:
                session.delete(record)
                session.commit()
                return True
            return False
        finally:
            session.close()

    def reverify_all(self) -> List[Tuple[str, AuditResult]]:
        """Re-run the certificate audit over every stored payload.

        Returns:
            List[Tuple[str, AuditResult]]: (ledger id, audit result) pairs.
        """
        results = []
        for record in self.list_certificates(limit=None):
            result = verify_certificate(json.loads(record.payload))
            if not result.ok:
                logger.warning("stored certificate %s failed re-verification: %s",
                               record.id, ", ".join(result.mismatches))
            results.append((record.id, result))
        return results

    # Scan operations
    def record_scan(self, payload: Dict[str, Any]) -> ScanRecord:
        """Store a scan report.

        Args:
            payload: Scan report dictionary as produced by ScanReport.to_dict().

        Returns:
            ScanRecord: The newly created record.
        """
        session = self.get_session()
        try:
            record = ScanRecord(
                equation=payload['equation'],
                window=payload['window'],
                max_defect=payload['max_defect'],
                payload=json.dumps(payload, sort_keys=True)
            )
            session.add(record)
            session.commit()
            session.refresh(record)
            return record
        finally:
            session.close()

    def get_scan(self, scan_id: str) -> Optional[ScanRecord]:
        session = self.get_session()
        try:
            return session.query(ScanRecord).filter(ScanRecord.id == scan_id).first()
        finally:
            session.close()

    def list_scans(self, limit: int = 50, offset: int = 0) -> List[ScanRecord]:
        session = self.get_session()
        try:
            return session.query(ScanRecord)\
                .order_by(ScanRecord.created_at, ScanRecord.id)\
                .offset(offset)\
                .limit(limit)\
                .all()
        finally:
            session.close()
