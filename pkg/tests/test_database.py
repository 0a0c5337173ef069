"""
Tests for the DatabaseManager and ledger models.

This module covers storing, listing, deduplicating and re-auditing
certificates, and storing scan reports.
"""

import pytest
import json
import os
import tempfile

from src.database.models import DatabaseManager, CertificateRecord
from src.stability.audit import certificate_fingerprint
from src.stability.certify import StabilityBudget, certify_cauchy
from src.stability.defect import Equation, Window, sup_defect_scan
from src.stability.functions import make_additive, make_extremal_cauchy
from src.stability.groups import IntVector, int_lattice
from src.stability.hyper import HyperBudget, certify_hyper_cauchy


@pytest.fixture
def db_manager():
    """Create a temporary ledger for testing.

    Yields:
        DatabaseManager: A database manager instance connected to a
            temporary SQLite database that is cleaned up after use.
    """
    # Use a temporary file for SQLite
    fd, path = tempfile.mkstemp(suffix='.db')
    os.close(fd)

    manager = DatabaseManager(f"sqlite:///{path}")
    manager.create_tables()

    yield manager

    # Cleanup
    manager.drop_tables()
    manager.engine.dispose()
    try:
        os.unlink(path)
    except OSError:
        pass


@pytest.fixture
def cauchy_payload():
    """A Cauchy certificate of the extremal function at (1, 1).

    Returns:
        dict: The serialized certificate.
    """
    one = IntVector((1,))
    return certify_cauchy(make_extremal_cauchy(1, one), StabilityBudget(5, 1), one, one).to_dict()


@pytest.fixture
def hyper_payload():
    """A hyper Cauchy certificate of an additive function.

    Returns:
        dict: The serialized certificate.
    """
    f = make_additive(2, int_lattice())
    return certify_hyper_cauchy(f, HyperBudget.for_cauchy(1, 1), IntVector((2,)),
                                IntVector((3,)), 1).to_dict()


class TestCertificateRecords:
    """Tests for storing and fetching certificates."""

    def test_record_certificate(self, db_manager, cauchy_payload):
        """Test storing a certificate.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A serialized certificate.
        """
        record = db_manager.record_certificate(cauchy_payload)

        assert record.id is not None
        assert record.kind == 'cauchy'
        assert record.bound == '5'
        assert record.sound is True
        assert record.fingerprint == certificate_fingerprint(cauchy_payload)
        assert record.fingerprint == cauchy_payload['fingerprint']

    def test_get_certificate(self, db_manager, cauchy_payload):
        """Test retrieving a stored certificate with its payload.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A serialized certificate.
        """
        record = db_manager.record_certificate(cauchy_payload)
        fetched = db_manager.get_certificate(record.id)

        assert fetched is not None
        assert fetched.to_dict()['certificate'] == cauchy_payload

    def test_get_certificate_not_found(self, db_manager):
        """Test retrieving an unknown certificate.

        Args:
            db_manager: The database manager fixture.
        """
        assert db_manager.get_certificate('nonexistent') is None

    def test_duplicate_is_deduplicated(self, db_manager, cauchy_payload):
        """Test that storing the same certificate twice returns the first row.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A serialized certificate.
        """
        first = db_manager.record_certificate(cauchy_payload)
        second = db_manager.record_certificate(json.loads(json.dumps(cauchy_payload)))

        assert first.id == second.id
        assert len(db_manager.list_certificates()) == 1

    def test_list_by_kind(self, db_manager, cauchy_payload, hyper_payload):
        """Test filtering the listing by certificate kind.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A Cauchy certificate.
            hyper_payload: A hyper Cauchy certificate.
        """
        db_manager.record_certificate(cauchy_payload)
        db_manager.record_certificate(hyper_payload)

        assert len(db_manager.list_certificates()) == 2
        hyper = db_manager.list_certificates(kind='hyper-cauchy')
        assert [r.kind for r in hyper] == ['hyper-cauchy']

    def test_list_pagination(self, db_manager, cauchy_payload, hyper_payload):
        """Test limit and offset.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A Cauchy certificate.
            hyper_payload: A hyper Cauchy certificate.
        """
        db_manager.record_certificate(cauchy_payload)
        db_manager.record_certificate(hyper_payload)

        assert len(db_manager.list_certificates(limit=1)) == 1
        assert len(db_manager.list_certificates(limit=10, offset=1)) == 1

    def test_summary_without_payload(self, db_manager, cauchy_payload):
        """Test the listing form of a record.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A serialized certificate.
        """
        record = db_manager.record_certificate(cauchy_payload)
        summary = record.to_dict(include_payload=False)

        assert 'certificate' not in summary
        assert summary['kind'] == 'cauchy'
        assert summary['created_at'] is not None

    def test_delete_certificate(self, db_manager, cauchy_payload):
        """Test deleting a certificate.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A serialized certificate.
        """
        record = db_manager.record_certificate(cauchy_payload)

        assert db_manager.delete_certificate(record.id) is True
        assert db_manager.get_certificate(record.id) is None
        assert db_manager.delete_certificate(record.id) is False


class TestReverification:
    """Tests for re-auditing the ledger."""

    def test_reverify_all_passes(self, db_manager, cauchy_payload, hyper_payload):
        """Test that genuine certificates re-verify.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A Cauchy certificate.
            hyper_payload: A hyper Cauchy certificate.
        """
        db_manager.record_certificate(cauchy_payload)
        db_manager.record_certificate(hyper_payload)

        results = db_manager.reverify_all()

        assert len(results) == 2
        assert all(result.ok for _, result in results)

    def test_reverify_catches_edited_rows(self, db_manager, cauchy_payload):
        """Test that a payload edited inside the database fails the audit.

        Args:
            db_manager: The database manager fixture.
            cauchy_payload: A serialized certificate.
        """
        record = db_manager.record_certificate(cauchy_payload)
        tampered = dict(cauchy_payload, bound='4')

        session = db_manager.get_session()
        try:
            row = session.query(CertificateRecord).filter(CertificateRecord.id == record.id).first()
            row.payload = json.dumps(tampered)
            session.commit()
        finally:
            session.close()

        [(record_id, result)] = db_manager.reverify_all()
        assert record_id == record.id
        assert not result.ok
        assert 'bound' in result.mismatches


class TestScanRecords:
    """Tests for storing scan reports."""

    def test_record_and_get_scan(self, db_manager):
        """Test storing and fetching a scan report.

        Args:
            db_manager: The database manager fixture.
        """
        f = make_extremal_cauchy(1, IntVector((1,)))
        report = sup_defect_scan(f, Equation.CAUCHY, Window.box(int_lattice(), -4, 4), shells=[2])
        record = db_manager.record_scan(report.to_dict())

        fetched = db_manager.get_scan(record.id)
        assert fetched.max_defect == '5'
        assert fetched.equation == 'cauchy'
        assert fetched.to_dict()['report'] == report.to_dict()

    def test_list_scans(self, db_manager):
        """Test listing scan reports.

        Args:
            db_manager: The database manager fixture.
        """
        f = make_additive(1, int_lattice())
        for hi in (1, 2, 3):
            report = sup_defect_scan(f, Equation.CAUCHY, Window.box(int_lattice(), -hi, hi))
            db_manager.record_scan(report.to_dict())

        assert len(db_manager.list_scans()) == 3
        assert len(db_manager.list_scans(limit=2)) == 2
