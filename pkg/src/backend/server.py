"""
stabkit - Flask server

This module provides a JSON API over the toolkit: window scans,
certificates, hyper certificates, certificate audits and sharpness
searches, with issued results kept in the ledger.
"""

import logging
import os
from datetime import datetime
from typing import Dict, Any, Optional

from flask import Flask, request, jsonify
from flask_cors import CORS

from ..database.models import DatabaseManager
from ..stability import service
from ..stability.audit import verify_certificate
from ..stability.exceptions import StabilityError


logger = logging.getLogger(__name__)


def create_app(config: Optional[Dict[str, Any]] = None) -> Flask:
    """Create and configure the Flask application.

    Args:
        config: Optional configuration dictionary

    Returns:
        Configured Flask application
    """
    app = Flask(__name__)

    # Apply configuration
    app.config['DATABASE_URL'] = os.environ.get('STABKIT_DATABASE_URL', 'sqlite:///stabkit.db')
    app.config['JOBS'] = int(os.environ.get('STABKIT_JOBS', 1))
    app.config['EXHAUSTIVE_LIMIT'] = int(os.environ.get('STABKIT_EXHAUSTIVE_LIMIT', 13))

    if config:
        app.config.update(config)

    # Enable CORS
    CORS(app)

    # Initialize ledger
    db = DatabaseManager(app.config['DATABASE_URL'])
    db.create_tables()
    app.db = db

    register_routes(app)
    register_error_handlers(app)

    return app


def _body() -> Dict[str, Any]:
    data = request.get_json(silent=True)
    return data if isinstance(data, dict) else {}


def _require(data: Dict[str, Any], *keys: str) -> Optional[str]:
    missing = [key for key in keys if data.get(key) in (None, '')]
    if missing:
        return f"Missing required field(s): {', '.join(missing)}"
    return None


def _text(value: Any) -> str:
    return value if isinstance(value, str) else str(value)


def register_error_handlers(app: Flask) -> None:
    """Map toolkit errors to 400 responses."""

    @app.errorhandler(StabilityError)
    def handle_stability_error(exc: StabilityError):
        logger.info("rejected request: %s", exc)
        return jsonify({'error': str(exc), 'type': type(exc).__name__}), 400


def register_routes(app: Flask) -> None:
    """Register all HTTP routes.

    Args:
        app: Flask application instance
    """

    @app.route('/api/health')
    def health():
        """Health check endpoint.

        Returns:
            Response: JSON with status and current timestamp.
        """
        return jsonify({'status': 'healthy', 'timestamp': datetime.utcnow().isoformat()})

    @app.route('/api/scan', methods=['POST'])
    def scan():
        """Scan a window and store the report.

        Expects JSON with group, function, equation and window; shells,
        exponent, overrides and weight are optional.

        Returns:
            Response: JSON with the report and its ledger id.
        """
        data = _body()
        error = _require(data, 'group', 'function', 'equation', 'window')
        if error:
            return jsonify({'error': error}), 400

        report = service.run_scan(
            data['group'], data['function'], data['equation'], _text(data['window']),
            shells=_text(data.get('shells', '')),
            exponent=int(data.get('exponent', 0)),
            overrides=data.get('overrides', []),
            weight=data.get('weight'),
            jobs=app.config['JOBS'],
        )
        payload = report.to_dict()
        record = app.db.record_scan(payload)
        return jsonify({'id': record.id, 'report': payload})

    @app.route('/api/certify', methods=['POST'])
    def certify():
        """Issue a Cauchy or Jensen certificate.

        Expects JSON with group, function, equation, x, y and either r and
        eta or window and shells.

        Returns:
            Response: JSON with the certificate and its ledger id.
        """
        data = _body()
        error = _require(data, 'group', 'function', 'equation', 'x', 'y')
        if error:
            return jsonify({'error': error}), 400

        certificate = service.run_certify(
            data['group'], data['function'], data['equation'],
            _text(data['x']), _text(data['y']),
            r=data.get('r'), eta=data.get('eta'),
            overrides=data.get('overrides', []),
            window=data.get('window'), shells=data.get('shells'),
            exponent=int(data.get('exponent', 0)),
            jobs=app.config['JOBS'],
        )
        payload = certificate.to_dict()
        record = app.db.record_certificate(payload)
        return jsonify({'id': record.id, 'certificate': payload})

    @app.route('/api/hyper', methods=['POST'])
    def hyper():
        """Issue hyper certificates for an epsilon schedule.

        Expects JSON with group, function, equation, x, y, r, K and either
        eps or schedule; phi defaults to 'linear'.

        Returns:
            Response: JSON with one certificate (and ledger id) per target.
        """
        data = _body()
        error = _require(data, 'group', 'function', 'equation', 'x', 'y', 'r', 'K')
        if error:
            return jsonify({'error': error}), 400

        schedule = data.get('schedule') or [data.get('eps', '1')]
        certificates = service.run_hyper(
            data['group'], data['function'], data['equation'],
            _text(data['x']), _text(data['y']), data['r'], data['K'],
            phi=data.get('phi', 'linear'), schedule=schedule,
            overrides=data.get('overrides', []),
        )
        results = []
        for certificate in certificates:
            payload = certificate.to_dict()
            results.append({'id': app.db.record_certificate(payload).id, 'certificate': payload})
        return jsonify({'certificates': results})

    @app.route('/api/verify', methods=['POST'])
    def verify():
        """Audit a certificate.

        Accepts either a bare certificate object or {'certificate': {...}}.

        Returns:
            Response: JSON with ok, kind and the mismatching fields.
        """
        data = _body()
        payload = data.get('certificate', data)
        if not payload:
            return jsonify({'error': 'Certificate required'}), 400
        return jsonify(verify_certificate(payload).to_dict())

    @app.route('/api/sharpness', methods=['POST'])
    def sharpness():
        """Run the adversarial sharpness search.

        Expects JSON with group, equation, eps, window and r; exponent,
        step, bound, strategy, seed and iterations are optional.

        Returns:
            Response: JSON with the search result.
        """
        data = _body()
        error = _require(data, 'group', 'equation', 'eps', 'window', 'r')
        if error:
            return jsonify({'error': error}), 400

        result = service.run_sharpness(
            data['group'], data['equation'], data['eps'], _text(data['window']), data['r'],
            exponent=int(data.get('exponent', 0)),
            step=data.get('step'),
            bound=data.get('bound'),
            strategy=data.get('strategy', 'auto'),
            seed=int(data.get('seed', 0)),
            iterations=int(data.get('iterations', 4000)),
            exhaustive_limit=app.config['EXHAUSTIVE_LIMIT'],
        )
        return jsonify({'result': result.to_dict()})

    @app.route('/api/certificates')
    def list_certificates():
        """List stored certificates.

        Returns:
            Response: JSON with certificates (without payloads) and count.
                Supports query params 'kind', 'limit' (default 50) and
                'offset' (default 0).
        """
        kind = request.args.get('kind')
        limit = request.args.get('limit', 50, type=int)
        offset = request.args.get('offset', 0, type=int)
        records = app.db.list_certificates(kind=kind, limit=limit, offset=offset)
        return jsonify({
            'certificates': [r.to_dict(include_payload=False) for r in records],
            'count': len(records)
        })

    @app.route('/api/certificates/<certificate_id>')
    def get_certificate(certificate_id: str):
        """Get a stored certificate.

        Args:
            certificate_id: The ledger identifier.

        Returns:
            Response: JSON with the record, or 404 if not found.
        """
        record = app.db.get_certificate(certificate_id)
        if not record:
            return jsonify({'error': 'Certificate not found'}), 404
        return jsonify(record.to_dict())

    @app.route('/api/scans/<scan_id>')
    def get_scan(scan_id: str):
        """Get a stored scan report.

        Args:
            scan_id: The ledger identifier.

        Returns:
            Response: JSON with the record, or 404 if not found.
        """
        record = app.db.get_scan(scan_id)
        if not record:
            return jsonify({'error': 'Scan not found'}), 404
        return jsonify(record.to_dict())
