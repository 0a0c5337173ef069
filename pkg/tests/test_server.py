"""
Tests for the Flask server and API endpoints.

This module covers every JSON endpoint, the ledger routes and the
mapping of toolkit errors to 400 responses.
"""

import pytest
import json

from src.backend.server import create_app


@pytest.fixture
def app():
    """Create a test application instance.

    Yields:
        Flask: A configured Flask application instance for testing.
    """
    test_config = {
        'TESTING': True,
        'DATABASE_URL': 'sqlite:///:memory:',
    }
    application = create_app(test_config)

    yield application


@pytest.fixture
def client(app):
    """Create a test client.

    Args:
        app: The Flask application fixture.

    Returns:
        FlaskClient: A test client for making HTTP requests.
    """
    return app.test_client()


CERTIFY_BODY = {
    'group': 'int:1',
    'function': 'extremal-cauchy:eps=1,x0=1',
    'equation': 'cauchy',
    'x': '1',
    'y': '1',
    'r': '5',
    'eta': '1',
}


@pytest.fixture
def certificate_id(client):
    """Issue a certificate and return its ledger id.

    Args:
        client: The Flask test client fixture.

    Returns:
        str: The ledger id of the issued certificate.
    """
    response = client.post('/api/certify', json=CERTIFY_BODY)
    return json.loads(response.data)['id']


class TestHealthEndpoint:
    """Tests for the health check endpoint."""

    def test_health_returns_healthy_status(self, client):
        """Test that health endpoint returns healthy status.

        Args:
            client: The Flask test client fixture.
        """
        response = client.get('/api/health')
        data = json.loads(response.data)

        assert response.status_code == 200
        assert data['status'] == 'healthy'
        assert 'timestamp' in data


class TestScanEndpoint:
    """Tests for window scans."""

    def test_scan(self, client):
        """Test scanning the extremal Cauchy function.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/scan', json={
            'group': 'int:1',
            'function': 'extremal-cauchy:eps=1,x0=1',
            'equation': 'cauchy',
            'window': '-8..8',
            'shells': '2,4',
        })
        data = json.loads(response.data)

        assert response.status_code == 200
        assert data['report']['max_defect'] == '5'
        assert [s['sup'] for s in data['report']['shell_profile']] == ['1', '1']

    def test_scan_is_stored(self, client):
        """Test that scans can be fetched by id.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/scan', json={
            'group': 'dyadic:1',
            'function': 'extremal-jensen:eps=1',
            'equation': 'jensen-quad',
            'window': '-2..2',
            'exponent': 1,
        })
        scan_id = json.loads(response.data)['id']

        fetched = client.get(f'/api/scans/{scan_id}')
        assert fetched.status_code == 200
        assert json.loads(fetched.data)['max_defect'] == '4'

    def test_scan_missing_fields(self, client):
        """Test that missing fields give 400.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/scan', json={'group': 'int:1'})

        assert response.status_code == 400
        assert 'window' in json.loads(response.data)['error']

    def test_scan_unknown_scan_id(self, client):
        """Test fetching an unknown scan.

        Args:
            client: The Flask test client fixture.
        """
        assert client.get('/api/scans/nonexistent').status_code == 404


class TestCertifyEndpoint:
    """Tests for certificate issuance."""

    def test_certify(self, client):
        """Test issuing the extremal Cauchy certificate.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/certify', json=CERTIFY_BODY)
        data = json.loads(response.data)

        assert response.status_code == 200
        assert data['certificate']['bound'] == '5'
        assert data['certificate']['sound'] is True
        assert data['id']

    def test_certify_with_scan_budget(self, client):
        """Test a budget derived from a window scan.

        Args:
            client: The Flask test client fixture.
        """
        body = dict(CERTIFY_BODY, window='-16..16', shells='1,2,4')
        del body['r'], body['eta']
        response = client.post('/api/certify', json=body)
        data = json.loads(response.data)

        assert response.status_code == 200
        assert data['certificate']['budget'] == {'r': '2', 'eta': '1'}

    def test_certify_without_budget(self, client):
        """Test that a certificate needs a budget.

        Args:
            client: The Flask test client fixture.
        """
        body = dict(CERTIFY_BODY)
        del body['eta']
        response = client.post('/api/certify', json=body)
        data = json.loads(response.data)

        assert response.status_code == 400
        assert data['type'] == 'InvalidParameter'

    def test_certify_jensen_on_integers(self, client):
        """Test that toolkit errors map to 400.

        Args:
            client: The Flask test client fixture.
        """
        body = dict(CERTIFY_BODY, function='zero', equation='jensen')
        response = client.post('/api/certify', json=body)

        assert response.status_code == 400
        assert json.loads(response.data)['type'] == 'NotDivisible'

    def test_get_certificate(self, client, certificate_id):
        """Test fetching a stored certificate.

        Args:
            client: The Flask test client fixture.
            certificate_id: Ledger id fixture.
        """
        response = client.get(f'/api/certificates/{certificate_id}')
        data = json.loads(response.data)

        assert response.status_code == 200
        assert data['certificate']['kind'] == 'cauchy'

    def test_get_certificate_not_found(self, client):
        """Test fetching an unknown certificate.

        Args:
            client: The Flask test client fixture.
        """
        assert client.get('/api/certificates/nonexistent').status_code == 404

    def test_list_certificates(self, client, certificate_id):
        """Test the ledger listing.

        Args:
            client: The Flask test client fixture.
            certificate_id: Ledger id fixture.
        """
        response = client.get('/api/certificates?kind=cauchy&limit=5')
        data = json.loads(response.data)

        assert data['count'] == 1
        assert data['certificates'][0]['id'] == certificate_id
        assert 'certificate' not in data['certificates'][0]


class TestHyperEndpoint:
    """Tests for hyper certificates."""

    def test_hyper_schedule(self, client):
        """Test one certificate per target epsilon.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/hyper', json={
            'group': 'int:1',
            'function': 'additive:slope=3',
            'equation': 'cauchy',
            'x': '2',
            'y': '-7',
            'r': '1',
            'K': '1',
            'schedule': ['1', '1/2', '1/4'],
        })
        data = json.loads(response.data)

        assert response.status_code == 200
        assert len(data['certificates']) == 3
        assert [c['certificate']['R'] for c in data['certificates']] == ['5', '10', '20']
        assert all(c['certificate']['bound'] == '0' for c in data['certificates'])

    def test_hyper_on_bits(self, client):
        """Test that the binary-sequence group has no hyper witnesses.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/hyper', json={
            'group': 'bits',
            'function': 'hyper-counterexample',
            'equation': 'cauchy',
            'x': '{3}',
            'y': '{3}',
            'r': '1',
            'K': '1',
        })

        assert response.status_code == 400
        assert json.loads(response.data)['type'] == 'DoublingBounded'


class TestVerifyEndpoint:
    """Tests for certificate audits."""

    def test_verify_issued_certificate(self, client):
        """Test that an issued certificate verifies.

        Args:
            client: The Flask test client fixture.
        """
        issued = json.loads(client.post('/api/certify', json=CERTIFY_BODY).data)['certificate']
        response = client.post('/api/verify', json={'certificate': issued})
        data = json.loads(response.data)

        assert data['ok'] is True
        assert data['mismatches'] == []

    def test_verify_tampered_certificate(self, client):
        """Test that a tampered bound fails.

        Args:
            client: The Flask test client fixture.
        """
        issued = json.loads(client.post('/api/certify', json=CERTIFY_BODY).data)['certificate']
        issued['bound'] = '3'
        data = json.loads(client.post('/api/verify', json=issued).data)

        assert data['ok'] is False
        assert 'bound' in data['mismatches']

    def test_verify_empty_body(self, client):
        """Test that an empty body is rejected.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/verify', data='', content_type='application/json')

        assert response.status_code == 400


class TestSharpnessEndpoint:
    """Tests for the sharpness search."""

    def test_sharpness(self, client):
        """Test the exact Cauchy ceiling on a small window.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/sharpness', json={
            'group': 'int:1',
            'equation': 'cauchy',
            'eps': '1',
            'window': '-4..4',
            'r': '2',
        })
        data = json.loads(response.data)

        assert response.status_code == 200
        assert data['result']['best_sup'] == '5'

    def test_sharpness_bad_radius(self, client):
        """Test that a radius outside the window is rejected.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/sharpness', json={
            'group': 'int:1',
            'equation': 'cauchy',
            'eps': '1',
            'window': '-2..2',
            'r': '9',
        })

        assert response.status_code == 400
        assert json.loads(response.data)['type'] == 'InvalidParameter'


class TestErrorHandling:
    """Tests for malformed input."""

    def test_invalid_json_body(self, client):
        """Test that a non-JSON body counts as missing fields.

        Args:
            client: The Flask test client fixture.
        """
        response = client.post('/api/certify', data='not json', content_type='application/json')

        assert response.status_code == 400

    def test_parse_error(self, client):
        """Test that malformed texts give a ParseError response.

        Args:
            client: The Flask test client fixture.
        """
        body = dict(CERTIFY_BODY, x='one')
        response = client.post('/api/certify', json=body)

        assert response.status_code == 400
        assert json.loads(response.data)['type'] == 'ParseError'
