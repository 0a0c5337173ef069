"""
Tests for the command-line interface.

Exit codes are checked through run(), which returns them instead of
exiting; output formatting is checked with click's CliRunner.
"""

import json

import pytest
from click.testing import CliRunner

from src.backend.server import create_app
from src.cli import cli, run

EXTREMAL_CAUCHY = ['--group', 'int:1', '--function', 'extremal-cauchy:eps=1,x0=1']


@pytest.fixture(autouse=True)
def ledger_url(tmp_path, monkeypatch):
    """Point the ledger at a temporary SQLite file.

    Args:
        tmp_path: Pytest temporary directory.
        monkeypatch: Pytest monkeypatch fixture.

    Returns:
        str: The database URL in use.
    """
    url = f"sqlite:///{tmp_path / 'ledger.db'}"
    monkeypatch.setenv('STABKIT_DATABASE_URL', url)
    monkeypatch.delenv('STABKIT_JOBS', raising=False)
    monkeypatch.delenv('STABKIT_SEED', raising=False)
    return url


@pytest.fixture
def certificate_file(tmp_path, capsys):
    """Write the extremal Cauchy certificate to a file.

    Args:
        tmp_path: Pytest temporary directory.
        capsys: Pytest output capture.

    Returns:
        Path: The certificate file.
    """
    path = tmp_path / 'certificate.json'
    assert run(['certify', *EXTREMAL_CAUCHY, '--r', '5', '--eta', '1',
                '--x', '1', '--y', '1', '--output', str(path)]) == 0
    capsys.readouterr()
    return path


class TestScanCommand:
    """Tests for the scan command."""

    def test_scan_csv(self, capsys):
        """Test the CSV shell profile.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['scan', *EXTREMAL_CAUCHY, '--window', '-2..2', '--shells', '1,2'])

        assert code == 0
        assert capsys.readouterr().out == (
            "kind,r,value,x,y\n"
            "max,,5,int:[1],int:[1]\n"
            "shell,1,5,int:[1],int:[1]\n"
            "shell,2,1,int:[2],int:[2]\n"
        )

    def test_scan_json_with_weight(self, capsys):
        """Test a weighted scan rendered as JSON.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['scan', *EXTREMAL_CAUCHY, '--window', '-2..2', '--weight', 'linear',
                    '--format', 'json'])
        data = json.loads(capsys.readouterr().out)

        assert code == 0
        assert data['weight'] == 'linear'
        assert data['max_defect'] == '9'

    def test_scan_store(self, capsys):
        """Test that --store records the report.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['scan', *EXTREMAL_CAUCHY, '--window', '-2..2', '--store'])

        assert code == 0
        assert 'stored scan' in capsys.readouterr().err


class TestCertifyCommand:
    """Tests for the certify and verify commands."""

    def test_certify_json(self, capsys):
        """Test the extremal Cauchy certificate.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['certify', *EXTREMAL_CAUCHY, '--r', '5', '--eta', '1', '--x', '1', '--y', '1'])
        data = json.loads(capsys.readouterr().out)

        assert code == 0
        assert data['bound'] == '5'
        assert data['witnesses'] == {'u': 'int:[6]', 'v': 'int:[13]'}

    def test_certify_jensen_csv(self, capsys):
        """Test a Jensen certificate as CSV with negative points.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['certify', '--group', 'dyadic:1', '--function', 'extremal-jensen:eps=1',
                    '--equation', 'jensen', '--r', '5', '--eta', '1', '--x', '1', '--y', '-1',
                    '--format', 'csv'])
        lines = capsys.readouterr().out.splitlines()

        assert code == 0
        assert lines[-2] == 'bound,5,4,dyadic:[1/2^0],dyadic:[-1/2^0]'

    def test_verify_passes(self, certificate_file, capsys):
        """Test that an issued certificate verifies.

        Args:
            certificate_file: Certificate file fixture.
            capsys: Pytest output capture.
        """
        assert run(['verify', str(certificate_file)]) == 0
        assert json.loads(capsys.readouterr().out)['ok'] is True

    def test_verify_option_of_certify(self, certificate_file):
        """Test certify --verify.

        Args:
            certificate_file: Certificate file fixture.
        """
        assert run(['certify', '--verify', str(certificate_file)]) == 0

    def test_verify_tampered(self, certificate_file, capsys):
        """Test that a tampered file exits 1.

        Args:
            certificate_file: Certificate file fixture.
            capsys: Pytest output capture.
        """
        data = json.loads(certificate_file.read_text())
        data['terms'][0]['value'] = '0'
        certificate_file.write_text(json.dumps(data))

        assert run(['verify', str(certificate_file)]) == 1
        assert json.loads(capsys.readouterr().out)['mismatches'] == ['fingerprint', 'terms']

    @pytest.mark.parametrize('field, edit', [
        ('budget', lambda data: data['budget'].update(r='9/2')),
        ('function', lambda data: data['function']['overrides'].insert(0, ['int:[100]', '7'])),
    ])
    def test_verify_input_edits_exit_1(self, certificate_file, capsys, field, edit):
        """Test that edits to the embedded inputs exit 1.

        Args:
            certificate_file: Certificate file fixture.
            capsys: Pytest output capture.
            field: The edited field.
            edit: Function applying the edit in place.
        """
        data = json.loads(certificate_file.read_text())
        edit(data)
        certificate_file.write_text(json.dumps(data))

        assert run(['verify', str(certificate_file)]) == 1
        assert json.loads(capsys.readouterr().out)['mismatches'] == ['fingerprint']

    def test_verify_list(self, certificate_file, tmp_path, capsys):
        """Test a file holding several certificates.

        Args:
            certificate_file: Certificate file fixture.
            tmp_path: Pytest temporary directory.
            capsys: Pytest output capture.
        """
        payload = json.loads(certificate_file.read_text())
        both = tmp_path / 'both.json'
        both.write_text(json.dumps([payload, payload]))

        assert run(['verify', str(both)]) == 0
        assert len(json.loads(capsys.readouterr().out)['results']) == 2

    def test_missing_point_is_usage_error(self, capsys):
        """Test that a missing --x exits 2.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['certify', *EXTREMAL_CAUCHY, '--r', '5', '--eta', '1', '--y', '1'])

        assert code == 2
        assert '--x' in capsys.readouterr().err

    def test_unknown_option_is_usage_error(self):
        """Test that unknown options exit 2."""
        assert run(['scan', '--frobnicate']) == 2

    @pytest.mark.parametrize('group, function_spec, window', [
        ('int:1', 'bogus', '-2..2'),
        ('int:1', 'extremal-cauchy:eps=1,x0=1', 'abc'),
        ('foo:1', 'zero', '-2..2'),
    ])
    def test_rejected_grammar_is_usage_error(self, capsys, group, function_spec, window):
        """Test that malformed group, function and window texts exit 2.

        Args:
            capsys: Pytest output capture.
            group: Group text.
            function_spec: Function text.
            window: Window text.
        """
        code = run(['scan', '--group', group, '--function', function_spec, '--window', window])

        assert code == 2
        assert 'Error:' in capsys.readouterr().err

    def test_toolkit_error_exits_1(self, capsys):
        """Test that toolkit errors print a message and exit 1.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['certify', '--group', 'int:1', '--function', 'zero', '--equation', 'jensen',
                    '--r', '1', '--eta', '0', '--x', '1', '--y', '1'])

        assert code == 1
        assert 'Error:' in capsys.readouterr().err

    def test_cli_and_api_agree(self, capsys):
        """Test that the CLI and the API emit the same certificate.

        Args:
            capsys: Pytest output capture.
        """
        run(['certify', *EXTREMAL_CAUCHY, '--r', '5', '--eta', '1', '--x', '1', '--y', '1'])
        from_cli = json.loads(capsys.readouterr().out)

        client = create_app({'TESTING': True, 'DATABASE_URL': 'sqlite:///:memory:'}).test_client()
        response = client.post('/api/certify', json={
            'group': 'int:1', 'function': 'extremal-cauchy:eps=1,x0=1', 'equation': 'cauchy',
            'x': '1', 'y': '1', 'r': '5', 'eta': '1',
        })

        assert json.loads(response.data)['certificate'] == from_cli


class TestHyperAndSharpnessCommands:
    """Tests for the hyper and sharpness commands."""

    def test_hyper_schedule(self, capsys):
        """Test that several --eps give a JSON list.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['hyper', '--group', 'int:1', '--function', 'additive:slope=2',
                    '--x', '1', '--y', '-3', '--r', '1', '--k', '1', '--eps', '1', '--eps', '1/2'])
        data = json.loads(capsys.readouterr().out)

        assert code == 0
        assert [c['epsilon'] for c in data] == ['1', '1/2']
        assert all(c['below_epsilon'] for c in data)

    def test_sharpness(self, capsys):
        """Test that the search lands on 5 eps.

        Args:
            capsys: Pytest output capture.
        """
        code = run(['sharpness', '--group', 'int:1', '--eps', '1', '--window', '-4..4'])

        assert code == 0
        assert json.loads(capsys.readouterr().out)['best_sup'] == '5'


class TestDemoAndLedgerCommands:
    """Tests for demos and the ledger."""

    def test_binseq_demo(self, capsys):
        """Test the counterexample transcript.

        Args:
            capsys: Pytest output capture.
        """
        assert run(['demo', 'binseq-counterexample']) == 0
        out = capsys.readouterr().out
        assert 'counterexample confirmed' in out
        assert 'DoublingBounded' in out

    def test_ledger_round_trip(self, capsys):
        """Test --store, ledger list and ledger reverify.

        Args:
            capsys: Pytest output capture.
        """
        run(['certify', *EXTREMAL_CAUCHY, '--r', '5', '--eta', '1', '--x', '1', '--y', '1', '--store'])
        capsys.readouterr()

        assert run(['ledger', 'list']) == 0
        listing = json.loads(capsys.readouterr().out)
        assert [c['kind'] for c in listing['certificates']] == ['cauchy']

        assert run(['ledger', 'reverify']) == 0
        assert capsys.readouterr().out.strip().endswith('cauchy ok')


class TestCliRunner:
    """Tests through click's test runner."""

    def test_extremal_cauchy_demo(self):
        """Test the extremal Cauchy transcript."""
        result = CliRunner().invoke(cli, ['demo', 'extremal-cauchy'])

        assert result.exit_code == 0
        assert 'max defect over int:1 [-16..16]: 5 at (int:[1], int:[1])' in result.output
        assert 'bound 5 = 5*eta' in result.output

    def test_extremal_jensen_demo(self):
        """Test the extremal Jensen transcript."""
        result = CliRunner().invoke(cli, ['demo', 'extremal-jensen'])

        assert result.exit_code == 0
        assert 'max quadrupled defect' in result.output
        assert 'bound 4 = 4*eta' in result.output

    def test_help_lists_commands(self):
        """Test the top-level help."""
        result = CliRunner().invoke(cli, ['--help'])

        assert result.exit_code == 0
        for command in ('scan', 'certify', 'hyper', 'sharpness', 'verify', 'demo', 'ledger'):
            assert command in result.output

    def test_certify_help_names_the_bits_cap(self):
        """Test that certify --help documents the harmonic witness cap."""
        result = CliRunner().invoke(cli, ['certify', '--help'])

        assert result.exit_code == 0
        assert 'WitnessOutOfRange' in result.output
