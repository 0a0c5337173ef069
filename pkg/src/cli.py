"""
Command-line interface for stabkit.

Usage:
    python run.py scan --group int:1 --function extremal-cauchy:eps=1,x0=1 \\
        --equation cauchy --window -16..16 --shells 1,2,4,8 --format csv
    python run.py certify --group int:1 --function extremal-cauchy:eps=1,x0=1 \\
        --r 5 --eta 1 --x 1 --y 1
    python run.py hyper --group int:1 --function additive:slope=2 --r 1 --k 1 --eps 1 --eps 1/2
    python run.py sharpness --group int:1 --equation cauchy --eps 1 --window -4..4 --r 2
    python run.py verify certificate.json
    python run.py demo binseq-counterexample
"""

import json
import logging
import sys
from typing import Any, List, Optional, Sequence

import click

from .config import Settings, load_settings
from .stability import service
from .stability.audit import verify_certificate
from .stability.certify import certify_cauchy, certify_jensen, StabilityBudget
from .stability.defect import Equation, Window, sup_defect_scan
from .stability.exceptions import ParseError, StabilityError
from .stability.functions import make_extremal_cauchy, make_extremal_jensen
from .stability.groups import dyadic_lattice, format_rational, int_lattice
from .stability.hyper import binseq_counterexample_report
from .stability.reports import certificates_to_csv, render, to_json

__all__ = [
    "cli",
    "run",
]

logger = logging.getLogger(__name__)

FORMATS = click.Choice(['csv', 'json'])
DEMOS = ('binseq-counterexample', 'extremal-cauchy', 'extremal-jensen')


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


def _ledger(settings: Settings):
    from .database.models import DatabaseManager

    db = DatabaseManager(settings.database_url)
    db.create_tables()
    return db


def _require(**values: Any) -> None:
    missing = [name.replace('_', '-') for name, value in values.items() if value is None]
    if missing:
        raise click.UsageError("missing option(s): " + ", ".join(f"--{name}" for name in missing))


def _verify_file(path: str) -> int:
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            click.echo(f"Error: {path} is not valid JSON: {exc}", err=True)
            return 1
    payloads = data if isinstance(data, list) else [data]
    results = [verify_certificate(payload) for payload in payloads]
    report = [result.to_dict() for result in results]
    click.echo(to_json(report[0] if len(report) == 1 else {'results': report}), nl=False)
    return 0 if all(result.ok for result in results) else 1


function_options = [
    click.option('--group', help="Group spec: int:N, dyadic:N or bits."),
    click.option('--function', 'function_spec', help="Function spec, e.g. extremal-cauchy:eps=1,x0=1."),
    click.option('--override', 'overrides', multiple=True, help="Extra override 'element=value'."),
]


def with_function_options(command):
    for option in reversed(function_options):
        command = option(command)
    return command


@click.group()
@click.version_option(version="1.0.0", prog_name="stabkit")
@click.option('--log-level', default=None, help="Logging level on stderr (default STABKIT_LOG_LEVEL).")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str]):
    """
    Stability toolkit - exact defect scans and certificates for the
    Cauchy and Jensen equations on metric abelian groups.
    """
    settings = load_settings()
    level = (log_level or settings.log_level).upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING),
                        format='%(levelname)s %(name)s: %(message)s')
    ctx.obj = settings


@cli.command()
@with_function_options
@click.option('--equation', default='cauchy', type=click.Choice(service.EQUATION_NAMES))
@click.option('--window', required=True, help="Window: lo..hi for lattices, n for bits.")
@click.option('--exponent', default=0, type=int, help="Dyadic step 1/2^exponent.")
@click.option('--shells', default='', help="Comma-separated shell radii.")
@click.option('--weight', default=None, help="Weight: linear, quadratic or affine-floor:offset=..,slope=..")
@click.option('--jobs', default=None, type=int, help="Worker processes (default STABKIT_JOBS).")
@click.option('--format', 'fmt', default='csv', type=FORMATS)
@click.option('--output', default=None, type=click.Path(dir_okay=False))
@click.option('--store', is_flag=True, help="Record the report in the ledger.")
@click.pass_obj
def scan(settings: Settings, group, function_spec, overrides, equation, window, exponent,
         shells, weight, jobs, fmt, output, store):
    """Scan every pair of a window and tabulate the shell profile."""
    _require(group=group, function=function_spec)
    report = service.run_scan(group, function_spec, equation, window, shells, exponent,
                              overrides, weight, jobs or settings.jobs)
    _emit(render(report, fmt), output)
    if store:
        record = _ledger(settings).record_scan(report.to_dict())
        click.echo(f"stored scan {record.id}", err=True)
    return 0


@cli.command()
@with_function_options
@click.option('--equation', default='cauchy', type=click.Choice(service.EQUATION_NAMES))
@click.option('--r', 'r', default=None,
              help="Budget radius. On bits, r >= 6 or 2r + 2|x| + |y| > 12 raises WitnessOutOfRange.")
@click.option('--eta', default=None, help="Budget defect bound.")
@click.option('--x', 'x', default=None, help="First point.")
@click.option('--y', 'y', default=None, help="Second point.")
@click.option('--window', default=None, help="Window for a scan-derived budget.")
@click.option('--shells', default=None, help="Radius grid for a scan-derived budget.")
@click.option('--exponent', default=0, type=int)
@click.option('--verify', 'verify_path', default=None, type=click.Path(exists=True, dir_okay=False),
              help="Re-check a certificate file instead of issuing one.")
@click.option('--format', 'fmt', default='json', type=FORMATS)
@click.option('--output', default=None, type=click.Path(dir_okay=False))
@click.option('--store', is_flag=True, help="Record the certificate in the ledger.")
@click.pass_obj
def certify(settings: Settings, group, function_spec, overrides, equation, r, eta, x, y,
            window, shells, exponent, verify_path, fmt, output, store):
    """Issue a Cauchy (five-term) or Jensen (four-term) certificate at (x, y).

    On bits the witnesses are harmonic prefixes whose norm targets are
    capped at 12. The Cauchy witness v targets r + |x| + |y| + |u|, which
    is at least 2r + 2|x| + |y|, so radii with that sum above 12, and
    every r >= 6, fail with WitnessOutOfRange.
    """
    if verify_path:
        return _verify_file(verify_path)
    _require(group=group, function=function_spec, x=x, y=y)
    certificate = service.run_certify(group, function_spec, equation, x, y, r=r, eta=eta,
                                      overrides=overrides, window=window, shells=shells,
                                      exponent=exponent, jobs=settings.jobs)
    _emit(render(certificate, fmt), output)
    if store:
        record = _ledger(settings).record_certificate(certificate.to_dict())
        click.echo(f"stored certificate {record.id}", err=True)
    if not certificate.sound:
        return 1
    return 0


@cli.command()
@with_function_options
@click.option('--equation', default='cauchy', type=click.Choice(service.EQUATION_NAMES))
@click.option('--x', 'x', required=True)
@click.option('--y', 'y', required=True)
@click.option('--r', 'r', required=True, help="Budget radius.")
@click.option('--k', 'k', required=True, help="Weighted bound K.")
@click.option('--phi', default='linear', help="Weight: linear, quadratic or affine-floor:offset=..,slope=..")
@click.option('--eps', 'schedule', multiple=True, default=('1',), help="Target epsilon; repeat for a schedule.")
@click.option('--format', 'fmt', default='json', type=FORMATS)
@click.option('--output', default=None, type=click.Path(dir_okay=False))
@click.option('--store', is_flag=True, help="Record the certificates in the ledger.")
@click.pass_obj
def hyper(settings: Settings, group, function_spec, overrides, equation, x, y, r, k, phi,
          schedule, fmt, output, store):
    """Issue hyperstability certificates for a decreasing epsilon schedule."""
    _require(group=group, function=function_spec)
    certificates = service.run_hyper(group, function_spec, equation, x, y, r, k, phi,
                                     schedule, overrides)
    if fmt == 'csv':
        text = certificates_to_csv(certificates)
    elif len(certificates) == 1:
        text = to_json(certificates[0].to_dict())
    else:
        text = to_json([c.to_dict() for c in certificates])
    _emit(text, output)
    if store:
        db = _ledger(settings)
        for certificate in certificates:
            click.echo(f"stored certificate {db.record_certificate(certificate.to_dict()).id}", err=True)
    return 0 if all(c.sound for c in certificates) else 1


@cli.command()
@click.option('--group', required=True, help="Lattice group spec: int:1 or dyadic:1.")
@click.option('--equation', default='cauchy', type=click.Choice(service.EQUATION_NAMES))
@click.option('--eps', required=True, help="Shell bound epsilon.")
@click.option('--window', required=True, help="Symmetric window -w..w.")
@click.option('--exponent', default=0, type=int)
@click.option('--r', 'r', default='2', help="Shell radius (default 2).")
@click.option('--step', default=None, help="Value grid step (default eps/2).")
@click.option('--bound', default=None, type=int, help="Grid half-width in steps (default 6).")
@click.option('--strategy', default='auto', type=click.Choice(['auto', 'exhaustive', 'hill-climb']))
@click.option('--iterations', default=4000, type=int)
@click.option('--seed', default=None, type=int, help="Hill-climbing seed (default STABKIT_SEED).")
@click.option('--format', 'fmt', default='json', type=FORMATS)
@click.option('--output', default=None, type=click.Path(dir_okay=False))
@click.pass_obj
def sharpness(settings: Settings, group, equation, eps, window, exponent, r, step, bound,
              strategy, iterations, seed, fmt, output):
    """Search for the largest defect compatible with an eps bound on far shells."""
    result = service.run_sharpness(group, equation, eps, window, r, exponent, step, bound,
                                   strategy, settings.seed if seed is None else seed,
                                   iterations, settings.exhaustive_limit)
    _emit(render(result, fmt), output)
    factor = 5 if result.equation is Equation.CAUCHY else 4
    if result.best_sup > factor * result.eps:
        logger.error("search exceeded the %s*eps ceiling: %s", factor, result.best_sup)
        return 1
    return 0


@cli.command()
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
def verify(path: str):
    """Re-check a certificate file exactly; exit 1 on any mismatch."""
    return _verify_file(path)


def _demo_extremal_cauchy(jobs: int) -> List[str]:
    x0 = int_lattice().basis_multiple(1)
    f = make_extremal_cauchy(1, x0)
    report = sup_defect_scan(f, Equation.CAUCHY, Window.box(int_lattice(), -16, 16),
                             shells=(2, 4, 8), jobs=jobs)
    certificate = certify_cauchy(f, StabilityBudget(5, 1), x0, x0)
    lines = [f"extremal Cauchy function, eps = 1, x0 = {x0}",
             f"max defect over {report.window}: {format_rational(report.max_defect)}"
             f" at ({report.argmax[0]}, {report.argmax[1]})"]
    lines += [f"  shell r >= {format_rational(s.r)}: sup = {format_rational(s.sup)}"
              for s in report.shell_profile]
    lines.append(f"certificate at (x0, x0) under r = 5, eta = 1: terms "
                 + ", ".join(format_rational(t.value) for t in certificate.terms)
                 + f"; bound {format_rational(certificate.bound)} = 5*eta")
    return lines


def _demo_extremal_jensen(jobs: int) -> List[str]:
    g = dyadic_lattice()
    x0 = g.basis_multiple(1)
    f = make_extremal_jensen(1, x0)
    window = Window.box(g, -16, 16, exponent=1)
    quad = sup_defect_scan(f, Equation.JENSEN_QUAD, window, jobs=jobs)
    plain = sup_defect_scan(f, Equation.JENSEN_PLAIN, window, shells=(2, 4, 8), jobs=jobs)
    certificate = certify_jensen(f, StabilityBudget(5, 1), x0, -x0)
    lines = [f"extremal Jensen function, eps = 1, x0 = {x0}",
             f"max quadrupled defect over {quad.window}: {format_rational(quad.max_defect)}"
             f" at ({quad.argmax[0]}, {quad.argmax[1]})"]
    lines += [f"  plain shell r >= {format_rational(s.r)}: sup = {format_rational(s.sup)}"
              for s in plain.shell_profile]
    lines.append(f"certificate at (x0, -x0) under r = 5, eta = 1: terms "
                 + ", ".join(format_rational(t.value) for t in certificate.terms)
                 + f"; bound {format_rational(certificate.bound)} = 4*eta")
    return lines


@cli.command()
@click.argument('name', type=click.Choice(DEMOS))
@click.option('--jobs', default=None, type=int)
@click.pass_obj
def demo(settings: Settings, name: str, jobs: Optional[int]):
    """Print a verification transcript for one of the extremal examples."""
    jobs = jobs or settings.jobs
    if name == 'binseq-counterexample':
        report = binseq_counterexample_report(jobs=jobs)
        click.echo('\n'.join(report.transcript()))
        return 0 if report.confirmed else 1
    lines = _demo_extremal_cauchy(jobs) if name == 'extremal-cauchy' else _demo_extremal_jensen(jobs)
    click.echo('\n'.join(lines))
    return 0


@cli.command()
@click.option('--host', default=None)
@click.option('--port', default=None, type=int)
@click.option('--debug', is_flag=True)
@click.pass_obj
def serve(settings: Settings, host: Optional[str], port: Optional[int], debug: bool):
    """Run the JSON API server."""
    from .backend.server import create_app

    app = create_app({'DATABASE_URL': settings.database_url, 'JOBS': settings.jobs,
                      'EXHAUSTIVE_LIMIT': settings.exhaustive_limit})
    app.run(host=host or settings.host, port=port or settings.port, debug=debug)
    return 0


@cli.group()
def ledger():
    """Inspect stored certificates."""


@ledger.command('list')
@click.option('--kind', default=None)
@click.option('--limit', default=50, type=int)
@click.pass_obj
def ledger_list(settings: Settings, kind: Optional[str], limit: int):
    """List stored certificates as JSON."""
    records = _ledger(settings).list_certificates(kind=kind, limit=limit)
    click.echo(to_json({'certificates': [r.to_dict(include_payload=False) for r in records]}), nl=False)
    return 0


@ledger.command('reverify')
@click.pass_obj
def ledger_reverify(settings: Settings):
    """Re-audit every stored certificate; exit 1 if any fails."""
    results = _ledger(settings).reverify_all()
    for record_id, result in results:
        status = 'ok' if result.ok else 'FAILED: ' + ', '.join(result.mismatches)
        click.echo(f"{record_id} {result.kind} {status}")
    return 0 if all(result.ok for _, result in results) else 1


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code.

    Exit codes: 0 on success, 1 for failed checks and toolkit errors,
    2 for usage errors, including text the argument grammars reject.
    """
    try:
        result = cli.main(args=list(argv) if argv is not None else None,
                          prog_name='stabkit', standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return 1
    except ParseError as exc:
        click.echo(f"Error: {exc}", err=True)
        return 2
    except StabilityError as exc:
        logger.debug("command failed", exc_info=True)
        click.echo(f"Error: {exc}", err=True)
        return 1
    return result if isinstance(result, int) else 0
