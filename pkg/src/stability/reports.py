"""
stabkit - Report rendering

Plot-ready CSV (header kind,r,value,x,y) and canonical JSON for scans,
certificates and search results. Output depends only on the data, never on
how it was computed.
"""

import csv
import io
import json
from typing import Any, Iterable, Mapping, Optional, Sequence

from .certify import Certificate
from .defect import ScanReport
from .groups import Element, format_rational
from .search import SharpnessResult

CSV_HEADER = ('kind', 'r', 'value', 'x', 'y')


def _text(point: Optional[Element]) -> str:
    return point.to_text() if point is not None else ''


def _write_rows(rows: Iterable[Sequence[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    writer.writerows(rows)
    return buffer.getvalue()


def scan_to_csv(report: ScanReport) -> str:
    """One 'max' row, then one 'shell' row per radius."""
    x, y = report.argmax
    rows = [('max', '', format_rational(report.max_defect), _text(x), _text(y))]
    for shell in report.shell_profile:
        sx, sy = shell.argmax if shell.argmax else (None, None)
        rows.append(('shell', format_rational(shell.r), format_rational(shell.sup), _text(sx), _text(sy)))
    return _write_rows(rows)


def certificate_to_csv(certificate: Certificate) -> str:
    """One 'term' row per chain line, then the 'bound' and 'defect' rows."""
    r = format_rational(certificate.r)
    rows = [
        ('term', r, format_rational(term.value), term.left.to_text(), term.right.to_text())
        for term in certificate.terms
    ]
    rows.append(('bound', r, format_rational(certificate.bound),
                 certificate.x.to_text(), certificate.y.to_text()))
    rows.append(('defect', r, format_rational(certificate.defect),
                 certificate.x.to_text(), certificate.y.to_text()))
    return _write_rows(rows)


def certificates_to_csv(certificates: Sequence[Certificate]) -> str:
    """Rows of several certificates under a single header."""
    parts = [certificate_to_csv(c).split('\n', 1)[1] for c in certificates]
    return ','.join(CSV_HEADER) + '\n' + ''.join(parts)


def search_to_csv(result: SharpnessResult) -> str:
    x, y = result.argmax
    return _write_rows([
        ('sharpness', format_rational(result.r), format_rational(result.best_sup), _text(x), _text(y)),
    ])


def to_json(data: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def render(item: Any, fmt: str) -> str:
    """Render a scan report, certificate or search result as 'csv' or 'json'."""
    if fmt == 'json':
        return to_json(item if isinstance(item, Mapping) else item.to_dict())
    if isinstance(item, ScanReport):
        return scan_to_csv(item)
    if isinstance(item, Certificate):
        return certificate_to_csv(item)
    if isinstance(item, SharpnessResult):
        return search_to_csv(item)
    raise ValueError(f"no CSV form for {type(item).__name__}")
