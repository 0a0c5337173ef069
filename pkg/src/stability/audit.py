"""
stabkit - Certificate audit

Re-verifies serialized certificates by rebuilding them from the function,
budget and points they embed and comparing every field. The embedded
fingerprint covers the inputs themselves, which recomputation cannot check.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping

from .certify import StabilityBudget, certificate_fingerprint, certify_cauchy, certify_jensen
from .exceptions import ParseError, StabilityError
from .functions import TestFunction
from .groups import parse_element, to_rational
from .hyper import HyperBudget, certify_hyper_cauchy, certify_hyper_jensen

logger = logging.getLogger(__name__)


@dataclass
class AuditResult:
    """Outcome of verify_certificate."""
    ok: bool
    kind: str
    mismatches: List[str] = field(default_factory=list)
    recomputed: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {'ok': self.ok, 'kind': self.kind, 'mismatches': list(self.mismatches)}


def _stability(certify: Callable) -> Callable:
    def rebuild(f: TestFunction, payload: Mapping[str, Any], x, y) -> Dict[str, Any]:
        budget_data = payload['budget']
        budget = StabilityBudget(to_rational(budget_data['r']), to_rational(budget_data['eta']))
        return certify(f, budget, x, y).to_dict()
    return rebuild


def _hyper(certify: Callable) -> Callable:
    def rebuild(f: TestFunction, payload: Mapping[str, Any], x, y) -> Dict[str, Any]:
        budget = HyperBudget.from_dict(payload['budget'])
        return certify(f, budget, x, y, to_rational(payload['epsilon'])).to_dict()
    return rebuild


_REBUILDERS = {
    'cauchy': _stability(certify_cauchy),
    'jensen': _stability(certify_jensen),
    'hyper-cauchy': _hyper(certify_hyper_cauchy),
    'hyper-jensen': _hyper(certify_hyper_jensen),
}


def recompute_certificate(payload: Mapping[str, Any]) -> Dict[str, Any]:
    """Rebuild a certificate dictionary from the inputs embedded in payload.

    Raises:
        ParseError: If the payload is malformed or of an unknown kind.
        StabilityError: If the embedded inputs are invalid.
    """
    if not isinstance(payload, Mapping):
        raise ParseError("a certificate must be a JSON object")
    kind = payload.get('kind')
    if kind not in _REBUILDERS:
        raise ParseError(f"unknown certificate kind {kind!r}")
    try:
        f = TestFunction.from_dict(payload['function'])
        x = parse_element(payload['x'], f.domain)
        y = parse_element(payload['y'], f.domain)
        return _REBUILDERS[kind](f, payload, x, y)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed {kind} certificate: {exc}") from exc


def verify_certificate(payload: Mapping[str, Any]) -> AuditResult:
    """Check a serialized certificate field by field.

    The certificate passes when its recomputation reproduces every field
    exactly, its fingerprint matches its content and it claims soundness.

    Args:
        payload: A dictionary produced by a certificate's to_dict().

    Returns:
        AuditResult: ok, plus the names of the fields that differ.
    """
    kind = str(payload.get('kind')) if isinstance(payload, Mapping) else 'unknown'
    try:
        recomputed = recompute_certificate(payload)
    except StabilityError as exc:
        logger.warning("certificate could not be recomputed: %s", exc)
        return AuditResult(False, kind, [f"recompute failed: {exc}"])

    differing = {
        key for key in set(payload) | set(recomputed)
        if payload.get(key) != recomputed.get(key)
    }
    if payload.get('fingerprint') != certificate_fingerprint(payload):
        differing.add('fingerprint')
    mismatches = sorted(differing)
    if not recomputed['sound']:
        logger.error("recomputed %s certificate is unsound", kind)
        if 'sound' not in mismatches:
            mismatches.append('sound')
    ok = not mismatches
    if not ok:
        logger.info("certificate audit failed on %s", ", ".join(mismatches))
    return AuditResult(ok, kind, mismatches, recomputed)
