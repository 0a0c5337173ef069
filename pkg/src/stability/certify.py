"""
stabkit - Witness selection and certificate chains

A certificate bounds the defect of f at (x, y) by a chain of defects at
auxiliary pairs chosen far from the origin. The chain telescopes, so the
summed bound dominates the defect by the triangle inequality whatever f is;
when f keeps every far-away defect below eta, the bound stays below
5*eta for the Cauchy equation and 4*eta for the quadrupled Jensen form.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .defect import (
    Equation,
    Window,
    cauchy_defect,
    jensen_defect,
    jensen_quad_defect,
    sup_defect_scan,
)
from .exceptions import (
    DomainMismatch,
    EmptyGrid,
    InvalidParameter,
    NotDivisible,
    WitnessSelectionError,
)
from .functions import TestFunction
from .groups import (
    Element,
    GroupDescriptor,
    RationalLike,
    format_rational,
    to_rational,
    unbounded_witness,
)

logger = logging.getLogger(__name__)

# (left, right, description) of one chain line.
ChainPair = Tuple[Element, Element, str]


def certificate_fingerprint(payload: Mapping[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a certificate, its own fingerprint excluded."""
    body = {key: value for key, value in payload.items() if key != 'fingerprint'}
    canonical = json.dumps(body, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class StabilityBudget:
    """Radius r and defect bound eta assumed on pairs with min norm >= r."""
    r: Fraction
    eta: Fraction
    empirical: bool = False
    tail_is_base_rule: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, 'r', to_rational(self.r))
        object.__setattr__(self, 'eta', to_rational(self.eta))
        if self.r <= 0:
            raise InvalidParameter(f"budget radius must be positive, got {self.r}")
        if self.eta < 0:
            raise InvalidParameter(f"budget bound must be nonnegative, got {self.eta}")

    def to_dict(self) -> Dict[str, Any]:
        return {'r': format_rational(self.r), 'eta': format_rational(self.eta)}


@dataclass(frozen=True)
class ChainTerm:
    """One line of a certificate chain: the defect at (left, right)."""
    left: Element
    right: Element
    description: str
    value: Fraction
    min_norm_ok: bool
    separation_ok: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        data = {
            'left': self.left.to_text(),
            'right': self.right.to_text(),
            'description': self.description,
            'value': format_rational(self.value),
            'min_norm_ok': self.min_norm_ok,
        }
        if self.separation_ok is not None:
            data['separation_ok'] = self.separation_ok
        return data


def _named(norms: Sequence[Tuple[str, Element]]) -> Tuple[Tuple[str, Fraction], ...]:
    return tuple((name, element.norm) for name, element in norms)


def cauchy_side_norms(x: Element, y: Element, u: Element,
                      v: Element) -> Tuple[Tuple[str, Fraction], ...]:
    """The six norms that must reach r for a Cauchy chain."""
    return _named([
        ('u', u),
        ('v', v),
        ('u+v', u + v),
        ('x-u', x - u),
        ('y-v', y - v),
        ('x+y-u-v', x + y - u - v),
    ])


def jensen_side_norms(x: Element, y: Element, u: Element) -> Tuple[Tuple[str, Fraction], ...]:
    """The four norms that must reach r for a Jensen chain."""
    return _named([
        ('x+u', x + u),
        ('y+u', y + u),
        ('x-u', x - u),
        ('y-u', y - u),
    ])


def cauchy_chain(x: Element, y: Element, u: Element, v: Element) -> List[ChainPair]:
    """The five Cauchy pairs; their defects telescope to f(x+y) - f(x) - f(y)."""
    return [
        (x - u, u, "split f(x) through (x-u, u)"),
        (y - v, v, "split f(y) through (y-v, v)"),
        (x - u, y - v, "add (x-u) and (y-v)"),
        (u, v, "add u and v"),
        (x + y - u - v, u + v, "split f(x+y) through (x+y-u-v, u+v)"),
    ]


def jensen_chain(x: Element, y: Element, u: Element) -> List[ChainPair]:
    """The four plain Jensen pairs; they telescope to the quadrupled defect at (x, y)."""
    return [
        (x + u, y - u, "midpoint of (x+u, y-u)"),
        (x - u, y + u, "midpoint of (x-u, y+u)"),
        (x + u, x - u, "symmetric split of 2f(x)"),
        (y + u, y - u, "symmetric split of 2f(y)"),
    ]


def evaluate_chain(f: TestFunction, chain: Sequence[ChainPair], equation: Equation,
                   r: Fraction) -> Tuple[ChainTerm, ...]:
    """Evaluate each chain pair with the Cauchy or plain Jensen defect."""
    measure = cauchy_defect if equation is Equation.CAUCHY else jensen_defect
    return tuple(
        ChainTerm(
            left=left,
            right=right,
            description=description,
            value=measure(f, left, right),
            min_norm_ok=min(left.norm, right.norm) >= r,
        )
        for left, right, description in chain
    )


def _check_points(g: GroupDescriptor, *points: Element) -> None:
    for point in points:
        if not isinstance(point, Element) or point.group != g:
            raise DomainMismatch(f"{point} is not an element of {g}")


def _verify_side_conditions(norms: Tuple[Tuple[str, Fraction], ...], bound: Fraction,
                            label: str) -> None:
    failed = [name for name, value in norms if value < bound]
    if failed:
        logger.error("%s witnesses violate %s >= %s", label, ", ".join(failed), bound)
        raise WitnessSelectionError(f"{label} witnesses violate {', '.join(failed)} >= {bound}")


def pick_cauchy_witnesses(g: GroupDescriptor, x: Element, y: Element,
                          r: RationalLike) -> Tuple[Element, Element]:
    """Choose u, then v, far enough that every Cauchy chain pair clears r.

    Args:
        g: An unbounded group.
        x: First point.
        y: Second point.
        r: Radius the six side-condition norms must reach.

    Returns:
        Tuple[Element, Element]: u with norm >= r + |x|, then v with
        norm >= r + |x| + |y| + |u|.

    Raises:
        Bounded: If g is bounded.
        WitnessOutOfRange: If a harmonic witness target passes the cap on bits.
        WitnessSelectionError: If the constructed witnesses miss a side
            condition.
    """
    r = to_rational(r)
    _check_points(g, x, y)
    u = unbounded_witness(g, r + x.norm)
    v = unbounded_witness(g, r + x.norm + y.norm + u.norm)
    _verify_side_conditions(cauchy_side_norms(x, y, u, v), r, "Cauchy")
    return u, v


def pick_jensen_witness(g: GroupDescriptor, x: Element, y: Element,
                        r: RationalLike) -> Element:
    """Choose u with norm >= r + |x| + |y| so the four Jensen pairs clear r.

    Raises:
        NotDivisible: If g is not uniquely 2-divisible.
        Bounded: If g is bounded.
    """
    r = to_rational(r)
    _check_points(g, x, y)
    if not g.uniquely_2_divisible:
        raise NotDivisible(f"Jensen chains need a uniquely 2-divisible group, not {g}")
    u = unbounded_witness(g, r + x.norm + y.norm)
    _verify_side_conditions(jensen_side_norms(x, y, u), r, "Jensen")
    return u


@dataclass(frozen=True)
class Certificate:
    """Common part of every certificate: points, witnesses, terms and the defect."""
    function: TestFunction
    x: Element
    y: Element
    witnesses: Tuple[Tuple[str, Element], ...]
    terms: Tuple[ChainTerm, ...]
    side_norms: Tuple[Tuple[str, Fraction], ...]
    defect: Fraction

    @property
    def r(self) -> Fraction:
        return self.budget.r

    @property
    def bound(self) -> Fraction:
        """Sum of the term values."""
        return sum((term.value for term in self.terms), Fraction(0))

    @property
    def side_conditions_ok(self) -> bool:
        return all(value >= self.r for _, value in self.side_norms)

    @property
    def sound(self) -> bool:
        """bound >= defect; the triangle inequality guarantees it."""
        return self.bound >= self.defect

    def witness(self, name: str) -> Element:
        return dict(self.witnesses)[name]

    def _extra_fields(self) -> Dict[str, Any]:
        return {}

    def to_dict(self) -> Dict[str, Any]:
        """Convert the certificate to its self-contained JSON form."""
        data = {
            'kind': self.kind,
            'equation': self.equation.value,
            'function': self.function.to_dict(),
            'budget': self.budget.to_dict(),
            'x': self.x.to_text(),
            'y': self.y.to_text(),
            'witnesses': {name: element.to_text() for name, element in self.witnesses},
            'terms': [term.to_dict() for term in self.terms],
            'side_norms': {name: format_rational(value) for name, value in self.side_norms},
            'side_conditions_ok': self.side_conditions_ok,
            'defect': format_rational(self.defect),
            'bound': format_rational(self.bound),
            'sound': self.sound,
        }
        data.update(self._extra_fields())
        data['fingerprint'] = certificate_fingerprint(data)
        return data


@dataclass(frozen=True)
class StabilityCertificate(Certificate):
    """A certificate issued under a StabilityBudget (r, eta)."""
    budget: StabilityBudget

    @property
    def ceiling(self) -> Fraction:
        return len(self.terms) * self.budget.eta

    @property
    def within_budget(self) -> bool:
        """Every term is at most eta."""
        return all(term.value <= self.budget.eta for term in self.terms)

    @property
    def claim_holds(self) -> bool:
        return self.bound <= self.ceiling

    def _extra_fields(self) -> Dict[str, Any]:
        return {
            'ceiling': format_rational(self.ceiling),
            'within_budget': self.within_budget,
            'claim_holds': self.claim_holds,
        }


@dataclass(frozen=True)
class CauchyCertificate(StabilityCertificate):
    """Five-term chain bounding |f(x+y) - f(x) - f(y)| by at most 5*eta."""
    kind = 'cauchy'
    equation = Equation.CAUCHY

    @property
    def u(self) -> Element:
        return self.witness('u')

    @property
    def v(self) -> Element:
        return self.witness('v')


@dataclass(frozen=True)
class JensenCertificate(StabilityCertificate):
    """Four-term chain bounding |4f((x+y)/2) - 2f(x) - 2f(y)| by at most 4*eta."""
    kind = 'jensen'
    equation = Equation.JENSEN_QUAD

    @property
    def u(self) -> Element:
        return self.witness('u')


def _log_unsound(certificate: Certificate) -> None:
    if not certificate.sound:
        logger.error("unsound %s certificate at (%s, %s): bound %s < defect %s",
                     certificate.kind, certificate.x, certificate.y,
                     certificate.bound, certificate.defect)


def certify_cauchy(f: TestFunction, budget: StabilityBudget, x: Element,
                   y: Element) -> CauchyCertificate:
    """Build the five-term Cauchy certificate at (x, y).

    Args:
        f: Function on an unbounded group.
        budget: (r, eta); terms are checked against eta, the bound against 5*eta.
        x: First point.
        y: Second point.

    Returns:
        CauchyCertificate: Witnesses, terms and flags. It is returned even
        when f does not honour the budget.
    """
    u, v = pick_cauchy_witnesses(f.domain, x, y, budget.r)
    certificate = CauchyCertificate(
        function=f,
        x=x,
        y=y,
        witnesses=(('u', u), ('v', v)),
        terms=evaluate_chain(f, cauchy_chain(x, y, u, v), Equation.CAUCHY, budget.r),
        side_norms=cauchy_side_norms(x, y, u, v),
        defect=cauchy_defect(f, x, y),
        budget=budget,
    )
    _log_unsound(certificate)
    return certificate


def certify_jensen(f: TestFunction, budget: StabilityBudget, x: Element,
                   y: Element) -> JensenCertificate:
    """Build the four-term Jensen certificate at (x, y).

    The bound dominates the quadrupled defect |4f((x+y)/2) - 2f(x) - 2f(y)|.
    No bound on the plain defect is claimed.
    """
    u = pick_jensen_witness(f.domain, x, y, budget.r)
    certificate = JensenCertificate(
        function=f,
        x=x,
        y=y,
        witnesses=(('u', u),),
        terms=evaluate_chain(f, jensen_chain(x, y, u), Equation.JENSEN_PLAIN, budget.r),
        side_norms=jensen_side_norms(x, y, u),
        defect=jensen_quad_defect(f, x, y),
        budget=budget,
    )
    _log_unsound(certificate)
    return certificate


def tail_is_base_rule(f: TestFunction, window: Window) -> bool:
    """True when every override of f lies inside the window."""
    return all(point in window for point in f.support())


def budget_from_scan(f: TestFunction, equation: Equation, window: Window,
                     r_grid: Sequence[RationalLike], jobs: int = 1) -> StabilityBudget:
    """Derive an empirical budget from the shell profile of a window scan.

    Picks the smallest r whose shell sup is minimal over the grid and uses
    that sup as eta. The budget is a true one only when f follows its base
    rule outside the window; the result records that check.

    Raises:
        EmptyGrid: If r_grid is empty.
        EmptyWindow: If the window is empty.
    """
    radii = sorted({to_rational(r) for r in r_grid})
    if not radii:
        raise EmptyGrid("the radius grid is empty")
    if radii[0] <= 0:
        raise InvalidParameter("budget radii must be positive")
    if equation is Equation.JENSEN_QUAD:
        equation = Equation.JENSEN_PLAIN
    report = sup_defect_scan(f, equation, window, shells=radii, jobs=jobs)
    best = min(report.shell_profile, key=lambda shell: (shell.sup, shell.r))
    tail = tail_is_base_rule(f, window)
    if not tail:
        logger.warning("scan-derived budget for %s is not valid beyond the window", window.description)
    return StabilityBudget(best.r, best.sup, empirical=True, tail_is_base_rule=tail)
