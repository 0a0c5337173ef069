"""
stabkit - Hyperstability

A weighted bound phi(|x - y|) * defect < K on far-away pairs, with phi
growing without bound, forces the equation to hold exactly: choosing the
witnesses so every chain pair is also at least R apart, with
phi(t) >= n*K/eps beyond R, squeezes each of the n chain terms below eps/n.
The construction needs 2X to be unbounded; the binary-sequence group,
where 2X = {0}, carries a non-additive function whose weighted defect
vanishes identically.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .certify import (
    Certificate,
    ChainTerm,
    _check_points,
    _named,
    _verify_side_conditions,
    cauchy_chain,
    cauchy_side_norms,
    evaluate_chain,
    jensen_chain,
    jensen_side_norms,
)
from .defect import (
    Equation,
    ScanReport,
    Window,
    cauchy_defect,
    jensen_quad_defect,
    sup_defect_scan,
)
from .exceptions import (
    DoublingBounded,
    InvalidParameter,
    NotDivisible,
    ParseError,
)
from .functions import TestFunction, make_hyper_counterexample
from .groups import (
    BitSupport,
    Element,
    GroupDescriptor,
    RationalLike,
    binary_sequences,
    doubling_witness,
    format_rational,
    to_rational,
)

logger = logging.getLogger(__name__)


class WeightKind(Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    AFFINE_FLOOR = "affine-floor"


@dataclass(frozen=True)
class WeightFunction:
    """A weight phi on [0, inf) with phi(t) -> inf and a constructive inverse.

    LINEAR is phi(t) = t, QUADRATIC is phi(t) = t^2, and AFFINE_FLOOR is
    phi(t) = offset + slope * floor(t) with slope > 0.
    """
    kind: WeightKind
    offset: Fraction = Fraction(0)
    slope: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, 'offset', to_rational(self.offset))
        object.__setattr__(self, 'slope', to_rational(self.slope))
        if self.kind is WeightKind.AFFINE_FLOOR and self.slope <= 0:
            raise InvalidParameter(f"affine-floor weights need a positive slope, got {self.slope}")

    def __call__(self, t: Fraction) -> Fraction:
        t = to_rational(t)
        if self.kind is WeightKind.LINEAR:
            return t
        if self.kind is WeightKind.QUADRATIC:
            return t * t
        return self.offset + self.slope * math.floor(t)

    def threshold_inverse(self, c: RationalLike) -> Fraction:
        """Return R >= 0 such that phi(t) >= c for every t >= R."""
        c = to_rational(c)
        if self.kind is WeightKind.LINEAR:
            return max(c, Fraction(0))
        if self.kind is WeightKind.QUADRATIC:
            if c <= 0:
                return Fraction(0)
            n = math.isqrt(math.ceil(c))
            while n * n < c:
                n += 1
            return Fraction(n)
        if c <= self.offset:
            return Fraction(0)
        return Fraction(math.ceil((c - self.offset) / self.slope))

    @property
    def label(self) -> str:
        if self.kind is WeightKind.AFFINE_FLOOR:
            return (f"affine-floor:offset={format_rational(self.offset)},"
                    f"slope={format_rational(self.slope)}")
        return self.kind.value

    def to_dict(self) -> Dict[str, Any]:
        data = {'kind': self.kind.value}
        if self.kind is WeightKind.AFFINE_FLOOR:
            data['offset'] = format_rational(self.offset)
            data['slope'] = format_rational(self.slope)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'WeightFunction':
        try:
            kind = WeightKind(data['kind'])
            return cls(kind, to_rational(data.get('offset', 0)), to_rational(data.get('slope', 1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed weight {data!r}") from exc

    @classmethod
    def parse(cls, text: str) -> 'WeightFunction':
        """Parse 'linear', 'quadratic' or 'affine-floor:offset=1,slope=2'."""
        name, _, params = (text or '').strip().partition(':')
        try:
            kind = WeightKind(name)
        except ValueError as exc:
            raise ParseError(f"unknown weight {name!r}") from exc
        values = {}
        for item in filter(None, params.split(',')):
            key, sep, value = item.partition('=')
            if not sep or key.strip() not in ('offset', 'slope'):
                raise ParseError(f"bad weight parameter {item!r}")
            values[key.strip()] = to_rational(value.strip())
        return cls(kind, values.get('offset', Fraction(0)), values.get('slope', Fraction(1)))


LINEAR = WeightFunction(WeightKind.LINEAR)
QUADRATIC = WeightFunction(WeightKind.QUADRATIC)


@dataclass(frozen=True)
class HyperBudget:
    """Radius r and bound K on phi(|x - y|) * defect for pairs with min norm >= r."""
    r: Fraction
    K: Fraction
    phi: WeightFunction
    term_count: int = 5

    def __post_init__(self):
        object.__setattr__(self, 'r', to_rational(self.r))
        object.__setattr__(self, 'K', to_rational(self.K))
        if self.r <= 0:
            raise InvalidParameter(f"budget radius must be positive, got {self.r}")
        if self.K <= 0:
            raise InvalidParameter(f"weighted bound K must be positive, got {self.K}")
        if self.term_count not in (4, 5):
            raise InvalidParameter(f"term count must be 4 or 5, got {self.term_count}")

    @classmethod
    def for_cauchy(cls, r: RationalLike, K: RationalLike,
                   phi: WeightFunction = LINEAR) -> 'HyperBudget':
        return cls(to_rational(r), to_rational(K), phi, 5)

    @classmethod
    def for_jensen(cls, r: RationalLike, K: RationalLike,
                   phi: WeightFunction = LINEAR) -> 'HyperBudget':
        return cls(to_rational(r), to_rational(K), phi, 4)

    def separation(self, eps: Fraction) -> Fraction:
        """R = threshold_inverse(term_count * K / eps)."""
        return self.phi.threshold_inverse(self.term_count * self.K / eps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'r': format_rational(self.r),
            'K': format_rational(self.K),
            'phi': self.phi.to_dict(),
            'term_count': self.term_count,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'HyperBudget':
        try:
            return cls(to_rational(data['r']), to_rational(data['K']),
                       WeightFunction.from_dict(data['phi']), int(data['term_count']))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed hyper budget {data!r}") from exc


def cauchy_separation_norms(x: Element, y: Element, u: Element,
                            v: Element) -> Tuple[Tuple[str, Fraction], ...]:
    """Norms of the differences of the five Cauchy chain pairs."""
    return _named([
        ('x-2u', x - u - u),
        ('y-2v', y - v - v),
        ('x-y-u+v', x - y - u + v),
        ('u-v', u - v),
        ('x+y-2(u+v)', x + y - u - v - u - v),
    ])


def jensen_separation_norms(x: Element, y: Element,
                            u: Element) -> Tuple[Tuple[str, Fraction], ...]:
    """Norms of the three distinct differences of the Jensen chain pairs."""
    return _named([
        ('2u', u + u),
        ('x-y+2u', x - y + u + u),
        ('x-y-2u', x - y - u - u),
    ])


def pick_hyper_cauchy_witnesses(g: GroupDescriptor, x: Element, y: Element,
                                r: RationalLike, R: RationalLike) -> Tuple[Element, Element]:
    """Choose u, v clearing r on the six side norms and R on the five separations.

    u has |2u| >= 2r + R + 2|x|; v has |2v| >= 2r + 2R + 2|x| + 2|y| + 2|u|.

    Raises:
        DoublingBounded: If 2X is bounded in g.
    """
    r, R = to_rational(r), to_rational(R)
    _check_points(g, x, y)
    if not g.doubling_unbounded:
        raise DoublingBounded(f"2X is bounded in {g}; hyperstability witnesses do not exist")
    u = doubling_witness(g, 2 * r + R + 2 * x.norm)
    v = doubling_witness(g, 2 * r + 2 * R + 2 * x.norm + 2 * y.norm + 2 * u.norm)
    _verify_side_conditions(cauchy_side_norms(x, y, u, v), r, "hyper Cauchy")
    _verify_side_conditions(cauchy_separation_norms(x, y, u, v), R, "hyper Cauchy separation")
    return u, v


def pick_hyper_jensen_witness(g: GroupDescriptor, x: Element, y: Element,
                              r: RationalLike, R: RationalLike) -> Element:
    """Choose u with |2u| >= 2r + R + 2|x| + 2|y|.

    Raises:
        NotDivisible: If g is not uniquely 2-divisible (checked first).
        DoublingBounded: If 2X is bounded in g.
    """
    r, R = to_rational(r), to_rational(R)
    _check_points(g, x, y)
    if not g.uniquely_2_divisible:
        raise NotDivisible(f"Jensen chains need a uniquely 2-divisible group, not {g}")
    if not g.doubling_unbounded:
        raise DoublingBounded(f"2X is bounded in {g}; hyperstability witnesses do not exist")
    u = doubling_witness(g, 2 * r + R + 2 * x.norm + 2 * y.norm)
    _verify_side_conditions(jensen_side_norms(x, y, u), r, "hyper Jensen")
    _verify_side_conditions(jensen_separation_norms(x, y, u), R, "hyper Jensen separation")
    return u


@dataclass(frozen=True)
class HyperCertificate(Certificate):
    """A chain certificate under a HyperBudget, aimed at a target epsilon."""
    budget: HyperBudget
    equation: Equation
    epsilon: Fraction
    R: Fraction
    separation_norms: Tuple[Tuple[str, Fraction], ...]

    @property
    def kind(self) -> str:
        return 'hyper-cauchy' if self.equation is Equation.CAUCHY else 'hyper-jensen'

    @property
    def separation_conditions_ok(self) -> bool:
        return all(value >= self.R for _, value in self.separation_norms)

    @property
    def budget_respected(self) -> bool:
        """Every chain pair with min norm >= r keeps phi(|a - b|) * defect < K."""
        phi, K = self.budget.phi, self.budget.K
        return all(
            phi((term.left - term.right).norm) * term.value < K
            for term in self.terms
            if term.min_norm_ok
        )

    @property
    def below_epsilon(self) -> bool:
        return self.bound < self.epsilon

    def _extra_fields(self) -> Dict[str, Any]:
        return {
            'epsilon': format_rational(self.epsilon),
            'R': format_rational(self.R),
            'separation_norms': {name: format_rational(v) for name, v in self.separation_norms},
            'separation_conditions_ok': self.separation_conditions_ok,
            'budget_respected': self.budget_respected,
            'below_epsilon': self.below_epsilon,
        }


def _positive_eps(eps: RationalLike) -> Fraction:
    eps = to_rational(eps)
    if eps <= 0:
        raise InvalidParameter(f"target epsilon must be positive, got {eps}")
    return eps


def _mark_separation(terms: Sequence[ChainTerm], R: Fraction) -> Tuple[ChainTerm, ...]:
    return tuple(replace(term, separation_ok=(term.left - term.right).norm >= R) for term in terms)


def certify_hyper_cauchy(f: TestFunction, hb: HyperBudget, x: Element, y: Element,
                         eps: RationalLike) -> HyperCertificate:
    """Build the five-term hyper certificate at (x, y) for target eps.

    Args:
        f: Function on a group with 2X unbounded.
        hb: Hyper budget with term_count 5.
        x: First point.
        y: Second point.
        eps: Positive target; R is chosen so phi >= 5K/eps beyond R.

    Returns:
        HyperCertificate: Always returned; budget_respected reports whether
        the weighted premise held at the touched pairs.

    Raises:
        DoublingBounded: If 2X is bounded in the domain.
    """
    eps = _positive_eps(eps)
    if hb.term_count != 5:
        raise InvalidParameter("a Cauchy hyper certificate needs a five-term budget")
    R = hb.separation(eps)
    u, v = pick_hyper_cauchy_witnesses(f.domain, x, y, hb.r, R)
    terms = evaluate_chain(f, cauchy_chain(x, y, u, v), Equation.CAUCHY, hb.r)
    certificate = HyperCertificate(
        function=f,
        x=x,
        y=y,
        witnesses=(('u', u), ('v', v)),
        terms=_mark_separation(terms, R),
        side_norms=cauchy_side_norms(x, y, u, v),
        defect=cauchy_defect(f, x, y),
        budget=hb,
        equation=Equation.CAUCHY,
        epsilon=eps,
        R=R,
        separation_norms=cauchy_separation_norms(x, y, u, v),
    )
    if not certificate.sound:
        logger.error("unsound hyper Cauchy certificate at (%s, %s)", x, y)
    return certificate


def certify_hyper_jensen(f: TestFunction, hb: HyperBudget, x: Element, y: Element,
                         eps: RationalLike) -> HyperCertificate:
    """Build the four-term hyper certificate at (x, y) for target eps."""
    eps = _positive_eps(eps)
    if hb.term_count != 4:
        raise InvalidParameter("a Jensen hyper certificate needs a four-term budget")
    R = hb.separation(eps)
    u = pick_hyper_jensen_witness(f.domain, x, y, hb.r, R)
    terms = evaluate_chain(f, jensen_chain(x, y, u), Equation.JENSEN_PLAIN, hb.r)
    certificate = HyperCertificate(
        function=f,
        x=x,
        y=y,
        witnesses=(('u', u),),
        terms=_mark_separation(terms, R),
        side_norms=jensen_side_norms(x, y, u),
        defect=jensen_quad_defect(f, x, y),
        budget=hb,
        equation=Equation.JENSEN_QUAD,
        epsilon=eps,
        R=R,
        separation_norms=jensen_separation_norms(x, y, u),
    )
    if not certificate.sound:
        logger.error("unsound hyper Jensen certificate at (%s, %s)", x, y)
    return certificate


def certify_hyper_schedule(f: TestFunction, hb: HyperBudget, x: Element, y: Element,
                           schedule: Sequence[RationalLike],
                           equation: Equation = Equation.CAUCHY) -> List[HyperCertificate]:
    """Issue one hyper certificate per target in a decreasing eps schedule."""
    certify = certify_hyper_cauchy if equation is Equation.CAUCHY else certify_hyper_jensen
    return [certify(f, hb, x, y, eps) for eps in schedule]


def weighted_profile(f: TestFunction, phi: WeightFunction, equation: Equation,
                     window: Window, r_grid: Sequence[RationalLike],
                     jobs: int = 1) -> ScanReport:
    """Shell profile of phi(|x - y|) times the defect over the window.

    Raises:
        EmptyWindow: If the window is empty.
    """
    return sup_defect_scan(f, equation, window, shells=r_grid, weight=phi, jobs=jobs)


@dataclass(frozen=True)
class CounterexampleReport:
    """The facts that make the binary-sequence function a counterexample."""
    function: TestFunction
    profile: ScanReport
    point: Element
    point_defect: Fraction
    doubling_bounded: bool

    @property
    def weighted_sups_vanish(self) -> bool:
        """Every shell sup is 0; pairs touching the origin are outside every shell."""
        shells = self.profile.shell_profile
        return bool(shells) and all(s.sup == 0 for s in shells)

    @property
    def confirmed(self) -> bool:
        return self.weighted_sups_vanish and self.point_defect > 0 and self.doubling_bounded

    def to_dict(self) -> Dict[str, Any]:
        return {
            'function': self.function.to_dict(),
            'profile': self.profile.to_dict(),
            'point': self.point.to_text(),
            'point_defect': format_rational(self.point_defect),
            'doubling_bounded': self.doubling_bounded,
            'weighted_sups_vanish': self.weighted_sups_vanish,
            'confirmed': self.confirmed,
        }

    def transcript(self) -> List[str]:
        lines = [
            f"function: identity on bits, f(0) = {self.function(self.function.domain.zero())}",
            f"weighted profile ({self.profile.weight}) over {self.profile.window}:",
        ]
        for shell in self.profile.shell_profile:
            lines.append(f"  r >= {format_rational(shell.r)}: sup = {format_rational(shell.sup)}"
                         f" over {shell.pair_count} pairs")
        lines.append(f"cauchy defect at ({self.point}, {self.point}) = "
                     f"{format_rational(self.point_defect)}")
        lines.append("hyper witnesses: " + ("DoublingBounded (2X = {0})"
                                            if self.doubling_bounded else "found"))
        lines.append("counterexample confirmed" if self.confirmed else "counterexample NOT confirmed")
        return lines


def binseq_counterexample_report(a: Optional[BitSupport] = None, max_index: int = 8,
                                 shells: Sequence[RationalLike] = ('1/2', 1, '3/2'),
                                 point: Optional[BitSupport] = None,
                                 phi: WeightFunction = LINEAR,
                                 jobs: int = 1) -> CounterexampleReport:
    """Check the bounded-doubling counterexample on the binary-sequence group.

    The weighted Cauchy profile vanishes on every shell, the plain defect at
    (point, point) equals |a|, and no hyper witnesses exist.
    """
    g = binary_sequences()
    a = a if a is not None else BitSupport(frozenset({1}))
    point = point if point is not None else BitSupport(frozenset({3}))
    f = make_hyper_counterexample(a)
    profile = weighted_profile(f, phi, Equation.CAUCHY, Window.supports(max_index), shells, jobs=jobs)
    try:
        pick_hyper_cauchy_witnesses(g, point, point, 1, 1)
        doubling_bounded = False
    except DoublingBounded:
        doubling_bounded = True
    report = CounterexampleReport(f, profile, point, cauchy_defect(f, point, point), doubling_bounded)
    logger.info("binary-sequence counterexample confirmed: %s", report.confirmed)
    return report
