"""
stabkit - Test functions

This module provides the representation of functions f : X -> Y as a base
rule plus a finite override map, the codomain values they produce, and the
constructors for every counterexample function used by the toolkit.
"""

import logging
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

from .exceptions import (
    CodomainMismatch,
    DomainMismatch,
    InvalidParameter,
    NotDivisible,
    ParseError,
    UnsupportedDomain,
    ZeroExcluded,
)
from .groups import (
    Element,
    GroupDescriptor,
    RationalLike,
    format_rational,
    parse_element,
    to_rational,
)

logger = logging.getLogger(__name__)


class CodomainValue(ABC):
    """A value f(x): either an exact rational scalar or a group element."""

    @property
    @abstractmethod
    def norm(self) -> Fraction:
        """The codomain norm (absolute value or group norm)."""

    @property
    @abstractmethod
    def codomain(self) -> Optional[GroupDescriptor]:
        """The group the value lives in, or None for scalars."""

    @abstractmethod
    def __add__(self, other: 'CodomainValue') -> 'CodomainValue':
        ...

    @abstractmethod
    def __neg__(self) -> 'CodomainValue':
        ...

    @abstractmethod
    def scale(self, k: int) -> 'CodomainValue':
        """Return the integer multiple k*self."""

    @abstractmethod
    def to_text(self) -> str:
        ...

    def __sub__(self, other: 'CodomainValue') -> 'CodomainValue':
        return self + (-other)

    def _check_same_codomain(self, other: 'CodomainValue') -> None:
        if not isinstance(other, CodomainValue) or other.codomain != self.codomain:
            raise CodomainMismatch(f"cannot combine {self.to_text()} with {other!r}")

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class Scalar(CodomainValue):
    """A rational scalar with norm |value|."""
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'value', to_rational(self.value))

    @property
    def norm(self) -> Fraction:
        return abs(self.value)

    @property
    def codomain(self) -> Optional[GroupDescriptor]:
        return None

    def __add__(self, other: CodomainValue) -> 'Scalar':
        self._check_same_codomain(other)
        return Scalar(self.value + other.value)

    def __neg__(self) -> 'Scalar':
        return Scalar(-self.value)

    def scale(self, k: int) -> 'Scalar':
        return Scalar(k * self.value)

    def to_text(self) -> str:
        return format_rational(self.value)


@dataclass(frozen=True)
class GroupValue(CodomainValue):
    """A group element used as a function value (Y = X)."""
    element: Element

    @property
    def norm(self) -> Fraction:
        return self.element.norm

    @property
    def codomain(self) -> Optional[GroupDescriptor]:
        return self.element.group

    def __add__(self, other: CodomainValue) -> 'GroupValue':
        self._check_same_codomain(other)
        return GroupValue(self.element + other.element)

    def __neg__(self) -> 'GroupValue':
        return GroupValue(-self.element)

    def scale(self, k: int) -> 'GroupValue':
        return GroupValue(self.element.multiply(k))

    def to_text(self) -> str:
        return self.element.to_text()


ValueLike = Union[CodomainValue, RationalLike]


def as_value(value: ValueLike) -> CodomainValue:
    """Wrap a rational-like value as a Scalar; pass codomain values through."""
    if isinstance(value, CodomainValue):
        return value
    if isinstance(value, Element):
        return GroupValue(value)
    return Scalar(to_rational(value))


def parse_value(text: str, codomain: Optional[GroupDescriptor] = None) -> CodomainValue:
    """Parse a codomain value: a rational 'p/q' or an element text.

    Args:
        text: The value text.
        codomain: Group used to read prefix-less element forms.

    Returns:
        CodomainValue: A Scalar or a GroupValue.
    """
    stripped = (text or '').strip()
    if re.match(r'^(int|dyadic|bits):', stripped):
        return GroupValue(parse_element(stripped))
    if codomain is not None:
        return GroupValue(parse_element(stripped, codomain))
    return Scalar(to_rational(stripped))


class BaseRule(Enum):
    """The rule a TestFunction applies outside its overrides."""
    ZERO = "zero"
    CONSTANT = "constant"
    LINEAR_SCALAR = "linear"
    IDENTITY = "identity"


def _first_coordinate(x: Element) -> Fraction:
    return Fraction(x.coords[0])


@dataclass(frozen=True)
class TestFunction:
    """A function f : X -> Y given by a base rule and finitely many overrides.

    Evaluation consults the overrides first, then the base rule. Overrides
    are stored sorted by the text of their keys so that equal functions
    serialize identically.
    """
    __test__ = False

    domain: GroupDescriptor
    base: BaseRule = BaseRule.ZERO
    constant: Optional[CodomainValue] = None
    slope: Optional[Fraction] = None
    overrides: Tuple[Tuple[Element, CodomainValue], ...] = ()
    _table: Dict[Element, CodomainValue] = field(
        default_factory=dict, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        if self.base is BaseRule.CONSTANT:
            if self.constant is None:
                raise InvalidParameter("a constant base needs a value")
            object.__setattr__(self, 'constant', as_value(self.constant))
        elif self.constant is not None:
            raise InvalidParameter(f"base {self.base.value} takes no constant")

        if self.base is BaseRule.LINEAR_SCALAR:
            if not self.domain.is_lattice or self.domain.dim != 1:
                raise UnsupportedDomain(
                    f"linear base rules need a one-dimensional lattice, not {self.domain}"
                )
            if self.slope is None:
                raise InvalidParameter("a linear base needs a slope")
            object.__setattr__(self, 'slope', to_rational(self.slope))
        elif self.slope is not None:
            raise InvalidParameter(f"base {self.base.value} takes no slope")

        items = self.overrides.items() if isinstance(self.overrides, Mapping) else self.overrides
        table: Dict[Element, CodomainValue] = {}
        for key, value in items:
            if not isinstance(key, Element) or key.group != self.domain:
                raise DomainMismatch(f"override key {key} is not in {self.domain}")
            value = as_value(value)
            if value.codomain != self.codomain:
                raise CodomainMismatch(
                    f"override value {value} does not match the codomain of the base rule"
                )
            table[key] = value
        ordered = tuple(sorted(table.items(), key=lambda item: item[0].to_text()))
        object.__setattr__(self, 'overrides', ordered)
        object.__setattr__(self, '_table', table)

    @property
    def codomain(self) -> Optional[GroupDescriptor]:
        """The codomain group, or None for rational scalars."""
        if self.base is BaseRule.IDENTITY:
            return self.domain
        if self.base is BaseRule.CONSTANT:
            return self.constant.codomain
        return None

    def support(self) -> Tuple[Element, ...]:
        """The override keys, in canonical order."""
        return tuple(key for key, _ in self.overrides)

    def base_value(self, x: Element) -> CodomainValue:
        """Apply the base rule to x, ignoring overrides."""
        if self.base is BaseRule.ZERO:
            return Scalar(Fraction(0))
        if self.base is BaseRule.CONSTANT:
            return self.constant
        if self.base is BaseRule.LINEAR_SCALAR:
            return Scalar(self.slope * _first_coordinate(x))
        return GroupValue(x)

    def eval(self, x: Element) -> CodomainValue:
        """Evaluate f at x.

        Raises:
            DomainMismatch: If x is not an element of the domain.
        """
        if not isinstance(x, Element) or x.group != self.domain:
            raise DomainMismatch(f"{x} is not in the domain {self.domain}")
        value = self._table.get(x)
        if value is not None:
            return value
        return self.base_value(x)

    __call__ = eval

    def to_dict(self) -> Dict[str, Any]:
        """Convert the function to its JSON-ready dictionary form."""
        base: Dict[str, Any] = {'rule': self.base.value}
        if self.base is BaseRule.CONSTANT:
            base['value'] = self.constant.to_text()
        elif self.base is BaseRule.LINEAR_SCALAR:
            base['slope'] = format_rational(self.slope)
        return {
            'domain': self.domain.spec(),
            'base': base,
            'overrides': [[key.to_text(), value.to_text()] for key, value in self.overrides],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'TestFunction':
        """Rebuild a function from to_dict() output.

        Raises:
            ParseError: If the dictionary is malformed.
        """
        try:
            domain = GroupDescriptor.parse(data['domain'])
            base_data = data['base']
            rule = BaseRule(base_data['rule'])
            constant = parse_value(base_data['value']) if rule is BaseRule.CONSTANT else None
            slope = to_rational(base_data['slope']) if rule is BaseRule.LINEAR_SCALAR else None
            codomain = domain if rule is BaseRule.IDENTITY else (
                constant.codomain if constant is not None else None
            )
            overrides = [
                (parse_element(key, domain), parse_value(value, codomain))
                for key, value in data.get('overrides', [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed function description: {exc}") from exc
        return cls(domain, rule, constant=constant, slope=slope, overrides=tuple(overrides))


def make_zero(g: GroupDescriptor) -> TestFunction:
    """Return the zero function X -> Q."""
    return TestFunction(g, BaseRule.ZERO)


def make_constant(g: GroupDescriptor, c: ValueLike) -> TestFunction:
    """Return the constant function with value c."""
    return TestFunction(g, BaseRule.CONSTANT, constant=as_value(c))


def _nonnegative(eps: RationalLike) -> Fraction:
    value = to_rational(eps)
    if value < 0:
        raise InvalidParameter(f"epsilon must be nonnegative, got {value}")
    return value


def make_extremal_cauchy(eps: RationalLike, x0: Element) -> TestFunction:
    """Return f with f(x0) = 3*eps and f = eps elsewhere.

    Its Cauchy defect is eps on every pair beyond norm(x0) but reaches
    5*eps at (x0, x0).

    Raises:
        ZeroExcluded: If x0 is zero.
        InvalidParameter: If eps is negative.
    """
    eps = _nonnegative(eps)
    if x0.is_zero:
        raise ZeroExcluded("the extremal Cauchy function needs x0 != 0")
    if eps == 0:
        return make_constant(x0.group, 0)
    return TestFunction(
        x0.group, BaseRule.CONSTANT, constant=Scalar(eps),
        overrides={x0: Scalar(3 * eps)},
    )


def make_extremal_jensen(eps: RationalLike, x0: Element) -> TestFunction:
    """Return f with f(0) = eps/2, f(x0) = f(-x0) = -eps/2 and f = 0 elsewhere.

    Raises:
        NotDivisible: If the domain is not uniquely 2-divisible.
        ZeroExcluded: If x0 is zero.
        InvalidParameter: If eps is negative.
    """
    eps = _nonnegative(eps)
    g = x0.group
    if not g.uniquely_2_divisible:
        raise NotDivisible(f"the extremal Jensen function needs a uniquely 2-divisible domain, not {g}")
    if x0.is_zero:
        raise ZeroExcluded("the extremal Jensen function needs x0 != 0")
    if eps == 0:
        return make_zero(g)
    half = eps / 2
    return TestFunction(
        g, BaseRule.ZERO,
        overrides={x0: Scalar(-half), -x0: Scalar(-half), g.zero(): Scalar(half)},
    )


def make_hyper_counterexample(a: Element) -> TestFunction:
    """Return f : X -> X with f(x) = x for x != 0 and f(0) = a.

    Raises:
        ZeroExcluded: If a is zero.
    """
    if a.is_zero:
        raise ZeroExcluded("the hyperstability counterexample needs a != 0")
    g = a.group
    return TestFunction(g, BaseRule.IDENTITY, overrides={g.zero(): GroupValue(a)})


def make_additive(slope: RationalLike, g: GroupDescriptor) -> TestFunction:
    """Return the additive function x -> slope*x on a one-dimensional lattice.

    Raises:
        UnsupportedDomain: If g is not a one-dimensional lattice.
    """
    return TestFunction(g, BaseRule.LINEAR_SCALAR, slope=to_rational(slope))


def perturb(f: TestFunction, extra: Mapping[Element, ValueLike]) -> TestFunction:
    """Return f with extra overrides merged in; extra wins on collisions.

    Raises:
        DomainMismatch: If a key of extra is outside f's domain.
    """
    if not extra:
        return f
    merged: Dict[Element, CodomainValue] = dict(f.overrides)
    for key, value in extra.items():
        merged[key] = as_value(value)
    return replace(f, overrides=tuple(merged.items()))


def split_top_level(text: str, separator: str = ',') -> List[str]:
    """Split on separator outside of [] and {} brackets."""
    parts, depth, current = [], 0, []
    for char in text:
        if char in '[{':
            depth += 1
        elif char in ']}':
            depth -= 1
        if char == separator and depth == 0:
            parts.append(''.join(current))
            current = []
        else:
            current.append(char)
    parts.append(''.join(current))
    return [part.strip() for part in parts if part.strip()]


# name -> (required parameters, optional parameters)
FUNCTION_PARAMETERS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    'zero': ((), ()),
    'constant': (('c',), ()),
    'extremal-cauchy': (('eps',), ('x0',)),
    'extremal-jensen': (('eps',), ('x0',)),
    'hyper-counterexample': ((), ('a',)),
    'additive': (('slope',), ()),
}


@dataclass(frozen=True)
class FunctionSpec:
    """A parsed 'name:key=val,...' function description."""
    name: str
    params: Tuple[Tuple[str, str], ...] = ()

    @classmethod
    def parse(cls, text: str) -> 'FunctionSpec':
        """Parse the mini-grammar, e.g. 'extremal-cauchy:eps=1,x0=1'.

        Raises:
            ParseError: On unknown names, unknown keys or missing keys.
        """
        name, _, rest = (text or '').strip().partition(':')
        name = name.strip()
        if name not in FUNCTION_PARAMETERS:
            raise ParseError(f"unknown function {name!r}; expected one of {sorted(FUNCTION_PARAMETERS)}")
        required, optional = FUNCTION_PARAMETERS[name]
        params = []
        for item in split_top_level(rest):
            key, sep, value = item.partition('=')
            key = key.strip()
            if not sep or key not in required + optional:
                raise ParseError(f"invalid parameter {item!r} for {name}")
            params.append((key, value.strip()))
        missing = set(required) - {key for key, _ in params}
        if missing:
            raise ParseError(f"{name} needs parameters {sorted(missing)}")
        return cls(name, tuple(params))

    def to_text(self) -> str:
        if not self.params:
            return self.name
        return self.name + ':' + ','.join(f"{key}={value}" for key, value in self.params)

    def build(self, g: GroupDescriptor) -> TestFunction:
        """Construct the TestFunction this spec names on group g.

        Missing x0 defaults to the first basis vector; missing a defaults
        to the support {1}.
        """
        params = dict(self.params)

        def element(key: str) -> Element:
            if key in params:
                return parse_element(params[key], g)
            return g.basis_multiple(1) if g.is_lattice else parse_element('{1}', g)

        if self.name == 'zero':
            return make_zero(g)
        if self.name == 'constant':
            return make_constant(g, parse_value(params['c']))
        if self.name == 'extremal-cauchy':
            return make_extremal_cauchy(params['eps'], element('x0'))
        if self.name == 'extremal-jensen':
            return make_extremal_jensen(params['eps'], element('x0'))
        if self.name == 'hyper-counterexample':
            return make_hyper_counterexample(element('a'))
        return make_additive(params['slope'], g)


def parse_function_spec(text: str, g: GroupDescriptor,
                        overrides: Iterable[str] = ()) -> TestFunction:
    """Build a function from the mini-grammar plus 'x=value' override strings.

    Args:
        text: Function spec such as 'additive:slope=1'.
        g: Domain group.
        overrides: Strings 'element=value' applied with perturb().

    Returns:
        TestFunction: The constructed function.
    """
    f = FunctionSpec.parse(text).build(g)
    extra: Dict[Element, CodomainValue] = {}
    for item in overrides:
        key, sep, value = item.rpartition('=')
        if not sep:
            raise ParseError(f"override must look like 'element=value', got {item!r}")
        extra[parse_element(key, g)] = parse_value(value, f.codomain)
    return perturb(f, extra)
