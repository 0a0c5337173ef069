"""
stabkit - Metric abelian groups

This module provides exact implementations of the three built-in metric
abelian groups: integer lattices and dyadic lattices with the L1 norm, and
the group of eventually-zero binary sequences with the harmonic metric
d(a, b) = sum over i of (a_i + b_i mod 2) / i.

All values are immutable and all arithmetic is exact (fractions.Fraction).
"""

import logging
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Tuple, Union

from .exceptions import (
    Bounded,
    DoublingBounded,
    GroupMismatch,
    InvalidParameter,
    NotDivisible,
    ParseError,
    WitnessOutOfRange,
)

logger = logging.getLogger(__name__)

Rational = Fraction
RationalLike = Union[int, Fraction, str]

# Harmonic prefixes grow like e^M; beyond this target the witness would need
# tens of thousands of indices with very large common denominators.
MAX_HARMONIC_TARGET = Fraction(12)


def to_rational(value: RationalLike) -> Fraction:
    """Convert an int, Fraction or 'p/q' string to an exact Fraction.

    Args:
        value: The value to convert. Floats are rejected because they are
            not exact.

    Returns:
        Fraction: The value in lowest terms with a positive denominator.

    Raises:
        ParseError: If the value is a float or an unparseable string.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError(f"inexact or invalid rational: {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not re.fullmatch(r'-?\d+(/\d+)?', text):
            raise ParseError(f"invalid rational: {value!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError as exc:
            raise ParseError(f"zero denominator in {value!r}") from exc
    raise ParseError(f"invalid rational: {value!r}")


def format_rational(value: Fraction) -> str:
    """Render a Fraction as 'p' or 'p/q'."""
    return str(Fraction(value))


class GroupKind(Enum):
    """The built-in metric abelian groups."""
    INT = "int"
    DYADIC = "dyadic"
    BITS = "bits"


@dataclass(frozen=True)
class GroupDescriptor:
    """Identifies a built-in group and exposes its capability flags."""
    kind: GroupKind
    dim: int = 1

    def __post_init__(self):
        if self.kind is GroupKind.BITS:
            object.__setattr__(self, 'dim', 0)
        elif self.dim < 1:
            raise InvalidParameter(f"lattice dimension must be positive, got {self.dim}")

    @property
    def uniquely_2_divisible(self) -> bool:
        return self.kind is GroupKind.DYADIC

    @property
    def unbounded(self) -> bool:
        return True

    @property
    def doubling_unbounded(self) -> bool:
        return self.kind is not GroupKind.BITS

    @property
    def is_lattice(self) -> bool:
        return self.kind is not GroupKind.BITS

    def zero(self) -> 'Element':
        """Return the neutral element of the group."""
        if self.kind is GroupKind.INT:
            return IntVector((0,) * self.dim)
        if self.kind is GroupKind.DYADIC:
            return DyadicVector((Fraction(0),) * self.dim)
        return BitSupport(frozenset())

    def basis_multiple(self, k: int) -> 'Element':
        """Return k times the first basis vector of a lattice group.

        Args:
            k: Integer multiplier.

        Returns:
            Element: (k, 0, ..., 0) in this lattice.

        Raises:
            InvalidParameter: For the binary-sequence group, which has no basis.
        """
        if self.kind is GroupKind.INT:
            return IntVector((k,) + (0,) * (self.dim - 1))
        if self.kind is GroupKind.DYADIC:
            return DyadicVector((Fraction(k),) + (Fraction(0),) * (self.dim - 1))
        raise InvalidParameter("the binary-sequence group has no basis direction")

    def spec(self) -> str:
        """Return the text form: 'int:1', 'dyadic:2' or 'bits'."""
        if self.kind is GroupKind.BITS:
            return "bits"
        return f"{self.kind.value}:{self.dim}"

    @classmethod
    def parse(cls, text: str) -> 'GroupDescriptor':
        """Parse a group spec such as 'int:1', 'dyadic', 'dyadic:2' or 'bits'.

        Args:
            text: The group spec. A missing dimension means 1.

        Returns:
            GroupDescriptor: The described group.

        Raises:
            ParseError: If the spec names no built-in group.
        """
        match = re.fullmatch(r'\s*(int|dyadic|bits)(?::(\d+))?\s*', text or '')
        if not match:
            raise ParseError(f"unknown group spec: {text!r}")
        kind = GroupKind(match.group(1))
        if kind is GroupKind.BITS:
            if match.group(2) is not None:
                raise ParseError("the binary-sequence group takes no dimension")
            return cls(kind)
        return cls(kind, int(match.group(2) or 1))

    def __str__(self) -> str:
        return self.spec()


def int_lattice(dim: int = 1) -> GroupDescriptor:
    """Return the descriptor of Z^dim."""
    return GroupDescriptor(GroupKind.INT, dim)


def dyadic_lattice(dim: int = 1) -> GroupDescriptor:
    """Return the descriptor of the dyadic rationals to the power dim."""
    return GroupDescriptor(GroupKind.DYADIC, dim)


def binary_sequences() -> GroupDescriptor:
    """Return the descriptor of eventually-zero binary sequences."""
    return GroupDescriptor(GroupKind.BITS)


class Element(ABC):
    """A member of one of the built-in groups.

    Concrete subclasses are frozen dataclasses, so elements are hashable,
    comparable for equality, and safe to share between threads and processes.
    """

    @property
    @abstractmethod
    def group(self) -> GroupDescriptor:
        """The group this element belongs to."""

    @abstractmethod
    def _add(self, other: 'Element') -> 'Element':
        """Add an element already known to be in the same group."""

    @abstractmethod
    def __neg__(self) -> 'Element':
        ...

    @abstractmethod
    def _compute_norm(self) -> Fraction:
        ...

    @abstractmethod
    def multiply(self, k: int) -> 'Element':
        """Return the integer multiple k*self."""

    @abstractmethod
    def to_text(self) -> str:
        """Return the canonical text form."""

    @cached_property
    def norm(self) -> Fraction:
        """The induced norm d(self, 0), exact."""
        return self._compute_norm()

    @property
    def is_zero(self) -> bool:
        return self == self.group.zero()

    def __add__(self, other: 'Element') -> 'Element':
        if not isinstance(other, Element):
            return NotImplemented
        if other.group != self.group:
            raise GroupMismatch(f"cannot add {self.group} and {other.group} elements")
        return self._add(other)

    def __sub__(self, other: 'Element') -> 'Element':
        if not isinstance(other, Element):
            return NotImplemented
        return self + (-other)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class IntVector(Element):
    """An element of Z^n."""
    coords: Tuple[int, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        if not coords:
            raise InvalidParameter("an integer vector needs at least one coordinate")
        if any(isinstance(c, bool) or not isinstance(c, int) for c in coords):
            raise InvalidParameter(f"integer vector has non-integer coordinates: {coords!r}")
        object.__setattr__(self, 'coords', coords)

    @property
    def group(self) -> GroupDescriptor:
        return GroupDescriptor(GroupKind.INT, len(self.coords))

    def _add(self, other: 'IntVector') -> 'IntVector':
        return IntVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> 'IntVector':
        return IntVector(tuple(-c for c in self.coords))

    def _compute_norm(self) -> Fraction:
        return Fraction(sum(abs(c) for c in self.coords))

    def multiply(self, k: int) -> 'IntVector':
        return IntVector(tuple(k * c for c in self.coords))

    def to_text(self) -> str:
        return "int:[" + ",".join(str(c) for c in self.coords) + "]"


def _is_dyadic(value: Fraction) -> bool:
    d = value.denominator
    return d & (d - 1) == 0


@dataclass(frozen=True)
class DyadicVector(Element):
    """An element of D^n where D is the ring of dyadic rationals m/2^e.

    Coordinates are stored as Fractions, which keeps them normalized:
    the mantissa is odd or the exponent is 0.
    """
    coords: Tuple[Fraction, ...]

    def __post_init__(self):
        coords = tuple(Fraction(c) for c in self.coords)
        if not coords:
            raise InvalidParameter("a dyadic vector needs at least one coordinate")
        for c in coords:
            if not _is_dyadic(c):
                raise InvalidParameter(f"{c} is not a dyadic rational")
        object.__setattr__(self, 'coords', coords)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, int]]) -> 'DyadicVector':
        """Build from (mantissa, exponent) pairs meaning mantissa / 2^exponent."""
        coords = []
        for mantissa, exponent in pairs:
            if exponent < 0:
                raise InvalidParameter(f"negative dyadic exponent {exponent}")
            coords.append(Fraction(mantissa, 2 ** exponent))
        return cls(tuple(coords))

    @property
    def pairs(self) -> Tuple[Tuple[int, int], ...]:
        """Normalized (mantissa, exponent) pairs."""
        return tuple((c.numerator, c.denominator.bit_length() - 1) for c in self.coords)

    @property
    def group(self) -> GroupDescriptor:
        return GroupDescriptor(GroupKind.DYADIC, len(self.coords))

    def _add(self, other: 'DyadicVector') -> 'DyadicVector':
        return DyadicVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> 'DyadicVector':
        return DyadicVector(tuple(-c for c in self.coords))

    def _compute_norm(self) -> Fraction:
        return sum((abs(c) for c in self.coords), Fraction(0))

    def multiply(self, k: int) -> 'DyadicVector':
        return DyadicVector(tuple(k * c for c in self.coords))

    def halve(self) -> 'DyadicVector':
        return DyadicVector(tuple(c / 2 for c in self.coords))

    def to_text(self) -> str:
        return "dyadic:[" + ",".join(f"{m}/2^{e}" for m, e in self.pairs) + "]"


def harmonic_sum(indices: Iterable[int]) -> Fraction:
    """Return the exact sum of 1/i over the given positive indices.

    The sum is formed over the least common multiple of the indices, so only
    one big-integer division happens at the end.
    """
    indices = list(indices)
    if not indices:
        return Fraction(0)
    common = math.lcm(*indices)
    return Fraction(sum(common // i for i in indices), common)


def harmonic_number(n: int) -> Fraction:
    """Return H_n = 1 + 1/2 + ... + 1/n exactly (H_0 = 0)."""
    if n < 0:
        raise InvalidParameter(f"harmonic index must be nonnegative, got {n}")
    return harmonic_sum(range(1, n + 1))


@dataclass(frozen=True)
class BitSupport(Element):
    """An eventually-zero binary sequence, stored as the set of indices i with a_i = 1."""
    indices: frozenset

    def __post_init__(self):
        indices = frozenset(self.indices)
        if any(isinstance(i, bool) or not isinstance(i, int) or i < 1 for i in indices):
            raise InvalidParameter(f"support indices must be positive integers: {sorted(indices)!r}")
        object.__setattr__(self, 'indices', indices)

    @property
    def group(self) -> GroupDescriptor:
        return GroupDescriptor(GroupKind.BITS)

    def _add(self, other: 'BitSupport') -> 'BitSupport':
        return BitSupport(self.indices ^ other.indices)

    def __neg__(self) -> 'BitSupport':
        return self

    def _compute_norm(self) -> Fraction:
        return harmonic_sum(self.indices)

    def multiply(self, k: int) -> 'BitSupport':
        return self if k % 2 else BitSupport(frozenset())

    def to_text(self) -> str:
        return "bits:{" + ",".join(str(i) for i in sorted(self.indices)) + "}"


def add(a: Element, b: Element) -> Element:
    """Return the group sum a + b.

    Raises:
        GroupMismatch: If a and b belong to different groups.
    """
    return a + b


def negate(a: Element) -> Element:
    """Return the inverse -a."""
    return -a


def subtract(a: Element, b: Element) -> Element:
    """Return a - b."""
    return a - b


def norm(a: Element) -> Fraction:
    """Return the induced norm of a, exactly."""
    return a.norm


def distance(a: Element, b: Element) -> Fraction:
    """Return d(a, b) = norm(a - b)."""
    return (a - b).norm


def double(a: Element) -> Element:
    """Return a + a."""
    return a + a


def multiply(a: Element, k: int) -> Element:
    """Return the integer multiple k*a."""
    return a.multiply(k)


def halve(a: Element) -> Element:
    """Return the unique element h with h + h = a.

    Raises:
        NotDivisible: If the group of a is not uniquely 2-divisible.
    """
    if not a.group.uniquely_2_divisible:
        raise NotDivisible(f"{a.group} is not uniquely 2-divisible")
    return a.halve()


def _harmonic_prefix_length(target: Fraction) -> int:
    """Smallest n with H_n >= target."""
    if target <= 0:
        return 0
    if target > MAX_HARMONIC_TARGET:
        raise WitnessOutOfRange(
            f"harmonic witness for {target} exceeds the supported target {MAX_HARMONIC_TARGET}"
        )
    # Float partial sums locate n; the exact check below settles it. The
    # accumulated float error stays far below the 1e-9 guard at this scale.
    goal = float(target) - 1e-9
    approx = 0.0
    n = 0
    while approx < goal:
        n += 1
        approx += 1.0 / n
    exact = harmonic_number(n)
    while exact < target:
        n += 1
        exact += Fraction(1, n)
    logger.debug("harmonic witness for %s uses prefix length %d", target, n)
    return n


def unbounded_witness(g: GroupDescriptor, M: RationalLike) -> Element:
    """Return a deterministic element e of g with norm(e) >= M.

    Lattices use ceil(M) times the first basis vector; the binary-sequence
    group uses the support {1..n} for the smallest n with H_n >= M.

    Args:
        g: The group.
        M: Nonnegative norm target.

    Returns:
        Element: The witness.

    Raises:
        Bounded: If g is bounded (never for the built-ins).
        InvalidParameter: If M is negative.
        WitnessOutOfRange: If M exceeds MAX_HARMONIC_TARGET on bits.
    """
    target = to_rational(M)
    if target < 0:
        raise InvalidParameter(f"norm target must be nonnegative, got {target}")
    if not g.unbounded:
        raise Bounded(f"{g} is bounded")
    if g.kind is GroupKind.BITS:
        n = _harmonic_prefix_length(target)
        return BitSupport(frozenset(range(1, n + 1)))
    return g.basis_multiple(math.ceil(target))


def doubling_witness(g: GroupDescriptor, M: RationalLike) -> Element:
    """Return u in g with norm(2u) >= M.

    Lattices use ceil(M/2) times the first basis vector.

    Raises:
        DoublingBounded: If 2X is bounded in g (the binary-sequence group).
        InvalidParameter: If M is negative.
    """
    target = to_rational(M)
    if target < 0:
        raise InvalidParameter(f"norm target must be nonnegative, got {target}")
    if not g.doubling_unbounded:
        raise DoublingBounded(f"2X is bounded in {g}: every doubled element is zero")
    return g.basis_multiple(math.ceil(target / 2))


_ELEMENT_RE = re.compile(r'^\s*(int|dyadic|bits):(.*?)\s*$')
_DYADIC_COORD_RE = re.compile(r'^(-?\d+)/2\^(\d+)$')


def _split_body(body: str, opening: str, closing: str) -> list:
    body = body.strip()
    if not (body.startswith(opening) and body.endswith(closing)):
        raise ParseError(f"expected {opening}...{closing}, got {body!r}")
    inner = body[1:-1].strip()
    return [token.strip() for token in inner.split(',')] if inner else []


def _parse_dyadic_coord(token: str) -> Fraction:
    match = _DYADIC_COORD_RE.match(token)
    if match:
        return Fraction(int(match.group(1)), 2 ** int(match.group(2)))
    value = to_rational(token)
    if not _is_dyadic(value):
        raise ParseError(f"{token!r} is not a dyadic rational")
    return value


def _parse_body(kind: GroupKind, body: str) -> Element:
    try:
        if kind is GroupKind.BITS:
            return BitSupport(frozenset(int(t) for t in _split_body(body, '{', '}')))
        if not body.strip().startswith('['):
            body = f"[{body}]"
        tokens = _split_body(body, '[', ']')
        if kind is GroupKind.INT:
            return IntVector(tuple(int(t) for t in tokens))
        return DyadicVector(tuple(_parse_dyadic_coord(t) for t in tokens))
    except ValueError as exc:
        raise ParseError(f"invalid {kind.value} element body {body!r}") from exc
    except InvalidParameter as exc:
        raise ParseError(str(exc)) from exc


def parse_element(text: str, group: Optional[GroupDescriptor] = None) -> Element:
    """Parse an element from its text form.

    Accepts the canonical forms 'int:[a,b]', 'dyadic:[m/2^e,...]' and
    'bits:{i,j}'. When a group is given the prefix may be dropped: '5',
    '[1,0]', '3/2' or '{1,2}' are read in that group.

    Args:
        text: The element text.
        group: Optional group used for prefix-less forms and checked
            against prefixed ones.

    Returns:
        Element: The parsed element.

    Raises:
        ParseError: If the text is malformed.
        GroupMismatch: If the parsed element is not in the given group.
    """
    match = _ELEMENT_RE.match(text or '')
    if match:
        element = _parse_body(GroupKind(match.group(1)), match.group(2))
    elif group is not None:
        element = _parse_body(group.kind, text)
    else:
        raise ParseError(f"element text needs a group prefix: {text!r}")
    if group is not None and element.group != group:
        raise GroupMismatch(f"{element} is not an element of {group}")
    return element
