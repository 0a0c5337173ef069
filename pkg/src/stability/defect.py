"""
stabkit - Defect functionals and window scans

This module provides the Cauchy and Jensen defect functionals, finite
enumeration windows, and exhaustive scans that report the maximal defect
together with a shell profile: for each radius r, the sup of the defect
over window pairs with min(norm(x), norm(y)) >= r. The shell profile is
the finite stand-in for the lim sup as min(norm(x), norm(y)) grows; it is
a lower bound for the true sup over each shell.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from fractions import Fraction
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .exceptions import (
    DomainMismatch,
    EmptyGrid,
    EmptyWindow,
    InvalidParameter,
    NotDivisible,
    ParseError,
)
from .functions import CodomainValue, TestFunction
from .groups import (
    BitSupport,
    DyadicVector,
    Element,
    GroupDescriptor,
    GroupKind,
    IntVector,
    RationalLike,
    format_rational,
    halve,
    to_rational,
)

logger = logging.getLogger(__name__)

Weight = Callable[[Fraction], Fraction]


class Equation(Enum):
    """The functional equations whose defects can be measured."""
    CAUCHY = "cauchy"
    JENSEN_PLAIN = "jensen"
    JENSEN_QUAD = "jensen-quad"

    @property
    def needs_midpoint(self) -> bool:
        return self is not Equation.CAUCHY


def _check_pair(f: TestFunction, x: Element, y: Element) -> None:
    for point in (x, y):
        if not isinstance(point, Element) or point.group != f.domain:
            raise DomainMismatch(f"{point} is not in the domain {f.domain}")


def _midpoint_value(f: TestFunction, x: Element, y: Element) -> CodomainValue:
    if not f.domain.uniquely_2_divisible:
        raise NotDivisible(f"Jensen defects need a uniquely 2-divisible domain, not {f.domain}")
    return f(halve(x + y))


def cauchy_defect(f: TestFunction, x: Element, y: Element) -> Fraction:
    """Return the codomain norm of f(x+y) - f(x) - f(y)."""
    _check_pair(f, x, y)
    return (f(x + y) - f(x) - f(y)).norm


def jensen_defect(f: TestFunction, x: Element, y: Element) -> Fraction:
    """Return the codomain norm of 2f((x+y)/2) - f(x) - f(y).

    Raises:
        NotDivisible: If the domain is not uniquely 2-divisible.
    """
    _check_pair(f, x, y)
    return (_midpoint_value(f, x, y).scale(2) - f(x) - f(y)).norm


def jensen_quad_defect(f: TestFunction, x: Element, y: Element) -> Fraction:
    """Return the codomain norm of 4f((x+y)/2) - 2f(x) - 2f(y)."""
    _check_pair(f, x, y)
    return (_midpoint_value(f, x, y).scale(4) - f(x).scale(2) - f(y).scale(2)).norm


_DEFECTS = {
    Equation.CAUCHY: cauchy_defect,
    Equation.JENSEN_PLAIN: jensen_defect,
    Equation.JENSEN_QUAD: jensen_quad_defect,
}


def defect(f: TestFunction, equation: Equation, x: Element, y: Element) -> Fraction:
    """Dispatch to the defect functional of the given equation."""
    return _DEFECTS[equation](f, x, y)


def weighted_defect(f: TestFunction, phi: Weight, x: Element, y: Element,
                    equation: Equation = Equation.CAUCHY) -> Fraction:
    """Return phi(norm(x - y)) times the defect of f at (x, y)."""
    value = defect(f, equation, x, y)
    if value == 0:
        return Fraction(0)
    return phi((x - y).norm) * value


@dataclass(frozen=True)
class PairSample:
    """One evaluated pair of a scan."""
    x: Element
    y: Element
    defect: Fraction
    min_norm: Fraction


@dataclass(frozen=True)
class Window:
    """A finite, ordered set of elements of one group.

    Lattice windows are boxes [lo, hi]^dim on the grid of step 1/2^exponent;
    binary-sequence windows hold every support inside {1..max_index}.
    """
    group: GroupDescriptor
    elements: Tuple[Element, ...]
    description: str
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    exponent: int = 0

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)

    def __contains__(self, x: Element) -> bool:
        return x in self.members

    @cached_property
    def members(self) -> frozenset:
        return frozenset(self.elements)

    @property
    def radius(self) -> Fraction:
        """The largest norm in the window."""
        return max((x.norm for x in self.elements), default=Fraction(0))

    @classmethod
    def box(cls, g: GroupDescriptor, lo: RationalLike, hi: RationalLike,
            exponent: int = 0) -> 'Window':
        """Enumerate the lattice box [lo, hi]^dim with step 1/2^exponent.

        Raises:
            InvalidParameter: For the binary-sequence group, for a positive
                exponent on an integer lattice, or for lo > hi.
        """
        lo, hi = to_rational(lo), to_rational(hi)
        if not g.is_lattice:
            raise InvalidParameter("boxes are only defined on lattices")
        if exponent < 0 or (exponent > 0 and g.kind is GroupKind.INT):
            raise InvalidParameter(f"step exponent {exponent} is not available on {g}")
        if lo > hi:
            raise InvalidParameter(f"empty range {lo}..{hi}")
        step = Fraction(1, 2 ** exponent)
        first = -((-lo) // step)
        last = hi // step
        line = [k * step for k in range(first, last + 1)]
        if g.kind is GroupKind.INT:
            elements = [IntVector(tuple(int(c) for c in coords))
                        for coords in itertools.product(line, repeat=g.dim)]
        else:
            elements = [DyadicVector(coords) for coords in itertools.product(line, repeat=g.dim)]
        suffix = f" step 1/2^{exponent}" if exponent else ""
        description = f"{g.spec()} [{format_rational(lo)}..{format_rational(hi)}]{suffix}"
        return cls(g, tuple(elements), description, lo=lo, hi=hi, exponent=exponent)

    @classmethod
    def supports(cls, max_index: int) -> 'Window':
        """Enumerate every support inside {1..max_index}, ordered by bitmask."""
        if max_index < 0:
            raise InvalidParameter(f"max index must be nonnegative, got {max_index}")
        elements = tuple(
            BitSupport(frozenset(i + 1 for i in range(max_index) if mask >> i & 1))
            for mask in range(2 ** max_index)
        )
        g = GroupDescriptor(GroupKind.BITS)
        return cls(g, elements, f"bits supports in {{1..{max_index}}}",
                   lo=Fraction(1), hi=Fraction(max_index))

    @classmethod
    def parse(cls, g: GroupDescriptor, text: str, exponent: int = 0) -> 'Window':
        """Parse 'lo..hi' for lattices, or 'n' / '1..n' for binary sequences.

        Raises:
            ParseError: If the text is malformed.
        """
        text = (text or '').strip()
        try:
            if g.kind is GroupKind.BITS:
                lo_text, sep, hi_text = text.partition('..')
                if sep and to_rational(lo_text) != 1:
                    raise ParseError("binary-sequence windows start at index 1")
                return cls.supports(int(to_rational(hi_text if sep else lo_text)))
            lo_text, sep, hi_text = text.partition('..')
            if not sep:
                raise ParseError(f"expected 'lo..hi', got {text!r}")
            return cls.box(g, to_rational(lo_text), to_rational(hi_text), exponent)
        except InvalidParameter as exc:
            raise ParseError(str(exc)) from exc

    def scaled(self, factor: int) -> 'Window':
        """Return the box with both bounds multiplied by factor."""
        if self.lo is None or not self.group.is_lattice:
            raise InvalidParameter("only lattice boxes can be scaled")
        return Window.box(self.group, self.lo * factor, self.hi * factor, self.exponent)


def enumerate_pairs(f: TestFunction, equation: Equation,
                    window: Window) -> Iterator[PairSample]:
    """Yield a PairSample for every ordered pair of window elements."""
    for x in window:
        for y in window:
            yield PairSample(x, y, defect(f, equation, x, y), min(x.norm, y.norm))


@dataclass(frozen=True)
class ShellBound:
    """Sup of the defect over window pairs with min norm >= r."""
    r: Fraction
    sup: Fraction
    argmax: Optional[Tuple[Element, Element]]
    pair_count: int


@dataclass(frozen=True)
class ScanReport:
    """Result of an exhaustive window scan.

    Ties for the maximum resolve to the lexicographically greatest
    serialized pair, so shards merge with a plain max.
    """
    equation: Equation
    window: str
    max_defect: Fraction
    argmax: Tuple[Element, Element]
    shell_profile: Tuple[ShellBound, ...]
    pair_count: int
    weight: Optional[str] = None

    def shell_sup(self, r: RationalLike) -> Fraction:
        """Return the shell sup recorded for radius r."""
        r = to_rational(r)
        for shell in self.shell_profile:
            if shell.r == r:
                return shell.sup
        raise KeyError(f"radius {r} is not in the shell grid")

    def to_dict(self) -> Dict[str, Any]:
        """Convert the report to its JSON-ready dictionary form."""
        def pair(value):
            return [value[0].to_text(), value[1].to_text()] if value else None

        return {
            'equation': self.equation.value,
            'window': self.window,
            'weight': self.weight,
            'pair_count': self.pair_count,
            'max_defect': format_rational(self.max_defect),
            'argmax': pair(self.argmax),
            'shell_profile': [
                {
                    'r': format_rational(shell.r),
                    'sup': format_rational(shell.sup),
                    'argmax': pair(shell.argmax),
                    'pair_count': shell.pair_count,
                }
                for shell in self.shell_profile
            ],
        }


# (value, x text, y text, x, y): ordering on the first three fields only matters.
_Best = Tuple[Fraction, str, str, Element, Element]


def _better(candidate: _Best, incumbent: Optional[_Best]) -> bool:
    return incumbent is None or candidate[:3] > incumbent[:3]


def _scan_rows(f: TestFunction, equation: Equation, xs: Sequence[Element],
               ys: Sequence[Element], radii: Sequence[Fraction],
               weight: Optional[Weight]) -> Tuple[Optional[_Best], List[Optional[_Best]], List[int]]:
    """Scan the pairs xs x ys; module level so process pools can run it."""
    best: Optional[_Best] = None
    shell_best: List[Optional[_Best]] = [None] * len(radii)
    counts = [0] * len(radii)
    column = [(y, y.to_text(), y.norm) for y in ys]
    for x in xs:
        x_text, x_norm = x.to_text(), x.norm
        for y, y_text, y_norm in column:
            if weight is None:
                value = defect(f, equation, x, y)
            else:
                value = weighted_defect(f, weight, x, y, equation)
            candidate = (value, x_text, y_text, x, y)
            if _better(candidate, best):
                best = candidate
            smallest = min(x_norm, y_norm)
            for i, r in enumerate(radii):
                if smallest < r:
                    break
                counts[i] += 1
                if _better(candidate, shell_best[i]):
                    shell_best[i] = candidate
    return best, shell_best, counts


def _chunks(items: Sequence[Element], parts: int) -> List[Sequence[Element]]:
    size = -(-len(items) // parts)
    return [items[i:i + size] for i in range(0, len(items), size)]


def sup_defect_scan(f: TestFunction, equation: Equation, window: Window,
                    shells: Sequence[RationalLike] = (),
                    weight: Optional[Weight] = None, jobs: int = 1) -> ScanReport:
    """Scan every ordered pair of the window exactly.

    Args:
        f: The function to scan.
        equation: Which defect to measure.
        window: Finite set of domain elements; pairs range over window x window.
        shells: Radii r of the shell profile. Shells with no pairs report 0.
        weight: Optional weight phi; the scan then measures phi(norm(x-y))
            times the defect.
        jobs: Number of worker processes. The result does not depend on it.

    Returns:
        ScanReport: Maximum, argmax and shell profile.

    Raises:
        EmptyWindow: If the window has no elements.
    """
    if len(window) == 0:
        raise EmptyWindow("cannot scan an empty window")
    if window.group != f.domain:
        raise DomainMismatch(f"window over {window.group} does not match domain {f.domain}")
    radii = sorted({to_rational(r) for r in shells})
    elements = list(window.elements)
    logger.debug("scanning %d pairs of %s (%s, jobs=%d)",
                 len(elements) ** 2, window.description, equation.value, jobs)

    if jobs > 1 and len(elements) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_scan_rows, f, equation, chunk, elements, radii, weight)
                for chunk in _chunks(elements, jobs)
            ]
            partials = [future.result() for future in futures]
    else:
        partials = [_scan_rows(f, equation, elements, elements, radii, weight)]

    best: Optional[_Best] = None
    shell_best: List[Optional[_Best]] = [None] * len(radii)
    counts = [0] * len(radii)
    for part_best, part_shells, part_counts in partials:
        if part_best is not None and _better(part_best, best):
            best = part_best
        for i, candidate in enumerate(part_shells):
            if candidate is not None and _better(candidate, shell_best[i]):
                shell_best[i] = candidate
            counts[i] += part_counts[i]

    profile = tuple(
        ShellBound(
            r=r,
            sup=shell_best[i][0] if shell_best[i] else Fraction(0),
            argmax=(shell_best[i][3], shell_best[i][4]) if shell_best[i] else None,
            pair_count=counts[i],
        )
        for i, r in enumerate(radii)
    )
    return ScanReport(
        equation=equation,
        window=window.description,
        max_defect=best[0],
        argmax=(best[3], best[4]),
        shell_profile=profile,
        pair_count=len(elements) ** 2,
        weight=getattr(weight, 'label', None) if weight is not None else None,
    )


def parse_radii(text: str) -> List[Fraction]:
    """Parse a comma-separated radius list such as '1,2,4' or '1/2,1'.

    Raises:
        EmptyGrid: If no radius is given.
    """
    radii = [to_rational(token) for token in (text or '').split(',') if token.strip()]
    if not radii:
        raise EmptyGrid("the radius grid is empty")
    if any(r < 0 for r in radii):
        raise InvalidParameter("radii must be nonnegative")
    return radii
