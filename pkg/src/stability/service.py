"""
stabkit - Text-level operations

The CLI and the HTTP API both speak the same text grammars (group specs,
function specs, element texts, 'p/q' rationals). The functions here turn
those texts into scans, certificates and searches, so both surfaces emit
identical results for identical inputs.
"""

import logging
from typing import Iterable, List, Optional, Sequence

from .certify import (
    StabilityBudget,
    StabilityCertificate,
    budget_from_scan,
    certify_cauchy,
    certify_jensen,
)
from .defect import Equation, ScanReport, Window, parse_radii, sup_defect_scan
from .exceptions import InvalidParameter, ParseError
from .functions import TestFunction, parse_function_spec
from .groups import GroupDescriptor, RationalLike, parse_element, to_rational
from .hyper import (
    HyperBudget,
    HyperCertificate,
    WeightFunction,
    certify_hyper_schedule,
)
from .search import SharpnessResult, ValueGrid, adversarial_sharpness_search

logger = logging.getLogger(__name__)

EQUATION_NAMES = tuple(equation.value for equation in Equation)


def parse_equation(text: str) -> Equation:
    """Parse 'cauchy', 'jensen' or 'jensen-quad'."""
    try:
        return Equation((text or '').strip())
    except ValueError as exc:
        raise ParseError(f"unknown equation {text!r}; expected one of {EQUATION_NAMES}") from exc


def build_function(group: str, function: str, overrides: Iterable[str] = ()) -> TestFunction:
    """Build a TestFunction from a group spec, a function spec and 'x=value' overrides."""
    g = GroupDescriptor.parse(group)
    return parse_function_spec(function, g, overrides)


def build_window(g: GroupDescriptor, window: str, exponent: int = 0) -> Window:
    return Window.parse(g, window, exponent)


def run_scan(group: str, function: str, equation: str, window: str, shells: str = '',
             exponent: int = 0, overrides: Iterable[str] = (), weight: Optional[str] = None,
             jobs: int = 1) -> ScanReport:
    """Scan a window and tabulate the shell profile."""
    f = build_function(group, function, overrides)
    radii = parse_radii(shells) if shells else []
    phi = WeightFunction.parse(weight) if weight else None
    return sup_defect_scan(f, parse_equation(equation), build_window(f.domain, window, exponent),
                           shells=radii, weight=phi, jobs=jobs)


def run_certify(group: str, function: str, equation: str, x: str, y: str,
                r: Optional[RationalLike] = None, eta: Optional[RationalLike] = None,
                overrides: Iterable[str] = (), window: Optional[str] = None,
                shells: Optional[str] = None, exponent: int = 0,
                jobs: int = 1) -> StabilityCertificate:
    """Issue a Cauchy or Jensen certificate at (x, y).

    The budget is (r, eta) when both are given; otherwise it is derived from
    a scan of the window over the shell radii.
    """
    f = build_function(group, function, overrides)
    kind = parse_equation(equation)
    if r is not None and eta is not None:
        budget = StabilityBudget(to_rational(r), to_rational(eta))
    elif window and shells:
        budget = budget_from_scan(f, kind, build_window(f.domain, window, exponent),
                                  parse_radii(shells), jobs=jobs)
        logger.info("scan-derived budget r=%s eta=%s (tail is base rule: %s)",
                    budget.r, budget.eta, budget.tail_is_base_rule)
    else:
        raise InvalidParameter("give both r and eta, or a window and shells to derive them")
    px, py = parse_element(x, f.domain), parse_element(y, f.domain)
    if kind is Equation.CAUCHY:
        return certify_cauchy(f, budget, px, py)
    return certify_jensen(f, budget, px, py)


def run_hyper(group: str, function: str, equation: str, x: str, y: str, r: RationalLike,
              K: RationalLike, phi: str = 'linear', schedule: Sequence[RationalLike] = ('1',),
              overrides: Iterable[str] = ()) -> List[HyperCertificate]:
    """Issue one hyper certificate at (x, y) per target in the schedule."""
    f = build_function(group, function, overrides)
    kind = parse_equation(equation)
    weight = WeightFunction.parse(phi)
    if kind is Equation.CAUCHY:
        budget = HyperBudget.for_cauchy(r, K, weight)
    else:
        budget = HyperBudget.for_jensen(r, K, weight)
    if not schedule:
        raise InvalidParameter("the epsilon schedule is empty")
    px, py = parse_element(x, f.domain), parse_element(y, f.domain)
    return certify_hyper_schedule(f, budget, px, py, [to_rational(eps) for eps in schedule], kind)


def run_sharpness(group: str, equation: str, eps: RationalLike, window: str, r: RationalLike,
                  exponent: int = 0, step: Optional[RationalLike] = None,
                  bound: Optional[int] = None, strategy: str = 'auto', seed: int = 0,
                  iterations: int = 4000, exhaustive_limit: int = 13) -> SharpnessResult:
    """Run the adversarial sharpness search on a symmetric window."""
    g = GroupDescriptor.parse(group)
    eps = to_rational(eps)
    kind = parse_equation(equation)
    if kind is Equation.JENSEN_PLAIN:
        kind = Equation.JENSEN_QUAD
    grid = ValueGrid.default(eps)
    if step is not None or bound is not None:
        grid = ValueGrid(to_rational(step) if step is not None else grid.step,
                         bound if bound is not None else grid.bound)
    return adversarial_sharpness_search(
        build_window(g, window, exponent), kind, eps, r, grid=grid, strategy=strategy,
        exhaustive_limit=exhaustive_limit, seed=seed, iterations=iterations,
    )
