"""
stabkit - Adversarial sharpness search

This module searches base-plus-override functions for the largest defect
that is compatible with a shell constraint: every pair with
min(norm(x), norm(y)) >= r must have defect <= eps. The stability theorems
cap the answer at 5*eps (Cauchy) and 4*eps (quadrupled Jensen); the
extremal functions show the caps are attained, so a correct search lands
exactly on them.

Function values live on a grid of integer multiples of a step, which turns
every defect into the absolute value of an integer linear form. Small
windows are solved exactly by branch and bound with bounds propagation;
larger windows fall back to seeded hill climbing.
"""

import logging
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .defect import Equation, Window, sup_defect_scan
from .exceptions import (
    InfeasibleConstraint,
    InvalidParameter,
    UnsupportedDomain,
)
from .functions import BaseRule, Scalar, TestFunction
from .groups import Element, RationalLike, format_rational, halve, to_rational

logger = logging.getLogger(__name__)

# A linear form: ((variable, coefficient), ...); its value is |sum coef * units|.
Form = Tuple[Tuple[int, int], ...]

# Every pair type of a function supported in [-w, w] is realised by a pair
# inside [-4w, 4w]; the constraint is enumerated over that enlarged box.
CONSTRAINT_SCALE = 4


@dataclass(frozen=True)
class ValueGrid:
    """The values k*step for integer k in [-bound, bound]."""
    step: Fraction
    bound: int

    def __post_init__(self):
        if self.step <= 0 or self.bound < 0:
            raise InvalidParameter(f"invalid value grid step={self.step} bound={self.bound}")

    @classmethod
    def default(cls, eps: Fraction) -> 'ValueGrid':
        """Steps of eps/2 over [-3eps, 3eps]; the single value 0 when eps = 0."""
        if eps == 0:
            return cls(Fraction(1), 0)
        return cls(eps / 2, 6)

    @property
    def units(self) -> List[int]:
        return list(range(-self.bound, self.bound + 1))

    def value(self, units: int) -> Fraction:
        return units * self.step


@dataclass(frozen=True)
class SharpnessResult:
    """Outcome of adversarial_sharpness_search."""
    best_function: TestFunction
    best_sup: Fraction
    argmax: Tuple[Element, Element]
    equation: Equation
    eps: Fraction
    r: Fraction
    window: str
    strategy: str
    explored: int

    def to_dict(self) -> Dict[str, Any]:
        """Convert the result to its JSON-ready dictionary form."""
        return {
            'equation': self.equation.value,
            'eps': format_rational(self.eps),
            'r': format_rational(self.r),
            'window': self.window,
            'strategy': self.strategy,
            'explored': self.explored,
            'best_sup': format_rational(self.best_sup),
            'argmax': [self.argmax[0].to_text(), self.argmax[1].to_text()],
            'function': self.best_function.to_dict(),
        }


def _canonical(coefficients: Dict[int, int]) -> Optional[Form]:
    form = tuple(sorted((var, coef) for var, coef in coefficients.items() if coef))
    if not form:
        return None
    if form[0][1] < 0:
        form = tuple((var, -coef) for var, coef in form)
    return form


class _Problem:
    """The search as an integer constraint problem.

    Variable 0 is the base constant; variable i >= 1 is the value at the
    i-th window point. Points outside the window read the base constant.
    """

    def __init__(self, equation: Equation, window: Window, r: Fraction,
                 eps: Fraction, grid: ValueGrid):
        self.window = window
        self.grid = grid
        self.points = list(window.elements)
        self.index = {point: i + 1 for i, point in enumerate(self.points)}
        self.size = len(self.points) + 1
        # |sum| <= eps/step holds for an integer sum iff |sum| <= floor(eps/step)
        self.threshold = math.floor(eps / grid.step)

        premise = Equation.CAUCHY if equation is Equation.CAUCHY else Equation.JENSEN_PLAIN
        constraints = set()
        enlarged = window.scaled(CONSTRAINT_SCALE)
        for x in enlarged:
            for y in enlarged:
                if min(x.norm, y.norm) >= r:
                    form = self._form(premise, x, y)
                    if form is not None:
                        constraints.add(form)
        self.constraints = sorted(constraints)
        self.watch: List[List[int]] = [[] for _ in range(self.size)]
        for k, form in enumerate(self.constraints):
            for var, _ in form:
                self.watch[var].append(k)

        objectives = {}
        for x in window:
            for y in window:
                form = self._form(equation, x, y)
                if form is not None and form not in objectives:
                    objectives[form] = (x, y)
        self.objectives = sorted(objectives)
        logger.debug("search problem: %d variables, %d constraints, %d objective forms",
                     self.size, len(self.constraints), len(self.objectives))

    def _var(self, point: Element) -> int:
        return self.index.get(point, 0)

    def _form(self, equation: Equation, x: Element, y: Element) -> Optional[Form]:
        coefficients: Dict[int, int] = {}

        def put(point: Element, coef: int) -> None:
            var = self._var(point)
            coefficients[var] = coefficients.get(var, 0) + coef

        if equation is Equation.CAUCHY:
            put(x + y, 1)
            put(x, -1)
            put(y, -1)
        elif equation is Equation.JENSEN_PLAIN:
            put(halve(x + y), 2)
            put(x, -1)
            put(y, -1)
        else:
            put(halve(x + y), 4)
            put(x, -2)
            put(y, -2)
        return _canonical(coefficients)

    @staticmethod
    def evaluate(form: Form, values: Sequence[int]) -> int:
        return abs(sum(coef * values[var] for var, coef in form))

    @staticmethod
    def interval(form: Form, domains: Sequence[List[int]]) -> Tuple[int, int]:
        lo = hi = 0
        for var, coef in form:
            a, b = coef * domains[var][0], coef * domains[var][-1]
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    def propagate(self, domains: List[List[int]], queue: List[int]) -> bool:
        """Bounds propagation to a fixpoint; False when a domain empties."""
        pending = set(queue)
        while queue:
            k = queue.pop()
            pending.discard(k)
            form = self.constraints[k]
            lo, hi = self.interval(form, domains)
            if lo >= -self.threshold and hi <= self.threshold:
                continue
            for var, coef in form:
                a, b = coef * domains[var][0], coef * domains[var][-1]
                rest_lo, rest_hi = lo - min(a, b), hi - max(a, b)
                low, high = -self.threshold - rest_hi, self.threshold - rest_lo
                kept = [v for v in domains[var] if low <= coef * v <= high]
                if not kept:
                    return False
                if len(kept) != len(domains[var]):
                    domains[var] = kept
                    lo, hi = self.interval(form, domains)
                    for other in self.watch[var]:
                        if other not in pending:
                            pending.add(other)
                            queue.append(other)
        return True

    def upper_bound(self, domains: Sequence[List[int]]) -> int:
        best = 0
        for form in self.objectives:
            lo, hi = self.interval(form, domains)
            best = max(best, abs(lo), abs(hi))
        return best

    def objective(self, values: Sequence[int]) -> int:
        return max((self.evaluate(form, values) for form in self.objectives), default=0)

    def feasible_at(self, var: int, values: Sequence[int]) -> bool:
        return all(self.evaluate(self.constraints[k], values) <= self.threshold
                   for k in self.watch[var])

    def build_function(self, values: Sequence[int]) -> TestFunction:
        base = self.grid.value(values[0])
        overrides = {
            point: Scalar(self.grid.value(values[i + 1]))
            for i, point in enumerate(self.points)
            if values[i + 1] != values[0]
        }
        if base == 0:
            return TestFunction(self.window.group, BaseRule.ZERO, overrides=overrides)
        return TestFunction(self.window.group, BaseRule.CONSTANT,
                            constant=Scalar(base), overrides=overrides)


class _BranchAndBound:
    """Exact maximisation of the objective over all grid assignments."""

    def __init__(self, problem: _Problem):
        self.problem = problem
        self.best_units = -1
        self.best_values: Optional[List[int]] = None
        self.explored = 0

    def run(self) -> None:
        problem = self.problem
        domains = [problem.grid.units for _ in range(problem.size)]
        if not problem.propagate(domains, list(range(len(problem.constraints)))):
            raise InfeasibleConstraint("no grid function satisfies the shell constraint")
        self._descend(domains)

    def _descend(self, domains: List[List[int]]) -> None:
        self.explored += 1
        problem = self.problem
        if problem.upper_bound(domains) <= self.best_units:
            return
        open_vars = [var for var in range(problem.size) if len(domains[var]) > 1]
        if not open_vars:
            values = [domain[0] for domain in domains]
            score = problem.objective(values)
            if score > self.best_units:
                self.best_units, self.best_values = score, values
            return
        var = 0 if len(domains[0]) > 1 else min(open_vars, key=lambda v: (len(domains[v]), v))
        for value in sorted(domains[var], key=lambda v: (-abs(v), -v)):
            child = list(domains)
            child[var] = [value]
            if problem.propagate(child, list(problem.watch[var])):
                self._descend(child)


def _climb(problem: _Problem, rng: random.Random, moves: int) -> Tuple[List[int], int]:
    values = [0] * problem.size
    score = problem.objective(values)
    units = problem.grid.units
    for _ in range(moves):
        var = rng.randrange(problem.size)
        candidate = rng.choice(units)
        if candidate == values[var]:
            continue
        previous = values[var]
        values[var] = candidate
        if problem.feasible_at(var, values):
            new_score = problem.objective(values)
            if new_score >= score:
                score = new_score
                continue
        values[var] = previous
    return values, score


def _hill_climb(problem: _Problem, rng: random.Random, iterations: int,
                restarts: int = 4) -> Tuple[List[int], int]:
    """Split iterations over restarts, each climbing from the zero function.

    The zero function is always feasible; the earliest best walk wins ties.
    """
    moves = max(1, iterations // restarts)
    best_values, best_score = _climb(problem, rng, moves)
    for _ in range(restarts - 1):
        values, score = _climb(problem, rng, moves)
        if score > best_score:
            best_values, best_score = values, score
    return best_values, best_score


def adversarial_sharpness_search(window: Window, equation: Equation, eps: RationalLike,
                                 r: RationalLike, grid: Optional[ValueGrid] = None,
                                 strategy: str = "auto", exhaustive_limit: int = 13,
                                 seed: int = 0, iterations: int = 4000,
                                 restarts: int = 4) -> SharpnessResult:
    """Maximise the window sup defect over functions obeying the shell constraint.

    Args:
        window: Symmetric lattice box [-w, w] carrying the overrides.
        equation: CAUCHY or JENSEN_QUAD is maximised; the shell constraint
            uses the Cauchy defect or the plain Jensen defect respectively.
        eps: Shell bound, eps >= 0.
        r: Shell radius, 0 <= r <= w.
        grid: Value grid; defaults to ValueGrid.default(eps).
        strategy: 'exhaustive', 'hill-climb' or 'auto' (exhaustive up to
            exhaustive_limit window points).
        exhaustive_limit: Window size at which 'auto' stops being exhaustive.
        seed: Seed for hill climbing.
        iterations: Hill-climbing moves.
        restarts: Hill-climbing walks sharing the iterations.

    Returns:
        SharpnessResult: The best function found and its sup defect.

    Raises:
        UnsupportedDomain: For the binary-sequence group, or Jensen forms on
            a group that is not uniquely 2-divisible.
        InvalidParameter: For a negative eps, an asymmetric window or r
            outside [0, w], or restarts < 1.
    """
    eps, r = to_rational(eps), to_rational(r)
    g = window.group
    if not g.is_lattice:
        raise UnsupportedDomain("the sharpness search runs on lattice windows")
    if equation.needs_midpoint and not g.uniquely_2_divisible:
        raise UnsupportedDomain(f"Jensen searches need a uniquely 2-divisible group, not {g}")
    if equation is Equation.JENSEN_PLAIN:
        raise InvalidParameter("maximise the quadrupled Jensen defect, not the plain one")
    if eps < 0:
        raise InvalidParameter(f"epsilon must be nonnegative, got {eps}")
    if window.lo is None or window.lo != -window.hi:
        raise InvalidParameter("the search window must be a symmetric box [-w, w]")
    if not 0 <= r <= window.hi:
        raise InvalidParameter(f"shell radius {r} must lie in [0, {window.hi}]")
    if strategy not in ("auto", "exhaustive", "hill-climb"):
        raise InvalidParameter(f"unknown strategy {strategy!r}")
    if restarts < 1:
        raise InvalidParameter(f"restarts must be at least 1, got {restarts}")

    grid = grid or ValueGrid.default(eps)
    problem = _Problem(equation, window, r, eps, grid)
    if strategy == "auto":
        strategy = "exhaustive" if len(window) <= exhaustive_limit else "hill-climb"

    if strategy == "exhaustive":
        solver = _BranchAndBound(problem)
        solver.run()
        values, explored = solver.best_values, solver.explored
    else:
        values, _ = _hill_climb(problem, random.Random(seed), iterations, restarts)
        explored = iterations
    logger.info("sharpness search (%s, %s) on %s explored %d nodes",
                strategy, equation.value, window.description, explored)

    best_function = problem.build_function(values)
    report = sup_defect_scan(best_function, equation, window)
    return SharpnessResult(
        best_function=best_function,
        best_sup=report.max_defect,
        argmax=report.argmax,
        equation=equation,
        eps=eps,
        r=r,
        window=window.description,
        strategy=strategy,
        explored=explored,
    )
