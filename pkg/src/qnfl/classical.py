"""Classical no-free-lunch bounds, checked by exhaustive enumeration in exact arithmetic."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import DomainError, ResourceError

MAX_FUNCTIONS = 10**7
MAX_TRAINING_SETS = 10**5
MAX_BIJECTION_DOMAIN = 7

# Maps (x, training support, training values, y_size) -> guessed output.
OffSupportRule = Callable[[int, Sequence[int], Sequence[int], int], int]


@dataclass(frozen=True)
class FunctionTable:
    domain_size: int
    codomain_size: int
    table: tuple[int, ...]

    def __post_init__(self):
        if len(self.table) != self.domain_size:
            raise DomainError("table length must equal domain size")
        if any(not 0 <= y < self.codomain_size for y in self.table):
            raise DomainError("table entries out of range")

    @property
    def is_bijection(self) -> bool:
        return self.domain_size == self.codomain_size and len(set(self.table)) == self.domain_size


@dataclass(frozen=True)
class ClassicalExperimentResult:
    expected_risk: Fraction
    bound: Fraction
    function_count: int
    training_set_count: int


def classical_bound(x_size: int, y_size: int, n: int) -> Fraction:
    """``(1 - 1/|Y|)(1 - n/|X|)``."""
    if y_size < 1 or x_size < 1:
        raise DomainError("set sizes must be positive")
    if not 0 <= n <= x_size:
        raise DomainError(f"n={n} must lie in [0, |X|={x_size}]")
    return (1 - Fraction(1, y_size)) * (1 - Fraction(n, x_size))


def invertible_bound_raw(x_size: int, n: int) -> Fraction:
    """``1 - (n+1)/|X|`` without clamping (negative at ``n = |X|``)."""
    if x_size < 1:
        raise DomainError("set size must be positive")
    if not 0 <= n <= x_size:
        raise DomainError(f"n={n} must lie in [0, |X|={x_size}]")
    return 1 - Fraction(n + 1, x_size)


def invertible_bound(x_size: int, n: int) -> Fraction:
    """``1 - (n+1)/|X|`` clamped at zero."""
    return max(Fraction(0), invertible_bound_raw(x_size, n))


def constant_rule(x, support, values, y_size) -> int:
    return 0


def modular_rule(x, support, values, y_size) -> int:
    """An alternative deterministic guess depending on the input and the training data."""
    return (x + sum(values)) % y_size


def _risk(f: Sequence[int], h: Sequence[int]) -> Fraction:
    return Fraction(sum(a != b for a, b in zip(f, h)), len(f))


def _supports(x_size: int, n: int) -> list[tuple[int, ...]]:
    count = math.comb(x_size, n)
    if count > MAX_TRAINING_SETS:
        raise ResourceError(f"{count} training supports exceed the guard {MAX_TRAINING_SETS}")
    return list(itertools.combinations(range(x_size), n))


def brute_force_expected_risk(
    x_size: int, y_size: int, n: int, rule: OffSupportRule = constant_rule
) -> ClassicalExperimentResult:
    """Exact ``E_f E_S R_f(h_S)`` over all functions and all ``n``-element supports.

    ``h_S`` copies the training values on the support and answers with
    ``rule`` elsewhere.
    """
    bound = classical_bound(x_size, y_size, n)
    n_functions = y_size**x_size
    if n_functions > MAX_FUNCTIONS:
        raise ResourceError(f"{n_functions} functions exceed the enumeration guard {MAX_FUNCTIONS}")
    supports = _supports(x_size, n)

    total = Fraction(0)
    for f in itertools.product(range(y_size), repeat=x_size):
        for s in supports:
            values = [f[x] for x in s]
            on = dict(zip(s, values))
            h = [on[x] if x in on else rule(x, s, values, y_size) for x in range(x_size)]
            total += _risk(f, h)
    expected = total / (n_functions * len(supports))
    return ClassicalExperimentResult(expected, bound, n_functions, len(supports))


def brute_force_invertible_expected_risk(x_size: int, n: int) -> ClassicalExperimentResult:
    """Exact averaged risk over all bijections of an ``|X|``-element set.

    Off the support, inputs are assigned injectively to the outputs not used
    by the training set, in increasing order of both.
    """
    if x_size > MAX_BIJECTION_DOMAIN:
        raise ResourceError(f"|X|={x_size} exceeds the factorial guard {MAX_BIJECTION_DOMAIN}")
    bound = invertible_bound(x_size, n)
    supports = _supports(x_size, n)
    n_functions = math.factorial(x_size)

    total = Fraction(0)
    for f in itertools.permutations(range(x_size)):
        for s in supports:
            on = {x: f[x] for x in s}
            unused = iter(sorted(set(range(x_size)) - set(on.values())))
            h = [on[x] if x in on else next(unused) for x in range(x_size)]
            total += _risk(f, h)
    expected = total / (n_functions * len(supports))
    return ClassicalExperimentResult(expected, bound, n_functions, len(supports))
