"""Composite closed Newton-Cotes integration of order 12."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError

ORDER = 12


def _solve_exact(matrix, rhs):
    """Gauss-Jordan elimination over the rationals."""
    n = len(rhs)
    a = [row[:] + [rhs[i]] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        a[col] = [v * inv for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [v - factor * w for v, w in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


@lru_cache(maxsize=None)
def _exact_weights(q: int):
    # sum_j w_j j**m = integral_0^q t**m dt = q**(m+1) / (m+1), in units of the step
    matrix = [[Fraction(j) ** m for j in range(q + 1)] for m in range(q + 1)]
    rhs = [Fraction(q) ** (m + 1) / (m + 1) for m in range(q + 1)]
    return tuple(_solve_exact(matrix, rhs))


def newton_cotes_weights(Q: int = ORDER) -> np.ndarray:
    """The Q+1 closed Newton-Cotes weights for unit node spacing.

    They are the exact rational solution of the moment equations, rounded
    once to double precision, so ``sum(w) == Q``.
    """
    if Q != ORDER:
        raise DomainError(f"only order {ORDER} is supported")
    return np.array([float(w) for w in _exact_weights(Q)])


@dataclass(frozen=True)
class CompositeRule:
    a: float = 0.0
    b: float = 20.0
    Q: int = ORDER
    n: int = 5000 * ORDER
    weights: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.n <= 0 or self.n % self.Q:
            raise DomainError("n must be a positive multiple of Q")
        if not self.b > self.a:
            raise DomainError("need b > a")
        if self.weights is None:
            object.__setattr__(self, "weights", newton_cotes_weights(self.Q))

    @property
    def step(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def panels(self) -> int:
        return self.n // self.Q

    def nodes(self) -> np.ndarray:
        return self.a + self.step * np.arange(self.n + 1)

    def node_weights(self) -> np.ndarray:
        """Composite weights (already multiplied by the step) for every node."""
        w = np.zeros(self.n + 1)
        core = self.weights[:-1].copy()
        core[0] += self.weights[-1]
        w[:-1] = np.tile(core, self.panels)
        # the first node of the first panel has no preceding panel
        w[0] = self.weights[0]
        w[-1] = self.weights[-1]
        return w * self.step


def integrate(f, rule: CompositeRule | None = None) -> complex:
    """Integrate ``f`` (vectorized, complex allowed) over ``[rule.a, rule.b]``.

    The weighted node values are summed with ``math.fsum`` separately for the
    real and imaginary parts; order-12 weights alternate in sign, so plain
    accumulation would lose digits.
    """
    rule = rule or CompositeRule()
    x = rule.nodes()
    values = np.asarray(f(x), dtype=complex)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        node = float(x[np.argmax(bad)])
        raise QuadratureError(f"integrand not finite at node {node!r}", node=node)
    terms = rule.node_weights() * values
    return complex(math.fsum(terms.real), math.fsum(terms.imag))
