# -*- coding: utf-8 -*-
# ---
# jupyter:
#   jupytext:
#     formats: py:percent,md:myst
#     notebook_metadata_filter: -jupytext.text_representation.jupytext_version
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python (quditmub-dev)
#     language: python
#     name: quditmub-dev
# ---

# %% [markdown] editable=true slideshow={"slide_type": ""}
# # Arithmetic over $\mathbb{Z}_d$ and the $d$-th roots of unity
#
# All phases attached to basis operators are integer exponents $k$ of
# $ω = e^{2πi/d}$. Sums of such phases, like traces of monomial operators,
# are therefore elements of the cyclotomic ring $\mathbb{Z}[ω]$, and
# questions like "is this trace zero?" can be answered exactly rather than
# up to a floating point tolerance.
#
# An integer vector $(c_0, \dotsc, c_{d-1})$ stands for the sum
# $\sum_s c_s ω^s$. We decide whether it vanishes by reducing it to the power
# basis $1, ω, \dotsc, ω^{φ(d)-1}$ of $\mathbb{Z}[ω]$:
#
# - For $d$ prime, the minimal polynomial of $ω$ is $1 + x + \dotsb + x^{d-1}$,
#   so the only rule needed is $ω^{d-1} = -(1 + ω + \dotsb + ω^{d-2})$.
# - For other $d$, $x^s$ is reduced modulo the $d$-th cyclotomic polynomial
#   $Φ_d$. $Φ_d$ is monic with integer coefficients, so the remainder is
#   computed exactly over $\mathbb{Z}$.
#
# Both rules are collected in a *reduction matrix* $R$ of shape $d × φ(d)$,
# whose row $s$ holds the coordinates of $ω^s$. The sum vanishes iff $c R = 0$.

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from __future__ import annotations

import math
import time
import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Literal, Union

import numpy as np
import sympy
from more_itertools import chunked
from tqdm.auto import tqdm

from scityping.numpy import Array
from numpy.typing import ArrayLike

from .config import config
from .memoize import memoize
from .utils import DimensionMismatchError, ResourceLimitError, get_progbar, complex_to_json

logger = logging.getLogger(__name__)

# %%
__all__ = ["Dimension", "PhaseExp", "CsVector", "CyclotomicValue",
           "is_prime", "factorize", "root_of_unity", "root_table", "reduction_matrix",
           "cyclotomic_reduce", "vanishing_sum_check", "enumerate_vanishing_sums"]


# %% [markdown]
# ## Dimensions and primality
#
# Dimensions in scope are tiny, so primality is decided by trial division.

# %%
def is_prime(d: int) -> bool:
    """Deterministic trial division up to √d."""
    d = int(d)
    if d < 2:
        raise ValueError(f"Dimensions must be at least 2; received {d}.")
    return all(d % p for p in range(2, math.isqrt(d) + 1))


# %%
class Dimension(int):
    """
    A Hilbert space dimension d ≥ 2, with a cached primality flag.

    `Dimension` is an `int`, so it can be used anywhere an integer is expected.
    Non-prime values are allowed, so that the failure modes of prime-only
    constructions can be exercised.
    """
    is_prime: bool

    def __new__(cls, d):
        if isinstance(d, Dimension):
            return d
        if isinstance(d, (bool, float)) or int(d) != d:
            raise TypeError(f"Dimensions must be integers; received {d!r}.")
        if d < 2:
            raise ValueError(f"Dimensions must be at least 2; received {d}.")
        obj = super().__new__(cls, int(d))
        obj.is_prime = is_prime(d)
        return obj

    def __repr__(self):
        return f"Dimension({int(self)})"

    def __reduce__(self):
        return (Dimension, (int(self),))


# %%
def factorize(D: int) -> list[Dimension]:
    """
    Prime factors of `D` with multiplicity, in ascending order.

    >>> factorize(12)
    [Dimension(2), Dimension(2), Dimension(3)]
    """
    D = Dimension(D)
    return [Dimension(p) for p, m in sorted(sympy.factorint(int(D)).items())
            for _ in range(m)]


# %% [markdown]
# ## Phases

# %%
@dataclass(frozen=True)
class PhaseExp:
    """
    The root of unity ω^k, ω = exp(2πi/d), stored by its exponent 0 ≤ k < d.
    Use `PhaseExp.of` to construct from an arbitrary integer.
    """
    k: int
    d: Dimension

    def __post_init__(self):
        object.__setattr__(self, "d", Dimension(self.d))
        if not (isinstance(self.k, (int, np.integer)) and 0 <= self.k < self.d):
            raise ValueError(f"Phase exponent must be an integer in [0, {self.d-1}]; "
                             f"received {self.k!r}.")
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def of(cls, k: int, d: int) -> PhaseExp:
        return cls(int(k) % int(d), d)

    def _exponent_of(self, other) -> int:
        if isinstance(other, PhaseExp):
            if other.d != self.d:
                raise DimensionMismatchError(
                    f"Cannot combine phases of ω_{self.d} and ω_{other.d}.")
            return other.k
        elif isinstance(other, (int, np.integer)):
            return int(other)
        return NotImplemented

    def __add__(self, other):
        k = self._exponent_of(other)
        if k is NotImplemented:
            return k
        return PhaseExp.of(self.k + k, self.d)
    __radd__ = __add__

    def __sub__(self, other):
        k = self._exponent_of(other)
        if k is NotImplemented:
            return k
        return PhaseExp.of(self.k - k, self.d)

    def __neg__(self):
        return PhaseExp.of(-self.k, self.d)

    @property
    def value(self) -> complex:
        return root_of_unity(self)

    def __complex__(self):
        return self.value

    def to_json(self) -> dict:
        return {"k": self.k, "d": int(self.d)}


# %%
def root_of_unity(p: PhaseExp) -> complex:
    """Evaluate e^{2πik/d}."""
    if p.k == 0:
        return 1+0j
    θ = 2*math.pi*p.k/p.d
    return complex(math.cos(θ), math.sin(θ))

def root_table(d: int) -> Array[complex,1]:
    """Array of ω^k for k = 0…d-1."""
    return np.array([root_of_unity(PhaseExp(k, d)) for k in range(int(d))])


# %% [markdown]
# ## Exact sums of roots of unity

# %%
@dataclass(frozen=True)
class CsVector:
    """
    Non-negative integer multiplicities `c[s]` of ω^s, s = 0…d-1.
    When produced from the diagonals of a permutation matrix, they sum to d.
    """
    d: Dimension
    c: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "d", Dimension(self.d))
        c = tuple(int(cs) for cs in self.c)
        if len(c) != self.d:
            raise DimensionMismatchError(
                f"A CsVector for d={self.d} needs {self.d} entries; received {len(c)}.")
        if any(cs < 0 for cs in c):
            raise ValueError(f"CsVector entries must be non-negative; received {c}.")
        object.__setattr__(self, "c", c)

    @property
    def total(self) -> int:
        return sum(self.c)

    def evaluate(self) -> complex:
        return sum(cs*root_of_unity(PhaseExp(s, self.d)) for s, cs in enumerate(self.c))

    def to_json(self) -> list[int]:
        return list(self.c)


# %%
@memoize
def reduction_matrix(d: int) -> Array[np.int64,2]:
    """
    Integer matrix of shape (d, φ(d)) whose row `s` holds the coordinates of
    ω^s in the power basis 1, ω, …, ω^{φ(d)-1}.
    """
    d = Dimension(d)
    if d.is_prime:
        R = np.zeros((d, d-1), dtype=np.int64)
        R[:d-1] = np.eye(d-1, dtype=np.int64)
        R[d-1] = -1
    else:
        x = sympy.Symbol("x")
        Φ = sympy.cyclotomic_poly(int(d), x, polys=True)
        R = np.zeros((d, Φ.degree()), dtype=np.int64)
        for s in range(d):
            r = sympy.Poly(x**s, x, domain="ZZ").rem(Φ)
            coeffs = [int(c) for c in reversed(r.all_coeffs())]
            R[s, :len(coeffs)] = coeffs
    R.flags.writeable = False
    return R


# %%
def cyclotomic_reduce(coeffs: ArrayLike, d: int) -> tuple[int, ...]:
    """
    Exact coordinates of Σ_s coeffs[s] ω^s in the power basis of ℤ[ω].
    Coefficients may be negative; entries beyond index d-1 wrap around
    (ω^d = 1).
    """
    d = Dimension(d)
    c = np.asarray(coeffs, dtype=np.int64)
    if c.ndim != 1:
        raise ValueError(f"Expected a 1-d coefficient vector; received shape {c.shape}.")
    if len(c) != d:
        c = np.bincount(np.arange(len(c)) % d, weights=c, minlength=d).astype(np.int64)
    return tuple(int(x) for x in c @ reduction_matrix(d))


# %%
def vanishing_sum_check(v: CsVector) -> bool:
    """Exact test of Σ_s c_s ω^s = 0."""
    return not any(cyclotomic_reduce(v.c, v.d))


# %% [markdown]
# `CyclotomicValue` is the exact result type of traces and Hilbert–Schmidt
# inner products of monomial operators: $\frac{1}{q}\sum_s c_s ω^s$.

# %%
@dataclass(frozen=True, eq=False)
class CyclotomicValue:
    d: Dimension
    coeffs: tuple[int, ...]
    denominator: int = 1

    def __post_init__(self):
        object.__setattr__(self, "d", Dimension(self.d))
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if self.denominator <= 0:
            raise ValueError("The denominator of a CyclotomicValue must be positive.")

    def _scaled_reduction(self, factor: int) -> tuple[int, ...]:
        return cyclotomic_reduce([factor*c for c in self.coeffs], self.d)

    def is_zero(self) -> bool:
        return not any(self._scaled_reduction(1))

    def equals(self, other: Union[CyclotomicValue, int, Fraction]) -> bool:
        """Exact equality, independent of the representation."""
        if isinstance(other, CyclotomicValue):
            if other.d != self.d:
                raise DimensionMismatchError(
                    f"Cannot compare values in ℤ[ω_{self.d}] and ℤ[ω_{other.d}].")
            lhs = self._scaled_reduction(other.denominator)
            rhs = other._scaled_reduction(self.denominator)
            return lhs == rhs
        q = Fraction(other)
        rhs = [0]*self.d
        rhs[0] = q.numerator*self.denominator
        return self._scaled_reduction(q.denominator) == cyclotomic_reduce(rhs, self.d)

    def is_one(self) -> bool:
        return self.equals(1)

    def __eq__(self, other):
        if isinstance(other, (CyclotomicValue, int, Fraction)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None

    def __complex__(self):
        return sum(c*root_of_unity(PhaseExp(s % self.d, self.d))
                   for s, c in enumerate(self.coeffs)) / self.denominator

    def to_json(self) -> dict:
        return {"d": int(self.d), "coeffs": list(self.coeffs),
                "denominator": self.denominator,
                "value": complex_to_json(complex(self))}


# %% [markdown]
# ## Enumerating vanishing sums
#
# We enumerate every vector $c$ of non-negative integers with
# $\sum_s c_s = d$ and keep those with $\sum_s c_s ω^s = 0$.
# For $d$ prime the only solution is $c = (1, \dotsc, 1)$; for composite $d$
# sums over the roots of a proper divisor also vanish, e.g. $2 + 2ω^2 = 0$
# for $d = 4$.
#
# Compositions of $d$ into $d$ parts are generated "stars and bars" style
# from the $\binom{2d-1}{d-1}$ positions of $d-1$ bars among $2d-1$ slots,
# then processed in chunks as integer arrays.

# %%
def enumerate_vanishing_sums(d: int,
                             progbar: Union[Literal["auto"],None,tqdm]=None
                             ) -> list[CsVector]:
    """
    All non-negative integer vectors c with Σ c_s = d and Σ c_s ω^s = 0,
    in descending lexicographic order.

    Raises
    ------
    ResourceLimitError: If `d` exceeds ``config.guards.max_vanishing_dim``.
    """
    d = Dimension(d)
    if d > config.guards.max_vanishing_dim:
        raise ResourceLimitError(
            f"Enumerating vanishing sums for d={d} would visit "
            f"{math.comb(2*d-1, d-1)} compositions; the configured limit is "
            f"d ≤ {config.guards.max_vanishing_dim} (config.guards.max_vanishing_dim).")
    R = reduction_matrix(d)
    total = math.comb(2*d-1, d-1)
    logger.debug(f"Enumerating {total} compositions of {d}."); t1 = time.perf_counter()
    progbar, close_progbar = get_progbar(progbar, desc=f"Vanishing sums (d={d})", total=total)
    solutions = []
    try:
        for chunk in chunked(combinations(range(2*d-1), d-1), config.guards.vanishing_chunk_size):
            bars = np.array(chunk, dtype=np.int64).reshape(len(chunk), d-1)
            n = len(bars)
            padded = np.hstack([np.full((n, 1), -1), bars, np.full((n, 1), 2*d-1)])
            parts = np.diff(padded, axis=1) - 1
            vanishing = ~np.any(parts @ R, axis=1)
            solutions.extend(tuple(int(x) for x in row) for row in parts[vanishing])
            if progbar is not None: progbar.update(n)
    finally:
        if close_progbar: progbar.close()
    t2 = time.perf_counter()
    logger.debug(f"Found {len(solutions)} vanishing sums for d={d} in {t2-t1:.2f} s.")
    return [CsVector(d, c) for c in sorted(solutions, reverse=True)]


# %% [markdown]
# For $d = 4$, three vectors are found: $(2,0,2,0)$, $(1,1,1,1)$ and $(0,2,0,2)$.

# %% editable=true slideshow={"slide_type": ""} tags=["active-ipynb"]
# enumerate_vanishing_sums(4)
