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
# # Generalized Pauli bases
#
# For prime $d$, the $d^2$ operators
#
# $$M_{(a,b)} = X^a Z^b\,, \qquad
#   X = \sum_n \lvert n ⊕ 1 \rangle\langle n \rvert\,, \qquad
#   Z = \sum_n ω^n \lvert n \rangle\langle n \rvert\,, \qquad a, b \in \mathbb{Z}_d$$
#
# form a complete orthonormal basis of unitaries. Every non-identity element
# is traceless and has a *d-nary* spectrum (the $d$-th roots of unity, up to
# a global phase).
#
# Composite dimensions are handled by prime factorization: for
# $D = d_1 d_2 \dotsb$ the basis consists of all tensor products of
# single-factor bases. The $d$-nary condition then holds factor by factor.
#
# Elements are ordered lexicographically by their labels $(a_1, b_1, a_2, b_2, \dotsc)$,
# so the identity always comes first.

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from __future__ import annotations

import math
import time
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Optional, Sequence, Union

import numpy as np

from scityping.numpy import Array
from numpy.typing import ArrayLike

from .memoize import memoize
from .zd_arith import Dimension, PhaseExp, factorize, reduction_matrix, root_table
from .monomial import (MonomialOperator, identity, multiply, power, tensor,
                       trace, spectrum, is_hermitian)
from .utils import DimensionMismatchError

logger = logging.getLogger(__name__)

# %%
__all__ = ["PauliLabel", "OperatorBasis", "BasisAudit",
           "make_X", "make_Z", "make_pauli", "commutation_phase",
           "build_basis", "build_tensor_basis", "build_composite_basis", "audit"]


# %% [markdown]
# ## Labels

# %%
@dataclass(frozen=True)
class PauliLabel:
    """
    Exponents (a_i, b_i) of X^{a_i} Z^{b_i} on each factor of dimension d_i.
    (0, 0) on every factor labels the identity.
    """
    dims: tuple[Dimension, ...]
    exponents: tuple[tuple[int, int], ...]

    def __post_init__(self):
        dims = tuple(Dimension(d) for d in self.dims)
        exps = tuple((int(a), int(b)) for a, b in self.exponents)
        if len(dims) != len(exps):
            raise DimensionMismatchError(
                f"Label has {len(exps)} exponent pairs for {len(dims)} factors.")
        for (a, b), d in zip(exps, dims):
            if not (0 <= a < d and 0 <= b < d):
                raise ValueError(f"Exponents ({a}, {b}) out of range for d={d}.")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def single(cls, a: int, b: int, d: int) -> PauliLabel:
        return cls((d,), ((a, b),))

    def is_identity(self) -> bool:
        return not any(a or b for a, b in self.exponents)

    def __str__(self):
        def factor(a, b):
            if not (a or b):
                return "1"
            return ("X" + (f"^{a}" if a > 1 else "") if a else "") + \
                   ("Z" + (f"^{b}" if b > 1 else "") if b else "")
        return "⊗".join(factor(a, b) for a, b in self.exponents)

    def to_json(self) -> list[list[int]]:
        return [[a, b] for a, b in self.exponents]


# %% [markdown]
# ## Single-qudit operators

# %%
def make_X(d: int) -> MonomialOperator:
    d = Dimension(d)
    return MonomialOperator(d, tuple((n+1) % d for n in range(d)), (0,)*d)

def make_Z(d: int) -> MonomialOperator:
    d = Dimension(d)
    return MonomialOperator(d, tuple(range(d)), tuple(range(d)))

def make_pauli(label: PauliLabel) -> MonomialOperator:
    """Exact X^a Z^b, or the tensor product of such factors."""
    factors = [multiply(power(make_X(d), a), power(make_Z(d), b))
               for (a, b), d in zip(label.exponents, label.dims)]
    return tensor(*factors)


# %% [markdown]
# With the convention $M = X^a Z^b$ and $ZX = ω XZ$,
#
# $$M_1 M_2 = ω^{a_2 b_1 - a_1 b_2} M_2 M_1 \,.$$
#
# For tensor labels the factor phases $ω_{d_i}^{t_i}$ are collected into a
# single exponent of $ω_L$, with $L = \operatorname{lcm}(d_i)$.

# %%
def commutation_phase(l1: PauliLabel, l2: PauliLabel) -> PhaseExp:
    """Return t with M₁M₂ = ω^t M₂M₁; t = 0 iff the two elements commute."""
    if l1.dims != l2.dims:
        raise DimensionMismatchError(f"Labels act on different factors: {l1.dims} and {l2.dims}.")
    L = math.lcm(*l1.dims)
    t = sum(((a2*b1 - a1*b2) % d) * (L // d)
            for ((a1, b1), (a2, b2), d) in zip(l1.exponents, l2.exponents, l1.dims))
    return PhaseExp.of(t, L)


# %% [markdown]
# ## Operator bases

# %%
@dataclass(frozen=True)
class BasisAudit:
    """Outcome of the exact checks performed by `audit`."""
    dims: tuple[int, ...]
    size: int
    orthonormal: bool
    traceless: bool
    dnary_per_factor: bool
    factors_consistent: bool
    hermitian_count: int
    failures: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return (self.size == math.prod(self.dims)**2 and self.orthonormal
                and self.traceless and self.dnary_per_factor and self.factors_consistent)

    def to_json(self) -> dict:
        return {"dims": list(self.dims), "size": self.size,
                "orthonormal": self.orthonormal, "traceless": self.traceless,
                "dnary_per_factor": self.dnary_per_factor,
                "factors_consistent": self.factors_consistent,
                "hermitian_count": self.hermitian_count,
                "failures": list(self.failures), "pass": self.passed}


# %%
@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """
    The D² labeled operators of a (tensor) generalized Pauli basis, D = Π dims.
    Index 0 is the identity.

    Bases are compared by identity; `build_basis` and `build_tensor_basis`
    return the same instance for the same dimensions.
    """
    dims: tuple[Dimension, ...]
    labels: tuple[PauliLabel, ...]
    operators: tuple[MonomialOperator, ...]
    factors: tuple[tuple[MonomialOperator, ...], ...] = field(repr=False)

    @property
    def D(self) -> int:
        return math.prod(self.dims)

    @property
    def phase_order(self) -> Dimension:
        """Order of the roots of unity generated by the factor phases: lcm(dims)."""
        return Dimension(math.lcm(*self.dims))

    @property
    def elements(self) -> list[tuple[PauliLabel, MonomialOperator]]:
        return list(zip(self.labels, self.operators))

    def __len__(self):
        return len(self.operators)

    def __iter__(self):
        return iter(self.operators)

    def __getitem__(self, i: int) -> MonomialOperator:
        return self.operators[i]

    @property
    def identity_index(self) -> int:
        return 0

    @property
    def traceless_indices(self) -> range:
        return range(1, len(self))

    # Index lookups

    @cached_property
    def _label_index(self) -> dict[PauliLabel, int]:
        return {l: i for i, l in enumerate(self.labels)}

    @cached_property
    def _perm_index(self) -> dict[tuple[int, ...], list[int]]:
        index = {}
        for i, op in enumerate(self.operators):
            index.setdefault(op.perm, []).append(i)
        return index

    def index(self, label: Union[PauliLabel, tuple[int, int]]) -> int:
        """Position of a label; a bare (a, b) pair is accepted for single-factor bases."""
        if not isinstance(label, PauliLabel):
            if len(self.dims) != 1:
                raise TypeError("Bare (a, b) labels are only accepted for single-factor bases.")
            label = PauliLabel((self.dims[0],), (tuple(label),))
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"Label {label} is not part of the basis with dims {self.dims}.") from None

    def locate(self, op: MonomialOperator) -> Optional[tuple[int, PhaseExp]]:
        """
        Return (j, t) such that `op` = ω_D^t M_j exactly, or None if `op` is
        not proportional to a basis element by a root of unity.
        """
        if op.d != self.D:
            raise DimensionMismatchError(f"Operator acts on d={op.d}; basis on D={self.D}.")
        for j in self._perm_index.get(op.perm, []):
            diff = {(p - q) % self.D for p, q in zip(op.phase, self.operators[j].phase)}
            if len(diff) == 1:
                return j, PhaseExp(diff.pop(), self.D)
        return None

    # Vectorized views

    @cached_property
    def perm_array(self) -> Array[np.int64,2]:
        """(D², D) array; row j is the permutation of M_j."""
        a = np.array([op.perm for op in self.operators], dtype=np.int64)
        a.flags.writeable = False
        return a

    @cached_property
    def phase_array(self) -> Array[np.int64,2]:
        """(D², D) array; row j holds the phase exponents of M_j (exponents of ω_D)."""
        a = np.array([op.phase for op in self.operators], dtype=np.int64)
        a.flags.writeable = False
        return a

    @cached_property
    def root_array(self) -> Array[complex,2]:
        """(D², D) array; row j holds the nonzero entries of M_j, column by column."""
        a = root_table(self.D)[self.phase_array]
        a.flags.writeable = False
        return a

    def dense(self, i: int) -> Array[complex,2]:
        return self.operators[i].dense()

    def coefficients(self, A: ArrayLike) -> Array[complex,1]:
        """
        ⟨A, M_j⟩ = (1/D) Tr[A M_j†] for every j, read off from the entries
        A[π_j(n), n] without forming the dense basis.
        """
        A = np.asarray(A, dtype=complex)
        if A.shape != (self.D, self.D):
            raise DimensionMismatchError(f"Expected a {self.D}×{self.D} matrix; received {A.shape}.")
        gathered = A[self.perm_array, np.arange(self.D)]
        return (gathered * self.root_array.conj()).sum(axis=1) / self.D

    def reconstruct(self, coeffs: ArrayLike) -> Array[complex,2]:
        """Σ_j coeffs[j] M_j"""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (len(self),):
            raise DimensionMismatchError(f"Expected {len(self)} coefficients; received {coeffs.shape}.")
        A = np.zeros((self.D, self.D), dtype=complex)
        cols = np.broadcast_to(np.arange(self.D), self.perm_array.shape)
        np.add.at(A, (self.perm_array, cols), coeffs[:, None]*self.root_array)
        return A

    def audit(self) -> BasisAudit:
        return audit(self)

    # Serialization

    def to_json(self) -> dict:
        return {"dims": [int(d) for d in self.dims],
                "elements": [{"label": l.to_json(), "perm": list(op.perm), "phase": list(op.phase)}
                             for l, op in self.elements]}

    @classmethod
    def from_json(cls, data: dict) -> OperatorBasis:
        """
        Rebuild a basis from its JSON form. Operators are taken as written in
        the file; use `audit` to check them.
        """
        try:
            dims = tuple(Dimension(d) for d in data["dims"])
            D = math.prod(dims)
            labels, operators, factors = [], [], []
            for el in data["elements"]:
                label = PauliLabel(dims, tuple(tuple(ab) for ab in el["label"]))
                labels.append(label)
                operators.append(MonomialOperator(D, el["perm"], el["phase"]))
                factors.append(_factor_operators(label))
        except (KeyError, TypeError) as e:
            raise ValueError(f"Malformed basis description: {e!r}") from e
        return cls(dims, tuple(labels), tuple(operators), tuple(factors))


# %%
def _factor_operators(label: PauliLabel) -> tuple[MonomialOperator, ...]:
    return tuple(make_pauli(PauliLabel((d,), (ab,)))
                 for ab, d in zip(label.exponents, label.dims))


# %% [markdown]
# ## Construction

# %%
def build_basis(d: int) -> OperatorBasis:
    """
    The d² generalized Paulis X^a Z^b for prime d.
    For composite dimensions use `build_composite_basis`.
    """
    d = Dimension(d)
    if not d.is_prime:
        raise ValueError(f"build_basis requires a prime dimension; {d} is not prime. "
                         "Use `build_composite_basis` to construct a basis from "
                         "the prime factors of a composite dimension.")
    return _build_tensor_basis((int(d),))

def build_tensor_basis(dims: Sequence[int]) -> OperatorBasis:
    """All D² tensor products of single-factor generalized Paulis."""
    dims = tuple(Dimension(d) for d in dims)
    if not dims:
        raise ValueError("At least one factor dimension is required.")
    non_prime = [d for d in dims if not d.is_prime]
    if non_prime:
        raise ValueError(f"Every factor dimension must be prime; received {list(map(int, dims))}. "
                         "Use `build_composite_basis` to factorize composite dimensions.")
    return _build_tensor_basis(tuple(int(d) for d in dims))

def build_composite_basis(D: int) -> OperatorBasis:
    """Factorize D into primes (ascending, with multiplicity) and build the tensor basis."""
    return build_tensor_basis(factorize(D))

@memoize
def _build_tensor_basis(dims: tuple[int, ...]) -> OperatorBasis:
    logger.debug(f"Building operator basis for dims {dims}."); t1 = time.perf_counter()
    dims = tuple(Dimension(d) for d in dims)
    single = [[(PauliLabel.single(a, b, d).exponents[0],
                make_pauli(PauliLabel.single(a, b, d)))
               for a in range(d) for b in range(d)]
              for d in dims]
    labels, operators, factors = [], [], []
    for combo in product(*single):
        labels.append(PauliLabel(dims, tuple(ab for ab, _ in combo)))
        fops = tuple(op for _, op in combo)
        factors.append(fops)
        operators.append(tensor(*fops))
    B = OperatorBasis(dims, tuple(labels), tuple(operators), tuple(factors))
    t2 = time.perf_counter()
    logger.debug(f"Built {len(B)} basis elements in {t2-t1:.3f} s.")
    return B


# %% [markdown]
# ## Audit
#
# All checks are exact. Orthonormality is verified for all pairs at once,
# row by row: for fixed $i$, the phase differences $p_i(n) - p_j(n)$ over the
# indices where $π_i(n) = π_j(n)$ are histogrammed into coefficient vectors,
# which are then reduced in $\mathbb{Z}[ω_D]$.

# %%
def audit(B: OperatorBasis) -> BasisAudit:
    t1 = time.perf_counter()
    D, n = B.D, len(B)
    failures = []

    R = reduction_matrix(D)
    one = np.zeros(D, dtype=np.int64); one[0] = D
    one_reduced = one @ R
    rows = np.arange(n)[:, None]
    orthonormal = True
    for i in range(n):
        same = B.perm_array == B.perm_array[i]
        diff = (B.phase_array[i] - B.phase_array) % D
        flat = (diff + D*rows)[same]
        counts = np.bincount(flat, minlength=n*D).reshape(n, D)
        reduced = counts @ R
        expected = np.zeros_like(reduced); expected[i] = one_reduced
        bad = np.flatnonzero(np.any(reduced != expected, axis=1))
        if len(bad):
            orthonormal = False
            failures.extend(f"⟨M_{i}, M_{j}⟩ ≠ δ" for j in bad[:5])

    traceless = True
    for i in B.traceless_indices:
        if not trace(B[i]).is_zero():
            traceless = False
            failures.append(f"Tr[M_{i}] ≠ 0 ({B.labels[i]})")

    dnary_cache = {}
    dnary = True
    for i, fops in enumerate(B.factors):
        for f in fops:
            if f.is_identity():
                continue
            if f not in dnary_cache:
                dnary_cache[f] = spectrum(f).is_dnary
            if not dnary_cache[f]:
                dnary = False
                failures.append(f"Factor of M_{i} ({B.labels[i]}) has no d-nary spectrum")
        if B.labels[i].is_identity() != B[i].is_identity():
            dnary = False
            failures.append(f"Identity label mismatch at index {i}")

    consistent = all(tensor(*fops) == op for fops, op in zip(B.factors, B.operators))
    if not consistent:
        failures.append("Some operators differ from the tensor product of their factors")
    labels_unique = len(set(B.labels)) == n
    if not labels_unique:
        consistent = False
        failures.append("Labels are not unique")

    hermitian_count = sum(is_hermitian(op) for op in B.operators)
    t2 = time.perf_counter()
    logger.debug(f"Audited basis with dims {tuple(map(int, B.dims))} in {t2-t1:.3f} s.")
    return BasisAudit(tuple(int(d) for d in B.dims), n, orthonormal, traceless,
                      dnary, consistent, hermitian_count, tuple(failures))


# %% [markdown]
# For $d > 2$ only the identity is both unitary and Hermitian:

# %% editable=true slideshow={"slide_type": ""} tags=["active-ipynb"]
# build_basis(3).audit().hermitian_count, build_basis(2).audit().hermitian_count
