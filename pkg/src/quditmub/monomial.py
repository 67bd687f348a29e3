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
# # Monomial operators
#
# Every element of an optimal operator basis is a *monomial* (generalized
# permutation) operator
#
# $$M = \sum_{n=0}^{d-1} ω^{p(n)}\, \lvert π(n) \rangle\langle n \rvert \,,$$
#
# with $π$ a permutation of $\{0, \dotsc, d-1\}$ and integer phase exponents
# $p(n) \in \mathbb{Z}_d$. Storing $(π, p)$ instead of a dense matrix makes
# products, adjoints, traces and spectra exact.
#
# :::{admonition} Conventions
# - The Hilbert–Schmidt inner product is normalized:
#   $\langle A, B \rangle = \frac{1}{d}\operatorname{Tr}[A B^\dagger]$,
#   so that a basis of unitaries is orthonormal.
# - Spectra are compared *up to a global phase*: a spectrum is *d-nary* when
#   it equals $e^{2πiφ_0}\{ω^0, \dotsc, ω^{d-1}\}$ for some
#   $0 \leq φ_0 < 1/d$. Eigenvalues are reported with $φ_0$ removed and
#   $φ_0$ is recorded separately. For odd prime $d$ every generalized Pauli
#   operator has $φ_0 = 0$; for qubits $XZ$ has spectrum $\{±i\}$ and
#   $φ_0 = 1/4$.
# - Eigenvectors are fixed by the gauge "first nonzero component is real
#   positive".
# :::

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from __future__ import annotations

import math
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import NamedTuple, Optional, Union

import numpy as np

from scityping.numpy import Array
from numpy.typing import ArrayLike

from .config import config
from .zd_arith import Dimension, PhaseExp, CyclotomicValue, root_of_unity, root_table
from .utils import (DimensionMismatchError, NotDnaryError, NotMonomialError,
                    NotDnaryPhaseError, matrix_to_json,
                    fraction_to_json)

logger = logging.getLogger(__name__)

# %%
__all__ = ["MonomialOperator", "DenseOperator", "DenseConversion",
           "SpectrumReport", "OrderedEigenbasis", "MonomialCycle",
           "identity", "multiply", "adjoint", "power", "trace", "hs_inner",
           "cycles", "spectrum", "eigenbasis", "to_dense", "from_dense",
           "tensor", "is_hermitian", "conjugated_spectrum"]


# %% [markdown]
# ## Types

# %%
@dataclass(frozen=True)
class MonomialOperator:
    """
    M = Σ_n ω^{phase[n]} |perm[n]⟩⟨n|, with ω = exp(2πi/d).

    Instances are immutable and hashable; two operators compare equal iff
    their permutations and phase exponents are identical.
    """
    d: Dimension
    perm: tuple[int, ...]
    phase: tuple[int, ...]

    def __post_init__(self):
        d = Dimension(self.d)
        perm = tuple(int(p) for p in self.perm)
        phase = tuple(int(p) for p in self.phase)
        if len(perm) != d or len(phase) != d:
            raise DimensionMismatchError(
                f"A monomial operator on d={d} needs {d} permutation and phase "
                f"entries; received {len(perm)} and {len(phase)}.")
        if sorted(perm) != list(range(d)):
            raise ValueError(f"`perm` is not a permutation of 0…{d-1}: {perm}.")
        if any(not 0 <= p < d for p in phase):
            raise ValueError(f"Phase exponents must lie in [0, {d-1}]: {phase}.")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "phase", phase)

    @property
    def phase_exps(self) -> tuple[PhaseExp, ...]:
        return tuple(PhaseExp(k, self.d) for k in self.phase)

    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.d)) and not any(self.phase)

    def __matmul__(self, other: MonomialOperator) -> MonomialOperator:
        if not isinstance(other, MonomialOperator):
            return NotImplemented
        return multiply(self, other)

    @property
    def dag(self) -> MonomialOperator:
        return adjoint(self)

    def dense(self) -> Array[complex,2]:
        return to_dense(self).matrix

    def to_json(self) -> dict:
        return {"d": int(self.d), "perm": list(self.perm), "phase": list(self.phase)}

    @classmethod
    def from_json(cls, data: dict) -> MonomialOperator:
        return cls(data["d"], data["perm"], data["phase"])


# %%
@dataclass(frozen=True, eq=False)
class DenseOperator:
    """A d×d complex matrix; used for gates and for anything not monomial."""
    d: Dimension
    matrix: Array[complex,2]

    def __post_init__(self):
        d = Dimension(self.d)
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (d, d):
            raise DimensionMismatchError(f"Expected a {d}×{d} matrix; received shape {m.shape}.")
        if not np.all(np.isfinite(m)):
            raise ValueError("DenseOperator entries must be finite.")
        m.flags.writeable = False
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "matrix", m)

    def unitarity_deviation(self) -> float:
        """‖M M† − 1‖_max"""
        return float(np.abs(self.matrix @ self.matrix.conj().T - np.eye(self.d)).max())

    def is_unitary(self, tol: Optional[float]=None) -> bool:
        if tol is None:
            tol = config.tolerances.structural
        return self.unitarity_deviation() < tol

    def to_json(self) -> dict:
        return {"d": int(self.d), "matrix": matrix_to_json(self.matrix)}


# %%
class DenseConversion(NamedTuple):
    operator: MonomialOperator
    global_phase: complex    # ω^k shared by every nonzero entry; 1 if the entries differ


class MonomialCycle(NamedTuple):
    indices: tuple[int, ...]  # n_0 → π(n_0) → …, starting at the smallest index
    phase_exponent: int       # Accumulated phase exponent around the cycle (mod d)


# %%
@dataclass(frozen=True)
class SpectrumReport:
    """
    Exact spectrum, as fractions of a full turn: eigenvalue e^{2πi t}.

    `is_dnary` is true when the spectrum equals e^{2πi global_turn} × the
    d-th roots of unity, each once. In that case `eigenvalues` lists the
    normalized roots ω^0, …, ω^{d-1} as `PhaseExp`; otherwise it lists the
    complex eigenvalues.
    """
    d: Dimension
    turns: tuple[Fraction, ...]
    is_dnary: bool
    global_turn: Optional[Fraction]

    @property
    def multiplicities(self) -> dict[Fraction, int]:
        return dict(sorted(Counter(self.turns).items()))

    @property
    def eigenvalues(self) -> list[Union[PhaseExp, complex]]:
        if self.is_dnary:
            return [PhaseExp(k, self.d) for k in range(self.d)]
        return [complex(np.exp(2j*np.pi*float(t))) for t in self.turns]

    def to_json(self) -> dict:
        return {"d": int(self.d),
                "turns": [fraction_to_json(t) for t in self.turns],
                "is_dnary": self.is_dnary,
                "global_turn": None if self.global_turn is None else fraction_to_json(self.global_turn)}


# %%
@dataclass(frozen=True, eq=False)
class OrderedEigenbasis:
    """
    Columns `vectors[:, k]` are eigenvectors with eigenvalue
    e^{2πi global_turn} ω^k.
    """
    d: Dimension
    vectors: Array[complex,2]
    global_turn: Fraction = Fraction(0)

    @property
    def eigenvalues(self) -> Array[complex,1]:
        return np.exp(2j*np.pi*(float(self.global_turn) + np.arange(self.d)/self.d))

    def __getitem__(self, k: int) -> Array[complex,1]:
        return self.vectors[:, k]

    def __len__(self):
        return self.d

    def gram_deviation(self) -> float:
        V = self.vectors
        return float(np.abs(V.conj().T @ V - np.eye(self.d)).max())

    def residual(self, A: Union[MonomialOperator, ArrayLike]) -> float:
        """max_k ‖A v_k − λ_k v_k‖"""
        M = A.dense() if isinstance(A, MonomialOperator) else np.asarray(A)
        R = M @ self.vectors - self.vectors * self.eigenvalues
        return float(np.linalg.norm(R, axis=0).max())

    def to_json(self) -> dict:
        return {"vectors": matrix_to_json(self.vectors),
                "global_turn": fraction_to_json(self.global_turn)}


# %% [markdown]
# ## Algebra
#
# With $A = \sum_n ω^{p_A(n)} \lvert π_A(n)\rangle\langle n\rvert$ and
# similarly for $B$,
#
# $$AB = \sum_n ω^{p_B(n) + p_A(π_B(n))}\, \lvert π_A(π_B(n))\rangle\langle n\rvert \,.$$

# %%
def _check_same_d(A: MonomialOperator, B: MonomialOperator):
    if A.d != B.d:
        raise DimensionMismatchError(f"Operators act on different dimensions ({A.d} and {B.d}).")

def identity(d: int) -> MonomialOperator:
    d = Dimension(d)
    return MonomialOperator(d, tuple(range(d)), (0,)*d)

def multiply(A: MonomialOperator, B: MonomialOperator) -> MonomialOperator:
    _check_same_d(A, B)
    d = A.d
    perm = tuple(A.perm[B.perm[n]] for n in range(d))
    phase = tuple((B.phase[n] + A.phase[B.perm[n]]) % d for n in range(d))
    return MonomialOperator(d, perm, phase)

def adjoint(A: MonomialOperator) -> MonomialOperator:
    d = A.d
    inv = [0]*d
    for n, m in enumerate(A.perm):
        inv[m] = n
    return MonomialOperator(d, tuple(inv), tuple((-A.phase[inv[m]]) % d for m in range(d)))

def power(A: MonomialOperator, n: int) -> MonomialOperator:
    """A^n by repeated squaring; negative `n` uses the adjoint."""
    if n < 0:
        A, n = adjoint(A), -n
    result, base = identity(A.d), A
    while n:
        if n & 1:
            result = multiply(result, base)
        base = multiply(base, base)
        n >>= 1
    return result

def trace(A: MonomialOperator) -> CyclotomicValue:
    """Exact Tr[A] = Σ_{n: π(n)=n} ω^{p(n)}."""
    counts = [0]*A.d
    for n, (m, p) in enumerate(zip(A.perm, A.phase)):
        if m == n:
            counts[p] += 1
    return CyclotomicValue(A.d, counts)

def hs_inner(A: MonomialOperator, B: MonomialOperator) -> CyclotomicValue:
    """
    Exact normalized inner product (1/d) Tr[A B†].

    Since A B† = Σ_n ω^{p_A(n) − p_B(n)} |π_A(n)⟩⟨π_B(n)|, only the indices
    where both permutations agree contribute.
    """
    _check_same_d(A, B)
    d = A.d
    counts = [0]*d
    for n in range(d):
        if A.perm[n] == B.perm[n]:
            counts[(A.phase[n] - B.phase[n]) % d] += 1
    return CyclotomicValue(d, counts, denominator=d)

def is_hermitian(A: MonomialOperator) -> bool:
    return A == adjoint(A)


# %% [markdown]
# ## Cycles and spectra
#
# Following one cycle $n_0 \to π(n_0) \to \dotsb$ of length $L$, the
# operator $M^L$ restricted to the cycle is $ω^P$ times the identity, where
# $P$ is the sum of the phase exponents along the cycle. The eigenvalues
# attached to the cycle are therefore the $L$ solutions of $λ^L = ω^P$:
#
# $$λ_j = \exp\left(2πi \frac{P + j d}{d L}\right), \quad j = 0, \dotsc, L-1 \,.$$
#
# The eigenvector for $λ$ has components
# $α_t = λ^{-t} ω^{P_t}$ on $n_t$, with $P_t$ the phase accumulated over the
# first $t$ steps.

# %%
def cycles(A: MonomialOperator) -> list[MonomialCycle]:
    """Cycle decomposition of the permutation, ordered by smallest element."""
    seen = [False]*A.d
    result = []
    for start in range(A.d):
        if seen[start]:
            continue
        indices, P, n = [], 0, start
        while not seen[n]:
            seen[n] = True
            indices.append(n)
            P += A.phase[n]
            n = A.perm[n]
        result.append(MonomialCycle(tuple(indices), P % A.d))
    return result

def _cycle_turns(L: int, P: int, d: int) -> list[Fraction]:
    return [Fraction(P + j*d, d*L) % 1 for j in range(L)]

def spectrum(A: MonomialOperator) -> SpectrumReport:
    """Exact spectrum from the cycle structure."""
    d = A.d
    turns = sorted(t for c in cycles(A) for t in _cycle_turns(len(c.indices), c.phase_exponent, d))
    residues = {t - Fraction(math.floor(t*d), d) for t in turns}
    is_dnary, φ0 = False, None
    if len(residues) == 1:
        φ0 = residues.pop()
        ks = sorted((t - φ0)*d for t in turns)
        is_dnary = ks == list(range(d))
    return SpectrumReport(d, tuple(turns), is_dnary, φ0 if is_dnary else None)

def eigenbasis(A: MonomialOperator) -> OrderedEigenbasis:
    """
    Analytic eigenbasis of an operator with d-nary spectrum.
    Column k has eigenvalue e^{2πi φ₀} ω^k; each eigenvector is supported on
    a single cycle and its component on the smallest index of that cycle is
    real positive.

    Raises
    ------
    NotDnaryError: If the spectrum is degenerate or not made of d-th roots.
    """
    spec = spectrum(A)
    if not spec.is_dnary:
        raise NotDnaryError(f"Operator has no d-nary spectrum (turns: {spec.turns}); "
                            "its eigenbasis is not uniquely ordered.")
    d, φ0 = A.d, spec.global_turn
    V = np.zeros((d, d), dtype=complex)
    for c in cycles(A):
        L = len(c.indices)
        acc = np.cumsum([0] + [A.phase[n] for n in c.indices[:-1]])
        for λturn in _cycle_turns(L, c.phase_exponent, d):
            k = int((λturn - φ0)*d)
            turns = [Fraction(int(acc[t]), d) - t*λturn for t in range(L)]
            V[list(c.indices), k] = [np.exp(2j*np.pi*float(τ % 1)) for τ in turns]
            V[:, k] /= math.sqrt(L)
    basis = OrderedEigenbasis(d, V, φ0)
    res = basis.residual(A)
    if res > config.tolerances.residual:
        raise RuntimeError(f"Analytic eigenbasis has residual {res:.3g}; this is a bug.")
    return basis


# %% [markdown]
# Eigenvalues of $V A V^\dagger$ for a dense unitary $V$; conjugation leaves
# the spectrum unchanged.

# %%
def conjugated_spectrum(V: ArrayLike, A: MonomialOperator) -> Array[complex,1]:
    V = np.asarray(V, dtype=complex)
    eigs = np.linalg.eigvals(V @ A.dense() @ V.conj().T)
    return eigs[np.argsort(np.mod(np.angle(eigs), 2*np.pi))]


# %% [markdown]
# ## Dense conversion

# %%
def to_dense(A: MonomialOperator) -> DenseOperator:
    """Column n holds ω^{p(n)} in row π(n)."""
    M = np.zeros((A.d, A.d), dtype=complex)
    M[list(A.perm), np.arange(A.d)] = root_table(A.d)[list(A.phase)]
    return DenseOperator(A.d, M)

def from_dense(D: Union[DenseOperator, ArrayLike], tol: Optional[float]=None
               ) -> DenseConversion:
    """
    Recognize a monomial matrix whose nonzero entries are d-th roots of unity.
    The phases are stored on the operator, so `to_dense` gives the input back.
    When every entry carries the same root ω^k (e.g. ω·1), that root is also
    returned as `global_phase`. A common phase that is not a d-th root is
    rejected like any other off-root entry.

    Raises
    ------
    NotMonomialError: If some row or column does not hold exactly one entry
       of modulus > tol, or an entry is not unimodular.
    NotDnaryPhaseError: If an entry is farther than tol from every ω^k.
    """
    if tol is None:
        tol = config.tolerances.structural
    m = D.matrix if isinstance(D, DenseOperator) else np.asarray(D, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotMonomialError(f"Expected a square matrix; received shape {m.shape}.")
    d = Dimension(m.shape[0])
    nonzero = np.abs(m) > tol
    bad_cols = np.flatnonzero(nonzero.sum(axis=0) != 1)
    bad_rows = np.flatnonzero(nonzero.sum(axis=1) != 1)
    if len(bad_cols) or len(bad_rows):
        raise NotMonomialError(
            "Matrix is not monomial: rows {} and columns {} do not have exactly "
            "one nonzero entry.".format(bad_rows.tolist(), bad_cols.tolist()))
    perm = np.argmax(nonzero, axis=0)
    vals = m[perm, np.arange(d)]
    if np.abs(np.abs(vals) - 1).max() > tol:
        raise NotMonomialError("Nonzero entries of a monomial basis operator must be unimodular.")
    ks = np.round(np.angle(vals)*d/(2*np.pi)).astype(int) % d
    dev = np.abs(vals - root_table(d)[ks])
    if dev.max() > tol:
        n = int(np.argmax(dev))
        raise NotDnaryPhaseError(
            f"Entry in column {n} has phase {np.angle(vals[n]):.6g} rad, which is "
            f"{dev[n]:.3g} away from the nearest {d}-th root of unity.")
    g = root_of_unity(PhaseExp(int(ks[0]), d)) if (ks == ks[0]).all() else 1+0j
    return DenseConversion(MonomialOperator(d, tuple(perm.tolist()), tuple(ks.tolist())),
                           complex(g))


# %% [markdown]
# ## Tensor products
#
# The Kronecker product of monomials is monomial. On $D = d_A d_B$ with
# index $n = n_A d_B + n_B$ (the `numpy.kron` ordering), phases of the
# factors are rewritten as exponents of $ω_D$:
# $ω_{d_A}^{k} = ω_D^{k D / d_A}$.

# %%
def _tensor2(A: MonomialOperator, B: MonomialOperator) -> MonomialOperator:
    D = A.d * B.d
    pA, pB = np.array(A.perm), np.array(B.perm)
    phA, phB = np.array(A.phase), np.array(B.phase)
    perm = (pA[:, None]*B.d + pB[None, :]).ravel()
    phase = ((phA[:, None]*(D//A.d) + phB[None, :]*(D//B.d)) % D).ravel()
    return MonomialOperator(D, tuple(perm.tolist()), tuple(phase.tolist()))

def tensor(*ops: MonomialOperator) -> MonomialOperator:
    """Exact A ⊗ B ⊗ …"""
    if not ops:
        raise TypeError("`tensor` requires at least one operator.")
    return reduce(_tensor2, ops)


# %% [markdown]
# ### Example

# %% editable=true slideshow={"slide_type": ""} tags=["active-ipynb"]
# X = MonomialOperator(3, (1, 2, 0), (0, 0, 0))
# spectrum(X).eigenvalues, eigenbasis(X).vectors.round(3)
