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
# # Abelian families and mutually unbiased bases
#
# Fix a traceless basis element $M_a$ with $d$-nary spectrum and write its
# eigendecomposition ordered by phase,
# $M_a = e^{2πiφ_0} \sum_k ω^k \lvert ψ^a_k \rangle\langle ψ^a_k \rvert$.
# Its powers $(M_a)^b$, $b = 1, \dotsc, d-1$, share these eigenvectors and
# relabel the eigenvalues as $k \mapsto kb$; they are pairwise orthonormal and
# commute. Together with the identity they form an *Abelian family*.
#
# For prime $d$ the $d^2 - 1$ traceless generalized Paulis split into exactly
# $d + 1$ such families, generated by
#
# $$Z, \quad X, \quad XZ, \quad XZ^2, \quad \dotsc, \quad XZ^{d-1} \,,$$
#
# and the $d+1$ common eigenbases are mutually unbiased:
# $\lvert\langle ψ^a_n | ψ^b_{n'} \rangle\rvert^2 = 1/d$ for $a \neq b$.
# Projectors onto the eigenvectors can be written in terms of the family alone:
#
# $$P^a_n = \lvert ψ^a_n \rangle\langle ψ^a_n \rvert
#         = \frac{1}{d} \sum_{u=0}^{d-1} λ_n^{-u} (M_a)^u \,.$$

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from __future__ import annotations

import math
import time
import logging
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import permutations
from typing import Literal, Optional, Sequence, Union

import numpy as np
from tqdm.auto import tqdm

from scityping.numpy import Array
from numpy.typing import ArrayLike

from .config import config
from .memoize import memoize
from .zd_arith import Dimension, PhaseExp, CsVector, vanishing_sum_check
from .monomial import (MonomialOperator, DenseOperator, OrderedEigenbasis,
                       identity, multiply, hs_inner, spectrum, eigenbasis)
from .pauli_basis import PauliLabel, OperatorBasis, build_basis
from .utils import (NotDnaryError, DimensionMismatchError, ResourceLimitError,
                    parallel_map, get_progbar)

logger = logging.getLogger(__name__)

# %%
__all__ = ["AbelianFamily", "MubCollection", "MubReport", "ProductFamily",
           "BasisChangeMatrix", "KnightViolation", "ShiftOperator",
           "DiagonalReport", "KnightCensus",
           "family_powers", "partition_basis", "partition_tensor_basis",
           "mub_collection", "product_family", "verify_mub",
           "projector_from_family", "power_from_relabeling",
           "knight_move_unitary", "shift_compose", "verify_diagonal_property",
           "knight_census", "count_knight_unitaries"]


# %% [markdown]
# ## Abelian families

# %%
@dataclass(frozen=True, eq=False)
class AbelianFamily:
    """
    The powers g^b, b = 1…d-1, of a generator g with d-nary spectrum, and
    their common ordered eigenbasis.

    When built against an `OperatorBasis`, `labels[b-1]` is the basis element
    with g^b = ω^{phases[b-1]} M_{labels[b-1]}.
    """
    generator_op: MonomialOperator
    members: tuple[MonomialOperator, ...]
    eigenbasis: OrderedEigenbasis
    generator: Optional[PauliLabel] = None
    labels: tuple[Optional[PauliLabel], ...] = ()
    phases: tuple[Optional[PhaseExp], ...] = ()

    @property
    def d(self) -> Dimension:
        return self.generator_op.d

    @property
    def eigenvectors(self) -> Array[complex,2]:
        return self.eigenbasis.vectors

    def __len__(self):
        return len(self.members)

    def to_json(self) -> dict:
        return {"generator": None if self.generator is None else self.generator.to_json(),
                "members": [None if l is None else l.to_json() for l in self.labels],
                "member_phases": [None if p is None else p.k for p in self.phases],
                "eigenbasis": self.eigenbasis.to_json()}


# %%
def family_powers(g: MonomialOperator, basis: Optional[OperatorBasis]=None,
                  label: Optional[PauliLabel]=None) -> AbelianFamily:
    """
    Build the Abelian family generated by `g` and check its defining
    properties exactly: members pairwise orthonormal, orthogonal to the
    identity, mutually commuting, and g^d proportional to the identity
    (equal to it when the spectrum carries no global phase).

    Raises
    ------
    ValueError: If the dimension is not prime.
    NotDnaryError: If `g` does not have a d-nary spectrum.
    """
    d = g.d
    if not d.is_prime:
        raise ValueError(f"Abelian families are constructed for prime dimensions only; d={d}.")
    spec = spectrum(g)
    if not spec.is_dnary:
        raise NotDnaryError(f"Generator has no d-nary spectrum (turns: {spec.turns}).")

    members = [g]
    for _ in range(d-2):
        members.append(multiply(members[-1], g))
    gd = multiply(members[-1], g)
    # g^d = e^{2πi d φ₀} 1
    if (gd.perm != tuple(range(d)) or len(set(gd.phase)) != 1
          or Fraction(gd.phase[0], d) != (d*spec.global_turn) % 1):
        raise RuntimeError(f"g^{d} is not proportional to the identity as its spectrum requires.")

    one = identity(d)
    for i, A in enumerate(members):
        if not hs_inner(A, one).is_zero():
            raise RuntimeError(f"Family member {i+1} is not orthogonal to the identity.")
        if not hs_inner(A, A).is_one():
            raise RuntimeError(f"Family member {i+1} is not normalized.")
        for B in members[i+1:]:
            if not hs_inner(A, B).is_zero():
                raise RuntimeError("Family members are not pairwise orthogonal.")
            if multiply(A, B) != multiply(B, A):
                raise RuntimeError("Family members do not commute.")

    labels, phases = (), ()
    if basis is not None:
        located = [basis.locate(A) for A in members]
        if any(loc is None for loc in located):
            raise ValueError("Some powers of the generator are not elements of the given basis.")
        labels = tuple(basis.labels[j] for j, _ in located)
        phases = tuple(t for _, t in located)
    return AbelianFamily(g, tuple(members), eigenbasis(g), label, labels, phases)


# %% [markdown]
# ## Partition into mutually unbiased families

# %%
@dataclass(frozen=True, eq=False)
class MubCollection:
    d: Dimension
    families: tuple[AbelianFamily, ...]
    basis: Optional[OperatorBasis] = None

    def __len__(self):
        return len(self.families)

    def __iter__(self):
        return iter(self.families)

    def __getitem__(self, a: int) -> AbelianFamily:
        return self.families[a]

    def to_json(self) -> dict:
        return {"d": int(self.d), "families": [f.to_json() for f in self.families]}


# %%
def _generator_labels(d: int) -> list[PauliLabel]:
    return [PauliLabel.single(0, 1, d)] + [PauliLabel.single(1, m, d) for m in range(d)]

def partition_basis(B: OperatorBasis,
                    progbar: Union[Literal["auto"],None,tqdm]=None) -> MubCollection:
    """
    Split the traceless elements of a single-factor prime basis into the d+1
    Abelian families generated by Z and XZ^m, m = 0…d-1.

    Raises
    ------
    ValueError: If `B` has more than one factor (see `partition_tensor_basis`).
    RuntimeError: If the families fail to cover the traceless elements
       exactly once.
    """
    if len(B.dims) != 1:
        raise ValueError(f"partition_basis expects a single prime factor; received dims "
                         f"{list(map(int, B.dims))}. Use `partition_tensor_basis`.")
    d = B.dims[0]
    if not d.is_prime:
        raise ValueError(f"Dimension {d} is not prime.")
    t1 = time.perf_counter()
    gens = _generator_labels(d)
    families = parallel_map(lambda l: family_powers(B[B.index(l)], basis=B, label=l),
                            gens, progbar=progbar, desc=f"Families (d={d})")
    covered = [l for f in families for l in f.labels]
    traceless = {B.labels[i] for i in B.traceless_indices}
    if len(covered) != len(set(covered)) or set(covered) != traceless:
        raise RuntimeError(f"Families do not form a disjoint cover of the {d**2-1} "
                           "traceless basis elements.")
    logger.debug(f"Partitioned basis (d={d}) into {len(families)} families "
                 f"in {time.perf_counter()-t1:.3f} s.")
    return MubCollection(d, tuple(families), B)

@memoize
def mub_collection(d: int) -> MubCollection:
    """Memoized `partition_basis(build_basis(d))`."""
    return partition_basis(build_basis(d))

def partition_tensor_basis(B: OperatorBasis) -> list[MubCollection]:
    """One collection per prime factor of a tensor basis."""
    return [mub_collection(int(d)) for d in B.dims]


# %% [markdown]
# On tensor bases, eigenstates of tensor products of family generators are
# product states.

# %%
@dataclass(frozen=True, eq=False)
class ProductFamily:
    families: tuple[AbelianFamily, ...]

    @property
    def dims(self) -> tuple[Dimension, ...]:
        return tuple(f.d for f in self.families)

    @property
    def eigenvectors(self) -> Array[complex,2]:
        """Kronecker product of the factor eigenbases (column index in `numpy.kron` order)."""
        return reduce(np.kron, (f.eigenvectors for f in self.families))

def product_family(families: Sequence[AbelianFamily]) -> ProductFamily:
    if not families:
        raise ValueError("At least one family is required.")
    return ProductFamily(tuple(families))


# %% [markdown]
# ## Verification of mutual unbiasedness

# %%
@dataclass(frozen=True)
class MubReport:
    max_cross_dev: float
    max_gram_dev: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_cross_dev < self.tol and self.max_gram_dev < self.tol

    def to_json(self) -> dict:
        return {"max_cross_dev": self.max_cross_dev, "max_gram_dev": self.max_gram_dev,
                "pass": self.passed}

def verify_mub(c: MubCollection, tol: Optional[float]=None) -> MubReport:
    """
    Largest deviation of |⟨ψ^a_n|ψ^b_n'⟩|² from 1/d over distinct families,
    and of each family's Gram matrix from the identity.
    """
    if tol is None:
        tol = config.tolerances.mub
    d = c.d
    Vs = [f.eigenvectors for f in c.families]
    gram_devs = parallel_map(lambda V: float(np.abs(V.conj().T @ V - np.eye(d)).max()), Vs)
    pairs = [(a, b) for a in range(len(Vs)) for b in range(a+1, len(Vs))]
    cross_devs = parallel_map(
        lambda ab: float(np.abs(np.abs(Vs[ab[0]].conj().T @ Vs[ab[1]])**2 - 1/d).max()),
        pairs)
    return MubReport(max(cross_devs, default=0.), max(gram_devs, default=0.), tol)


# %% [markdown]
# ## Projectors

# %%
def projector_from_family(f: AbelianFamily, n: int) -> DenseOperator:
    """
    |ψ_n⟩⟨ψ_n|, computed both as an outer product and as the power sum
    (1/d) Σ_u λ_n^{-u} g^u; the two forms must agree.
    """
    d = f.d
    if not 0 <= n < d:
        raise IndexError(f"Eigenvector index {n} out of range for d={d}.")
    v = f.eigenbasis[n]
    outer = np.outer(v, v.conj())
    λn = f.eigenbasis.eigenvalues[n]
    power_sum = np.eye(d, dtype=complex)
    for u, M in enumerate(f.members, start=1):
        power_sum = power_sum + λn**(-u) * M.dense()
    power_sum /= d
    dev = np.abs(outer - power_sum).max()
    if dev > config.tolerances.residual:
        raise RuntimeError(f"Projector forms disagree by {dev:.3g}.")
    return DenseOperator(d, outer)

def power_from_relabeling(f: AbelianFamily, b: int) -> DenseOperator:
    """Σ_k λ_k^b |ψ_k⟩⟨ψ_k|: the eigenvalue relabeling k ↦ kb applied to the generator."""
    V = f.eigenvectors
    return DenseOperator(f.d, (V * f.eigenbasis.eigenvalues**b) @ V.conj().T)


# %% [markdown]
# ## Knight-move basis changes
#
# Order the eigenbases of $M_a$ and of its power $M_b = (M_a)^b$ by phase.
# The change of basis between them is a permutation matrix with entries
# (0-based indices)
#
# $$U_{ik} = δ_{k,\, (i b \bmod d)} \,,$$
#
# i.e. starting from the entry $(0, 0)$ each row moves $b$ columns to the
# right (cyclically), like a knight on a chess board.
# Orthogonality of $M_a$ and $M_b$ is equivalent to the vanishing of
# $\sum_s c_s ω^s$, where $c_s$ is the number of ones on the $s$-th cyclic
# upper diagonal, and for prime $d$ the only solution is $c_s = 1$:
# exactly one entry on every cyclic diagonal.
#
# For non-prime $d$ the construction can fail: two rows may land on the same
# column, or on the same diagonal. Such failures are reported, not raised.

# %%
@dataclass(frozen=True, eq=False)
class BasisChangeMatrix:
    d: Dimension
    b: int
    columns: tuple[int, ...]     # Row i has its one in column columns[i] (0-based)

    @property
    def matrix(self) -> Array[np.int64,2]:
        m = np.zeros((self.d, self.d), dtype=np.int64)
        m[np.arange(self.d), list(self.columns)] = 1
        return m

    def to_json(self) -> dict:
        return {"d": int(self.d), "b": self.b, "columns": list(self.columns),
                "ones_1based": [[i+1, k+1] for i, k in enumerate(self.columns)]}


@dataclass(frozen=True)
class KnightViolation:
    """Rows sharing a column or a cyclic diagonal (0-based indices)."""
    d: Dimension
    b: int
    column_collisions: tuple[tuple[int, tuple[int, ...]], ...]
    diagonal_collisions: tuple[tuple[int, tuple[int, ...]], ...]

    def to_json(self) -> dict:
        return {"d": int(self.d), "b": self.b, "violation": True,
                "column_collisions": [{"column": k, "rows": list(rows)}
                                      for k, rows in self.column_collisions],
                "diagonal_collisions": [{"diagonal": s, "rows": list(rows)}
                                        for s, rows in self.diagonal_collisions]}


def knight_move_unitary(d: int, b: int) -> Union[BasisChangeMatrix, KnightViolation]:
    """
    Knight-move permutation matrix for the power b, or a `KnightViolation`
    if two rows share a column or a cyclic diagonal (possible only for
    non-prime d).
    """
    d = Dimension(d)
    if not 2 <= b <= d-1:
        raise ValueError(f"b must lie in [2, {d-1}]; received {b}.")
    columns = tuple((i*b) % d for i in range(d))
    by_column, by_diagonal = defaultdict(list), defaultdict(list)
    for i, k in enumerate(columns):
        by_column[k].append(i)
        by_diagonal[(k - i) % d].append(i)
    col_coll = tuple((k, tuple(rows)) for k, rows in sorted(by_column.items()) if len(rows) > 1)
    diag_coll = tuple((s, tuple(rows)) for s, rows in sorted(by_diagonal.items()) if len(rows) > 1)
    if col_coll or diag_coll:
        logger.debug(f"Knight-move construction fails for d={d}, b={b}.")
        return KnightViolation(d, b, col_coll, diag_coll)
    return BasisChangeMatrix(d, b, columns)


# %%
@dataclass(frozen=True)
class ShiftOperator:
    """S(s) = Σ_k |k⊕s⟩⟨k|, the cyclic shift of rows by s."""
    d: Dimension
    s: int

    def __post_init__(self):
        object.__setattr__(self, "d", Dimension(self.d))
        object.__setattr__(self, "s", int(self.s) % self.d)

    @property
    def matrix(self) -> Array[np.int64,2]:
        return np.roll(np.eye(self.d, dtype=np.int64), self.s, axis=0)


def shift_compose(s: Union[ShiftOperator, int], m: Union[BasisChangeMatrix, ArrayLike]) -> Array:
    """
    S(s)·m: row i of the result is row i-s of m, so the s-th cyclic upper
    diagonal of m becomes the main diagonal.
    """
    M = m.matrix if isinstance(m, BasisChangeMatrix) else np.asarray(m)
    if isinstance(s, ShiftOperator):
        if s.d != M.shape[0]:
            raise DimensionMismatchError(f"Shift acts on d={s.d}; matrix has size {M.shape[0]}.")
        s = s.s
    return np.roll(M, s, axis=0)


# %%
@dataclass(frozen=True)
class DiagonalReport:
    c: CsVector
    passed: bool      # every c_s = 1
    vanishes: bool    # Σ c_s ω^s = 0

    def to_json(self) -> dict:
        return {"c": self.c.to_json(), "pass": self.passed, "vanishes": self.vanishes}


def verify_diagonal_property(m: Union[BasisChangeMatrix, ArrayLike]) -> DiagonalReport:
    """c_s = Σ |(S(s) m)_{ii}|², the weight on the s-th cyclic upper diagonal."""
    M = m.matrix if isinstance(m, BasisChangeMatrix) else np.asarray(m)
    d = M.shape[0]
    c = []
    for s in range(d):
        weight = float(np.sum(np.abs(np.diag(shift_compose(s, M)))**2))
        if abs(weight - round(weight)) > config.tolerances.structural:
            raise ValueError("verify_diagonal_property expects a permutation matrix.")
        c.append(int(round(weight)))
    cs = CsVector(d, c)
    return DiagonalReport(cs, all(x == 1 for x in c), vanishing_sum_check(cs))


# %% [markdown]
# ### Exhaustive search
#
# The search visits all permutations $σ$ with $σ(0) = 0$ and keeps those
# with exactly one entry on every cyclic diagonal, i.e. for which
# $i \mapsto σ(i) - i$ is also a permutation. For $d \geq 7$ this admits
# nonlinear solutions besides the knight moves $σ(i) = bi$ (19 in total for
# $d = 7$). Those correspond to operators orthogonal to $M_a$ but not to all
# of its powers. Requiring orthogonality to every power except the one the
# operator equals, i.e. that $i \mapsto σ(i) - u i$ be a permutation for
# all $u$ but one, leaves exactly the $d - 2$ knight moves.

# %%
@dataclass(frozen=True)
class KnightCensus:
    d: Dimension
    diagonal_count: int          # One entry per cyclic diagonal
    power_orthogonal_count: int  # ... and orthogonal to all other powers
    matches_construction: bool   # power-orthogonal set == knight_move_unitary outputs

    def to_json(self) -> dict:
        return {"d": int(self.d), "diagonal_count": self.diagonal_count,
                "power_orthogonal_count": self.power_orthogonal_count,
                "matches_construction": self.matches_construction}


def knight_census(d: int, progbar: Union[Literal["auto"],None,tqdm]=None) -> KnightCensus:
    """
    Raises
    ------
    ValueError: If d is not prime.
    ResourceLimitError: If d exceeds ``config.guards.max_knight_search_dim``.
    """
    d = Dimension(d)
    if not d.is_prime:
        raise ValueError(f"The knight-move census is defined for prime d; received {d}.")
    if d > config.guards.max_knight_search_dim:
        raise ResourceLimitError(
            f"Exhaustive search over {math.factorial(d-1)} permutations for d={d} exceeds "
            f"the configured limit d ≤ {config.guards.max_knight_search_dim} "
            "(config.guards.max_knight_search_dim).")
    t1 = time.perf_counter()
    progbar, close_progbar = get_progbar(progbar, desc=f"Knight census (d={d})",
                                         total=math.factorial(d-1))
    full = set(range(d))
    diagonal, power_orth = [], []
    try:
        for tail in permutations(range(1, d)):
            σ = (0,) + tail
            if progbar is not None: progbar.update(1)
            if {(σ[i] - i) % d for i in range(d)} != full:
                continue
            diagonal.append(σ)
            n_failing = sum({(σ[i] - u*i) % d for i in range(d)} != full for u in range(d))
            if n_failing == 1:
                power_orth.append(σ)
    finally:
        if close_progbar: progbar.close()
    construction = {knight_move_unitary(d, b).columns for b in range(2, d)}
    census = KnightCensus(d, len(diagonal), len(power_orth), set(power_orth) == construction)
    logger.debug(f"Knight census for d={d}: {census.diagonal_count} diagonal solutions, "
                 f"{census.power_orthogonal_count} power-orthogonal, "
                 f"in {time.perf_counter()-t1:.2f} s.")
    return census


def count_knight_unitaries(d: int) -> int:
    """
    Number of permutation matrices with (0,0) = 1, one entry per cyclic
    diagonal, and orthogonal to all other powers of the generator.
    Equals d-2 and coincides with the knight-move matrices.
    """
    census = knight_census(d)
    if not census.matches_construction:
        raise RuntimeError(f"Exhaustive search for d={d} disagrees with the knight-move construction.")
    if census.diagonal_count != census.power_orthogonal_count:
        logger.info(f"d={d}: {census.diagonal_count - census.power_orthogonal_count} nonlinear "
                    "permutations have one entry per diagonal but are not orthogonal to "
                    "every power of the generator.")
    return census.power_orthogonal_count


# %% [markdown]
# ### Example

# %% editable=true slideshow={"slide_type": ""} tags=["active-ipynb"]
# knight_move_unitary(5, 2).matrix, verify_diagonal_property(knight_move_unitary(5, 2))
