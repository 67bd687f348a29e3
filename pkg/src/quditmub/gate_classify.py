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
# # Classification of gates
#
# A unitary $U$ is *efficiently characterizable* with respect to an operator
# basis $\{M_i\}$ when conjugation maps every basis element onto a basis
# element, up to a phase:
#
# $$U M_i U^† = e^{iφ_i} M_{j(i)} \,.$$
#
# The map $i \mapsto j(i)$ is then a permutation of the traceless elements,
# and applying $U$ repeatedly splits them into cycles whose degrees add up to
# $D^2 - 1$. Because conjugation preserves spectra, every $φ_i$ is a multiple
# of $2π/d$ for the optimal basis.
#
# For prime $d$, characterizable gates are exactly those that permute the
# $d+1$ mutually unbiased eigenbases of the Abelian families.
#
# Numerically we compute $C = U M_i U^†$ and its overlaps
# $⟨M_j, C⟩ = \frac{1}{D}\operatorname{Tr}[C M_j^†]$ with every basis element.
# Since the basis is orthonormal and $C$ has unit norm, a match is declared
# when one overlap has modulus larger than $1 - \mathtt{tol}$.

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from __future__ import annotations

import json
import time
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group
from tqdm.auto import tqdm

from scityping.numpy import Array

from .config import config
from .zd_arith import Dimension, PhaseExp
from .pauli_basis import PauliLabel, OperatorBasis, make_pauli
from .mub_partition import MubCollection, mub_collection
from .utils import (DimensionMismatchError, NonUnitaryError, NotCharacterizableError,
                    parallel_map, complex_to_json, matrix_to_json, matrix_from_json)

logger = logging.getLogger(__name__)

# %%
__all__ = ["UnitaryGate", "ConjugationMatch", "CycleDecomposition",
           "ClassificationReport", "builtin_gate", "parse_gate",
           "conjugation_image", "classify", "phase_is_dnary",
           "is_mub_preserving", "mub_image_map", "cycle_degree_histogram"]


# %% [markdown]
# ## Gates

# %%
@dataclass(frozen=True, eq=False)
class UnitaryGate:
    dims: tuple[Dimension, ...]
    matrix: Array[complex,2]

    def __post_init__(self):
        dims = tuple(Dimension(d) for d in self.dims)
        m = np.array(self.matrix, dtype=complex)
        D = int(np.prod(dims))
        if m.shape != (D, D):
            raise DimensionMismatchError(f"A gate on dims {list(map(int, dims))} must be "
                                         f"{D}×{D}; received shape {m.shape}.")
        dev = float(np.abs(m @ m.conj().T - np.eye(D)).max())
        if dev >= config.tolerances.structural:
            raise NonUnitaryError(f"Matrix is not unitary: max |UU† - 1| = {dev:.3g}.")
        m.flags.writeable = False
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def D(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: UnitaryGate) -> UnitaryGate:
        if not isinstance(other, UnitaryGate):
            return NotImplemented
        if self.dims != other.dims:
            raise DimensionMismatchError(f"Cannot compose gates on dims {self.dims} and {other.dims}.")
        return UnitaryGate(self.dims, self.matrix @ other.matrix)

    @property
    def dag(self) -> UnitaryGate:
        return UnitaryGate(self.dims, self.matrix.conj().T)

    def to_json(self) -> dict:
        return {"dims": [int(d) for d in self.dims], "matrix": matrix_to_json(self.matrix)}

    @classmethod
    def from_json(cls, data: Union[dict, list]) -> UnitaryGate:
        """Accept ``{"dims": [...], "matrix": rows}`` or bare rows (single factor)."""
        if isinstance(data, dict):
            m = matrix_from_json(data["matrix"])
            dims = data.get("dims", [m.shape[0]])
        else:
            m = matrix_from_json(data)
            dims = [m.shape[0]]
        return cls(tuple(dims), m)


# %% [markdown]
# ### Built-in gates
#
# Single-letter names act on every factor: `X` on dims `[3, 3]` is $X⊗X$.
#
# | name | gate |
# |------|------|
# | `I`, `X`, `Z` | identity, shift, clock |
# | `F` | Fourier, $F_{jk} = ω^{jk}/\sqrt{d}$ |
# | `S` | phase gate, $\operatorname{diag}(ω^{n(n-1)/2})$ for odd $d$, $\operatorname{diag}(1, i)$ for $d = 2$ |
# | `pauli:a,b[,a,b…]` | $X^aZ^b$, one pair per factor |
# | `CSUM` | $\lvert a,b \rangle \mapsto \lvert a, a⊕b \rangle$ on two equal factors |
# | `random:<seed>` | Haar-random unitary |
# | `expherm:<seed>` | $e^{-iH}$ for a random Hermitian $H$ |
# | `tensor:g1\|g2…` | one single-factor gate per factor |

# %%
def _fourier(d: int) -> Array[complex,2]:
    n = np.arange(d)
    return np.exp(2j*np.pi*np.outer(n, n)/d) / np.sqrt(d)

def _phase_gate(d: int) -> Array[complex,2]:
    if d == 2:
        return np.diag([1, 1j])
    n = np.arange(d)
    # n(n-1)/2 is an integer, so reducing mod d first is exact
    return np.diag(np.exp(2j*np.pi*((n*(n-1)//2) % d)/d))

def _factorwise(f, dims) -> Array[complex,2]:
    return reduce(np.kron, (f(int(d)) for d in dims))

def builtin_gate(name: str, dims: Sequence[int]) -> UnitaryGate:
    dims = tuple(Dimension(d) for d in dims)
    D = int(np.prod(dims))
    kind, _, arg = name.partition(":")
    if kind == "I":
        m = np.eye(D)
    elif kind in {"X", "Z"}:
        ab = (1, 0) if kind == "X" else (0, 1)
        m = make_pauli(PauliLabel(dims, (ab,)*len(dims))).dense()
    elif kind == "F":
        m = _factorwise(_fourier, dims)
    elif kind == "S":
        m = _factorwise(_phase_gate, dims)
    elif kind == "pauli":
        try:
            exps = [int(x) for x in arg.split(",")]
        except ValueError:
            raise ValueError(f"Cannot parse Pauli exponents from '{arg}'.") from None
        if len(exps) != 2*len(dims):
            raise ValueError(f"'pauli:' expects one (a, b) pair per factor; dims are "
                             f"{list(map(int, dims))}, received '{arg}'.")
        pairs = tuple((exps[2*i] % d, exps[2*i+1] % d) for i, d in enumerate(dims))
        m = make_pauli(PauliLabel(dims, pairs)).dense()
    elif kind == "CSUM":
        if len(dims) != 2 or dims[0] != dims[1]:
            raise ValueError(f"CSUM acts on two equal factors; received dims {list(map(int, dims))}.")
        d = dims[0]
        m = np.zeros((D, D))
        for a in range(d):
            for b in range(d):
                m[a*d + (a+b) % d, a*d + b] = 1
    elif kind == "random":
        m = unitary_group.rvs(D, random_state=_seed(arg)) if D > 1 else np.eye(1)
    elif kind == "expherm":
        rng = np.random.default_rng(_seed(arg))
        A = rng.normal(size=(D, D)) + 1j*rng.normal(size=(D, D))
        m = scipy.linalg.expm(-1j*(A + A.conj().T)/2)
    elif kind == "tensor":
        parts = arg.split("|")
        if len(parts) != len(dims):
            raise ValueError(f"'tensor:' expects {len(dims)} factor gates; received {len(parts)}.")
        m = reduce(np.kron, (builtin_gate(p, (d,)).matrix for p, d in zip(parts, dims)))
    else:
        raise ValueError(f"Unknown gate '{name}'. Built-in gates are I, X, Z, F, S, CSUM, "
                         "pauli:a,b, random:<seed>, expherm:<seed> and tensor:g1|g2|….")
    return UnitaryGate(dims, m)

def _seed(arg: str) -> int:
    try:
        return int(arg)
    except ValueError:
        raise ValueError(f"Expected an integer seed; received '{arg}'.") from None

def parse_gate(spec: str, dims: Sequence[int]) -> UnitaryGate:
    """A built-in name, or the path of a JSON file with the dense matrix."""
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        with open(path) as f:
            gate = UnitaryGate.from_json(json.load(f))
        if int(np.prod(gate.dims)) != int(np.prod(dims)):
            raise DimensionMismatchError(f"Gate in {path} has dimension {gate.D}; "
                                         f"expected {int(np.prod(dims))}.")
        return UnitaryGate(tuple(dims), gate.matrix)
    return builtin_gate(spec, dims)


# %% [markdown]
# ## Conjugation matches

# %%
@dataclass(frozen=True)
class ConjugationMatch:
    """
    U M_source U† = phase · M_target, with `fidelity` = |⟨M_target, U M_source U†⟩|.
    Without a match, `target` and `phase` are None and `fidelity` is the
    largest overlap found.
    """
    source: int
    target: Optional[int]
    phase: Optional[complex]
    phase_exp: Optional[PhaseExp]   # Set when `phase` is within tol of a root of unity of order `order`
    fidelity: float
    order: int

    @property
    def matched(self) -> bool:
        return self.target is not None

    def to_json(self) -> dict:
        return {"source": self.source, "target": self.target,
                "phase": None if self.phase is None else complex_to_json(self.phase),
                "phase_exp": None if self.phase_exp is None else self.phase_exp.k,
                "order": self.order, "fidelity": self.fidelity}


def _snap(phase: complex, order: int, tol: float) -> Optional[PhaseExp]:
    k = int(np.rint(np.angle(phase) * order / (2*np.pi))) % order
    if abs(phase - np.exp(2j*np.pi*k/order)) <= tol:
        return PhaseExp(k, order)
    return None

def _match_from_row(i: int, row: Array[complex,1], order: int, tol: float) -> ConjugationMatch:
    mags = np.abs(row)
    above = np.flatnonzero(mags > 1 - tol)
    if len(above) > 1:
        raise RuntimeError(f"Element {i} matches {len(above)} basis elements; "
                           "the basis is not orthonormal.")
    if len(above) == 0:
        return ConjugationMatch(i, None, None, None, float(mags.max()), order)
    j = int(above[0])
    phase = complex(row[j] / mags[j])
    return ConjugationMatch(i, j, phase, _snap(phase, order, tol), float(mags[j]), order)

def _characteristic_row(U: UnitaryGate, B: OperatorBasis, i: int) -> Array[complex,1]:
    """χ_U(i, ·): (1/D) Tr[M_j† U M_i U†] for every j."""
    C = U.matrix @ B.dense(i) @ U.matrix.conj().T
    return B.coefficients(C)

def _check_dims(U: UnitaryGate, B: OperatorBasis):
    if U.D != B.D:
        raise DimensionMismatchError(f"Gate acts on dimension {U.D}; basis on {B.D}.")

def conjugation_image(U: UnitaryGate, i: int, B: OperatorBasis,
                      tol: Optional[float]=None) -> ConjugationMatch:
    """
    Find j and φ with U M_i U† = e^{iφ} M_j.

    Raises
    ------
    DimensionMismatchError: If U and B act on different dimensions.
    RuntimeError: If more than one basis element matches.
    """
    _check_dims(U, B)
    if tol is None:
        tol = config.tolerances.match
    return _match_from_row(i, _characteristic_row(U, B, i), B.phase_order, tol)


# %% [markdown]
# ## Classification

# %%
@dataclass(frozen=True)
class CycleDecomposition:
    """Orbits i → j(i) → … of the traceless indices, with the phase picked up at each step."""
    cycles: tuple[tuple[int, ...], ...]
    phases: tuple[tuple[complex, ...], ...]

    @property
    def degrees(self) -> list[int]:
        return [len(c) for c in self.cycles]

    def to_json(self, B: Optional[OperatorBasis]=None) -> list[dict]:
        out = []
        for cyc, ph in zip(self.cycles, self.phases):
            entry = {"indices": list(cyc), "phases": [complex_to_json(p) for p in ph]}
            if B is not None:
                entry["labels"] = [str(B.labels[i]) for i in cyc]
            out.append(entry)
        return out


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    dims: tuple[Dimension, ...]
    characterizable: bool
    matches: tuple[ConjugationMatch, ...]
    cycles: Optional[CycleDecomposition]
    mub_preserving: Optional[bool]
    characteristic_matrix: Array[complex,2] = field(repr=False)
    basis: Optional[OperatorBasis] = field(default=None, repr=False)

    @property
    def unmatched(self) -> list[int]:
        return [m.source for m in self.matches if not m.matched]

    @property
    def all_phases_dnary(self) -> Optional[bool]:
        if not self.characterizable:
            return None
        return all(m.phase_exp is not None for m in self.matches)

    def to_json(self) -> dict:
        return {"dims": [int(d) for d in self.dims],
                "characterizable": self.characterizable,
                "unmatched": self.unmatched,
                "all_phases_dnary": self.all_phases_dnary,
                "mub_preserving": self.mub_preserving,
                "cycles": None if self.cycles is None else self.cycles.to_json(self.basis),
                "degree_histogram": (None if self.cycles is None else
                                     {str(k): v for k, v in cycle_degree_histogram(self).items()}),
                "matches": [m.to_json() for m in self.matches]}


def _follow_cycles(matches: Sequence[ConjugationMatch], B: OperatorBasis) -> CycleDecomposition:
    link = {m.source: (m.target, m.phase) for m in matches}
    traceless = list(B.traceless_indices)
    seen, cycles, phases = set(), [], []
    for start in traceless:
        if start in seen:
            continue
        cyc, ph, i = [], [], start
        while True:
            if i in seen or i == B.identity_index:
                raise RuntimeError(f"Conjugation map is not a permutation of the traceless "
                                   f"elements (index {i} reached twice).")
            seen.add(i)
            cyc.append(i)
            j, phase = link[i]
            ph.append(phase)
            if j == start:
                break
            i = j
        cycles.append(tuple(cyc)); phases.append(tuple(ph))
    decomp = CycleDecomposition(tuple(cycles), tuple(phases))
    if sum(decomp.degrees) != len(traceless):
        raise RuntimeError(f"Cycle degrees add up to {sum(decomp.degrees)}, not {len(traceless)}.")
    return decomp

def classify(U: UnitaryGate, B: OperatorBasis, tol: Optional[float]=None,
             progbar: Union[Literal["auto"],None,tqdm]=None) -> ClassificationReport:
    """
    Decide whether U maps every element of B onto an element of B up to a
    phase; if so, decompose the induced permutation into cycles.
    For single-factor prime bases, also test MUB preservation.
    """
    _check_dims(U, B)
    if tol is None:
        tol = config.tolerances.match
    t1 = time.perf_counter()
    rows = parallel_map(lambda i: _characteristic_row(U, B, i), range(len(B)),
                        progbar=progbar, desc="Conjugation scan")
    chi = np.array(rows)
    matches = tuple(_match_from_row(i, row, B.phase_order, tol) for i, row in enumerate(chi))
    characterizable = all(m.matched for m in matches)
    cycles = _follow_cycles(matches, B) if characterizable else None
    mub_preserving = None
    if len(B.dims) == 1 and B.dims[0].is_prime:
        mub_preserving = is_mub_preserving(U, mub_collection(int(B.dims[0])), tol)
        if mub_preserving != characterizable:
            logger.warning(f"Characterizability ({characterizable}) and MUB preservation "
                           f"({mub_preserving}) disagree; check the tolerance (tol={tol}).")
    logger.debug(f"Classified gate on D={B.D} in {time.perf_counter()-t1:.3f} s: "
                 f"characterizable={characterizable}.")
    return ClassificationReport(B.dims, characterizable, matches, cycles,
                                mub_preserving, chi, B)


# %%
def phase_is_dnary(m: Union[ConjugationMatch, complex], order: Optional[int]=None,
                   tol: Optional[float]=None) -> tuple[bool, Optional[PhaseExp]]:
    """
    Whether a phase is within `tol` of a root of unity ω^k of the given order;
    returns (True, k) or (False, None).
    For a `ConjugationMatch`, `order` defaults to the basis phase order.
    """
    if tol is None:
        tol = config.tolerances.match
    if isinstance(m, ConjugationMatch):
        if not m.matched:
            raise ValueError(f"Element {m.source} has no match, hence no phase.")
        phase = m.phase
        order = m.order if order is None else order
    else:
        phase = complex(m)
        if order is None:
            raise TypeError("`order` is required when passing a bare phase.")
    k = _snap(phase, order, tol)
    return k is not None, k


def cycle_degree_histogram(r: ClassificationReport) -> dict[int, int]:
    if not r.characterizable:
        raise NotCharacterizableError(f"Gate is not characterizable: {len(r.unmatched)} "
                                      "basis elements have no match.")
    return dict(sorted(Counter(r.cycles.degrees).items()))


# %% [markdown]
# ## MUB preservation
#
# For each family eigenbasis $\{ψ^a_k\}$ we compute the overlap profile
# $\lvert⟨ψ^b_n | U ψ^a_k⟩\rvert^2$ against every family $b$. The image is
# the eigenbasis of family $b$ when this profile is a permutation matrix.
# $U$ preserves the partition when every family is sent to exactly one
# family, and no two families to the same one.

# %%
def mub_image_map(U: UnitaryGate, c: MubCollection,
                  tol: Optional[float]=None) -> Optional[tuple[int, ...]]:
    """
    The permutation a ↦ b of families induced by U, or None when U does not
    map family eigenbases onto family eigenbases.
    """
    if U.D != c.d:
        raise DimensionMismatchError(f"Gate acts on dimension {U.D}; families on {c.d}.")
    if tol is None:
        tol = config.tolerances.match
    Vs = [f.eigenvectors for f in c.families]
    def image(V):
        W = U.matrix @ V
        targets = []
        for b, Vb in enumerate(Vs):
            O = np.abs(Vb.conj().T @ W)**2
            is_perm = (np.all((np.abs(O) < tol) | (np.abs(O - 1) < tol))
                       and np.allclose(O.sum(axis=0), 1, atol=tol))
            if is_perm:
                targets.append(b)
        return targets[0] if len(targets) == 1 else None
    images = parallel_map(image, Vs)
    if any(b is None for b in images) or len(set(images)) != len(images):
        return None
    return tuple(images)

def is_mub_preserving(U: UnitaryGate, c: MubCollection, tol: Optional[float]=None) -> bool:
    return mub_image_map(U, c, tol) is not None


# %% [markdown]
# ### Example

# %% editable=true slideshow={"slide_type": ""} tags=["active-ipynb"]
# from quditmub.pauli_basis import build_basis
# B = build_basis(3)
# r = classify(builtin_gate("F", [3]), B)
# r.characterizable, cycle_degree_histogram(r)
