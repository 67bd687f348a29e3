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
# # Monte Carlo estimation of the average gate fidelity
#
# Let $Λ$ be a noisy implementation of the unitary $U$, given by Kraus
# operators $\{K_k\}$. Its entanglement fidelity and average gate fidelity
# with respect to $U$ are
#
# $$F_e = \frac{1}{D^2} \sum_k \bigl\lvert \operatorname{Tr}[U^† K_k] \bigr\rvert^2 \,, \qquad
#   F_\mathrm{avg} = \frac{D F_e + 1}{D + 1} \,.$$
#
# These closed forms serve as the reference. The estimator only uses
# expectation values of basis elements. Expanding in the basis,
#
# $$F_e = \frac{1}{D^2} \sum_{i,j} \overline{χ_U(i,j)}\, χ_Λ(i,j) \,,
# \qquad χ_U(i,j) = \tfrac{1}{D}\operatorname{Tr}\bigl[M_j^† U M_i U^†\bigr] \,,
# \quad χ_Λ(i,j) = \tfrac{1}{D}\operatorname{Tr}\bigl[M_j^† Λ(M_i)\bigr] \,.$$
#
# Drawing $(i, j)$ with probability $\lvert χ_U(i,j)\rvert^2 / D^2$ (the
# *relevance distribution*) and averaging
# $X = \operatorname{Re}[χ_Λ(i,j) / χ_U(i,j)]$ gives an unbiased estimate of
# $F_e$. For a characterizable gate, $χ_U(i, \cdot)$ has a single nonzero
# entry of unit modulus. The distribution is then uniform over $D^2$ pairs,
# $\lvert X \rvert \leq 1$, and the number of samples needed for a given
# accuracy does not depend on $D$.

# %% editable=true slideshow={"slide_type": ""} tags=["hide-input"]
from __future__ import annotations

import json
import math
import time
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

import numpy as np
from tqdm.auto import tqdm

from scityping.numpy import Array
from numpy.typing import ArrayLike

from .config import config
from .zd_arith import Dimension
from .monomial import eigenbasis
from .pauli_basis import OperatorBasis, build_tensor_basis, build_composite_basis
from .mub_partition import AbelianFamily, ProductFamily
from .gate_classify import UnitaryGate, ClassificationReport, classify
from .utils import (DimensionMismatchError, NotTracePreservingError, NonUnitaryError,
                    parallel_map, matrix_to_json, matrix_from_json,
                    fraction_to_json)

logger = logging.getLogger(__name__)

# %%
__all__ = ["QuantumChannel", "RelevanceDistribution", "FidelityEstimate",
           "depolarizing", "dephasing", "unitary_error", "noisy_implementation",
           "parse_channel", "exact_entanglement_fidelity", "exact_average_fidelity",
           "entanglement_fidelity_by_contraction", "relevance_distribution",
           "element_eigensystem", "eigenstate_inputs", "mc_estimate",
           "required_samples"]


# %% [markdown]
# ## Channels

# %%
@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """Λ(ρ) = Σ_k K_k ρ K_k†, trace preserving."""
    dims: tuple[Dimension, ...]
    kraus: tuple[Array[complex,2], ...]

    def __post_init__(self):
        dims = tuple(Dimension(d) for d in self.dims)
        D = int(np.prod(dims))
        kraus = []
        for K in self.kraus:
            K = np.array(K, dtype=complex)
            if K.shape != (D, D):
                raise DimensionMismatchError(f"Kraus operators on dims {list(map(int, dims))} "
                                             f"must be {D}×{D}; received shape {K.shape}.")
            K.flags.writeable = False
            kraus.append(K)
        if not kraus:
            raise ValueError("A channel needs at least one Kraus operator.")
        dev = float(np.abs(sum(K.conj().T @ K for K in kraus) - np.eye(D)).max())
        if dev >= config.tolerances.trace_preserving:
            raise NotTracePreservingError(f"Σ K†K deviates from the identity by {dev:.3g}.")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "kraus", tuple(kraus))

    @property
    def D(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def kraus_stack(self) -> Array[complex,3]:
        return np.stack(self.kraus)

    def apply(self, A: ArrayLike) -> Array[complex,2]:
        """Λ(A); A need not be a density matrix."""
        Ks = self.kraus_stack
        return np.einsum("kab,bc,kdc->ad", Ks, np.asarray(A, dtype=complex), Ks.conj())

    def to_json(self) -> dict:
        return {"dims": [int(d) for d in self.dims],
                "kraus": [matrix_to_json(K) for K in self.kraus]}

    @classmethod
    def from_json(cls, data: dict) -> QuantumChannel:
        kraus = [matrix_from_json(K) for K in data["kraus"]]
        return cls(tuple(data.get("dims", [kraus[0].shape[0]])), tuple(kraus))


# %%
def _as_dims(dims: Union[int, Sequence[int]]) -> tuple[Dimension, ...]:
    if isinstance(dims, (int, np.integer)):
        dims = (dims,)
    return tuple(Dimension(d) for d in dims)

def _basis_for(dims: tuple[Dimension, ...]) -> OperatorBasis:
    if all(d.is_prime for d in dims):
        return build_tensor_basis(dims)
    return build_composite_basis(int(np.prod(dims)))

def _check_probability(name: str, p: float):
    if not 0 <= p <= 1:
        raise ValueError(f"`{name}` must lie in [0, 1]; received {p}.")

def depolarizing(dims: Union[int, Sequence[int]], p: float) -> QuantumChannel:
    """
    ρ ↦ (1-p) ρ + p Tr[ρ] 1/D, with Kraus operators √(1-p) 1 and √(p/D²) M_j
    for every basis element. Terms with zero weight are omitted.
    """
    _check_probability("p", p)
    dims = _as_dims(dims)
    D = int(np.prod(dims))
    kraus = []
    if p < 1:
        kraus.append(np.sqrt(1-p) * np.eye(D))
    if p > 0:
        kraus.extend(np.sqrt(p)/D * M.dense() for M in _basis_for(dims).operators)
    return QuantumChannel(dims, tuple(kraus))

def dephasing(dims: Union[int, Sequence[int]], γ: float) -> QuantumChannel:
    """ρ ↦ (1-γ) ρ + γ diag(ρ)"""
    _check_probability("γ", γ)
    dims = _as_dims(dims)
    D = int(np.prod(dims))
    kraus = []
    if γ < 1:
        kraus.append(np.sqrt(1-γ) * np.eye(D))
    if γ > 0:
        for n in range(D):
            P = np.zeros((D, D)); P[n, n] = np.sqrt(γ)
            kraus.append(P)
    return QuantumChannel(dims, tuple(kraus))

def unitary_error(dims: Union[int, Sequence[int]], V: Union[UnitaryGate, ArrayLike]) -> QuantumChannel:
    """The channel ρ ↦ V ρ V†."""
    dims = _as_dims(dims)
    m = V.matrix if isinstance(V, UnitaryGate) else np.asarray(V, dtype=complex)
    D = int(np.prod(dims))
    if m.shape == (D, D) and np.abs(m @ m.conj().T - np.eye(D)).max() >= config.tolerances.structural:
        raise NonUnitaryError("`V` is not unitary.")
    return QuantumChannel(dims, (m,))

def noisy_implementation(U: UnitaryGate, noise: QuantumChannel) -> QuantumChannel:
    """The gate followed by `noise`: Kraus operators N_k U."""
    if U.D != noise.D:
        raise DimensionMismatchError(f"Gate acts on dimension {U.D}; noise on {noise.D}.")
    return QuantumChannel(U.dims, tuple(N @ U.matrix for N in noise.kraus))

def parse_channel(spec: str, U: UnitaryGate) -> QuantumChannel:
    """
    Build the implementation of `U` described by `spec`:

    - ``depolarizing:<p>``, ``dephasing:<γ>``: noise applied after the gate;
    - ``unitary:<file>``: the implementation is the unitary stored in <file>;
    - ``<file>``: a JSON Kraus set ``{"dims": [...], "kraus": [...]}``, applied after the gate.
    """
    kind, _, arg = spec.partition(":")
    if kind in {"depolarizing", "dephasing"}:
        try:
            value = float(arg)
        except ValueError:
            raise ValueError(f"Cannot parse a noise strength from '{spec}'.") from None
        noise = (depolarizing if kind == "depolarizing" else dephasing)(U.dims, value)
        return noisy_implementation(U, noise)
    elif kind == "unitary":
        V = UnitaryGate.from_json(json.loads(Path(arg).read_text()))
        return unitary_error(U.dims, V)
    path = Path(spec)
    if not path.is_file():
        raise ValueError(f"Unknown channel '{spec}'. Use depolarizing:<p>, dephasing:<γ>, "
                         "unitary:<file> or the path of a Kraus JSON file.")
    noise = QuantumChannel.from_json(json.loads(path.read_text()))
    return noisy_implementation(U, QuantumChannel(U.dims, noise.kraus))


# %% [markdown]
# ## Exact reference values

# %%
def _check_dims(U: UnitaryGate, ch: QuantumChannel):
    if U.D != ch.D:
        raise DimensionMismatchError(f"Gate acts on dimension {U.D}; channel on {ch.D}.")

def exact_entanglement_fidelity(U: UnitaryGate, ch: QuantumChannel) -> float:
    """F_e = (1/D²) Σ_k |Tr[U† K_k]|²"""
    _check_dims(U, ch)
    D = U.D
    traces = np.einsum("ba,kba->k", U.matrix.conj(), ch.kraus_stack)
    return float(np.clip(np.sum(np.abs(traces)**2) / D**2, 0, 1))

def exact_average_fidelity(U: UnitaryGate, ch: QuantumChannel) -> float:
    D = U.D
    return (D*exact_entanglement_fidelity(U, ch) + 1) / (D + 1)

def entanglement_fidelity_by_contraction(U: UnitaryGate, ch: QuantumChannel,
                                         B: OperatorBasis) -> float:
    """
    F_e as the mean over the basis of (1/D) Tr[(U M_i U†)† Λ(M_i)].
    Independent check of `exact_entanglement_fidelity`.
    """
    _check_dims(U, ch)
    D, Um = U.D, U.matrix
    def x(i):
        M = B.dense(i)
        C = Um @ M @ Um.conj().T
        return np.trace(C.conj().T @ ch.apply(M)).real / D
    return float(np.mean(parallel_map(x, range(len(B)))))


# %% [markdown]
# ## Relevance distribution

# %%
@dataclass(frozen=True, eq=False)
class RelevanceDistribution:
    """
    Sampling weights over basis-index pairs (i, j), with the matching values
    χ_U(i, j). For a characterizable gate the support is the D² pairs
    (i, j(i)) and every weight equals `exact_weight` = 1/D².
    """
    D: int
    pairs: Array[np.int64,2]
    weights: Array[float,1]
    chi: Array[complex,1]
    characterizable: bool
    exact_weight: Optional[Fraction] = None

    @property
    def support(self) -> int:
        return len(self.weights)

    @property
    def minimal(self) -> bool:
        return self.support == self.D**2

    def to_json(self) -> dict:
        return {"support": self.support, "minimal": self.minimal,
                "characterizable": self.characterizable,
                "exact_weight": None if self.exact_weight is None
                                else fraction_to_json(self.exact_weight)}


def relevance_distribution(U: UnitaryGate, B: OperatorBasis,
                           report: Optional[ClassificationReport]=None,
                           tol: Optional[float]=None
                           ) -> RelevanceDistribution:
    """
    Pr(i, j) = |χ_U(i, j)|² / D². Pairs whose weight is negligible
    (|χ_U|² below ``config.tolerances.structural``) are left out.
    `tol` is the matching tolerance passed to `classify`.
    """
    if report is None:
        report = classify(U, B, tol=tol)
    D = B.D
    if report.characterizable:
        pairs = np.array([(m.source, m.target) for m in report.matches], dtype=np.int64)
        chi = report.characteristic_matrix[pairs[:, 0], pairs[:, 1]]
        weights = np.full(len(pairs), 1/D**2)
        return RelevanceDistribution(D, pairs, weights, chi, True, Fraction(1, D**2))
    chi_full = report.characteristic_matrix
    w = np.abs(chi_full)**2
    ii, jj = np.nonzero(w > config.tolerances.structural)
    weights = w[ii, jj]
    weights = weights / weights.sum()
    logger.debug(f"Non-minimal relevance distribution: support {len(weights)} > {D**2}.")
    return RelevanceDistribution(D, np.stack([ii, jj], axis=1).astype(np.int64),
                                 weights, chi_full[ii, jj], False)


# %% [markdown]
# ## Preparation and measurement
#
# In an experiment, $χ_Λ(i, j)$ is obtained by preparing the eigenstates of
# $M_i$, applying $Λ$ and measuring in the eigenbasis of $M_j$. On tensor
# bases these are product states and local measurements.

# %%
def element_eigensystem(B: OperatorBasis, i: int) -> tuple[Array[complex,1], Array[complex,2]]:
    """
    Eigenvalues and eigenvectors (columns) of M_i, built factor by factor
    so that eigenvectors are product states.
    """
    vals, vecs = [], []
    for F in B.factors[i]:
        if F.is_identity():
            vals.append(np.ones(F.d)); vecs.append(np.eye(F.d, dtype=complex))
        else:
            eb = eigenbasis(F)
            vals.append(eb.eigenvalues); vecs.append(eb.vectors)
    return reduce(np.kron, vals), reduce(np.kron, vecs)

def eigenstate_inputs(family: Union[AbelianFamily, ProductFamily]) -> list[Array[complex,1]]:
    """The preparation states for a family: its (product) eigenvectors."""
    V = family.eigenvectors
    return [V[:, k] for k in range(V.shape[1])]


# %% [markdown]
# ## Estimator

# %%
@dataclass(frozen=True)
class FidelityEstimate:
    mean: float                 # Average gate fidelity, clamped to [0, 1]
    raw_mean: float             # Average gate fidelity before clamping
    entanglement_mean: float    # Sample mean of X (estimates F_e)
    stderr: float
    n_samples: int
    seed: int
    exact_reference: Optional[float]
    efficient: bool
    shots: int = 0
    distribution: Optional[RelevanceDistribution] = field(default=None, repr=False, compare=False)

    def to_json(self) -> dict:
        return {"mean": self.mean, "raw_mean": self.raw_mean,
                "entanglement_mean": self.entanglement_mean,
                "stderr": self.stderr, "n_samples": self.n_samples, "seed": self.seed,
                "exact_reference": self.exact_reference, "efficient": self.efficient,
                "shots": self.shots,
                "distribution": None if self.distribution is None else self.distribution.to_json()}


def _chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))

def _chunk_sizes(n: int) -> list[int]:
    size = config.mp.chunk_size
    return [min(size, n - start) for start in range(0, n, size)]

def _outcome_probabilities(B: OperatorBasis, ch: QuantumChannel, i: int, j: int):
    """
    For each eigenstate a of M_i: the outcome distribution of Λ(|a⟩⟨a|) in
    the eigenbasis of M_j. Returns (λ_i, μ_j, P) with P[a, b].
    """
    λ, Vi = element_eigensystem(B, i)
    μ, Vj = element_eigensystem(B, j)
    P = np.empty((len(λ), len(μ)))
    for a in range(len(λ)):
        ρ = ch.apply(np.outer(Vi[:, a], Vi[:, a].conj()))
        P[a] = np.einsum("nb,nm,mb->b", Vj.conj(), ρ, Vj).real
    P = np.clip(P, 0, None)
    return λ, μ, P / P.sum(axis=1, keepdims=True)

def mc_estimate(U: UnitaryGate, ch: QuantumChannel, B: OperatorBasis,
                n: Optional[int]=None, seed: Optional[int]=None, shots: int=0,
                progbar: Union[Literal["auto"],None,tqdm]=None,
                distribution: Optional[RelevanceDistribution]=None,
                tol: Optional[float]=None
                ) -> FidelityEstimate:
    """
    Monte Carlo estimate of the average gate fidelity of `ch` with respect to `U`.

    Index pairs are drawn from the relevance distribution in chunks of
    ``config.mp.chunk_size``; chunk c uses a Philox generator keyed by
    ``(seed, c)``, so the result depends only on `seed` and `n`.

    Parameters
    ----------
    n: Number of samples. Defaults to ``config.estimation.samples``.
    seed: Defaults to ``config.random.default_seed``.
    shots: If > 0, each χ_Λ(i, j) is estimated from `shots` measurements per
       eigenstate of M_i instead of being computed exactly.
    distribution: Precomputed relevance distribution for (U, B).
    tol: Matching tolerance used to decide whether U is efficiently characterizable.

    Raises
    ------
    ValueError: If n < 1 or shots < 0.
    DimensionMismatchError: If U, `ch` and B do not act on the same dimension.
    """
    if n is None:
        n = config.estimation.samples
    if seed is None:
        seed = config.random.default_seed
    if n < 1:
        raise ValueError(f"At least one sample is required; received n={n}.")
    if shots < 0:
        raise ValueError(f"`shots` must be non-negative; received {shots}.")
    _check_dims(U, ch)
    if B.D != U.D:
        raise DimensionMismatchError(f"Gate acts on dimension {U.D}; basis on {B.D}.")
    t1 = time.perf_counter()
    dist = distribution if distribution is not None else relevance_distribution(U, B, tol=tol)
    if not dist.characterizable:
        logger.warning(f"Gate is not efficiently characterizable: the relevance distribution "
                       f"has support {dist.support} > D² = {B.D**2}; the estimator is inefficient.")
    D = B.D

    sizes = _chunk_sizes(n)
    rngs = [_chunk_generator(seed, c) for c in range(len(sizes))]
    draws = [rng.choice(dist.support, size=size, p=dist.weights) for rng, size in zip(rngs, sizes)]
    used = np.unique(np.concatenate(draws))
    pairs = dist.pairs

    if shots == 0:
        sources = np.unique(pairs[used, 0]).tolist()
        rows = dict(zip(sources, parallel_map(
            lambda i: B.coefficients(ch.apply(B.dense(i))), sources)))
        chi_Λ = np.zeros(dist.support, dtype=complex)
        for s in used:
            chi_Λ[s] = rows[pairs[s, 0]][pairs[s, 1]]
        def evaluate(c):
            s = draws[c]
            return (chi_Λ[s] / dist.chi[s]).real
    else:
        probs = dict(zip(used.tolist(), parallel_map(
            lambda s: _outcome_probabilities(B, ch, int(pairs[s, 0]), int(pairs[s, 1])),
            used.tolist())))
        def evaluate(c):
            rng, out = rngs[c], []
            for s in draws[c]:
                λ, μ, P = probs[s]
                counts = np.array([rng.multinomial(shots, P[a]) for a in range(len(λ))])
                chi_hat = (λ @ (counts / shots) @ μ.conj()) / D
                out.append((chi_hat / dist.chi[s]).real)
            return np.array(out)

    X = np.concatenate(parallel_map(evaluate, range(len(sizes)), progbar=progbar,
                                    desc="Monte Carlo chunks"))
    entanglement_mean = float(X.mean())
    raw_mean = (D*entanglement_mean + 1) / (D + 1)
    stderr = float(X.std(ddof=1) / np.sqrt(n)) * D/(D+1) if n > 1 else 0.
    mean = float(np.clip(raw_mean, 0, 1))
    if abs(mean - raw_mean) > config.tolerances.structural:
        logger.warning(f"Estimated average fidelity {raw_mean:.6f} lies outside [0, 1]; "
                       f"reporting {mean}.")
    est = FidelityEstimate(mean, raw_mean, entanglement_mean, stderr, n, seed,
                           exact_average_fidelity(U, ch), dist.characterizable,
                           shots, dist)
    logger.debug(f"Monte Carlo estimate with {n} samples in {time.perf_counter()-t1:.3f} s: "
                 f"{mean:.6f} ± {stderr:.2g} (exact {est.exact_reference:.6f}).")
    return est


# %% [markdown]
# ## Sample requirements
#
# With the `"bound"` method, the count follows from Hoeffding's inequality:
# $X$ lies in $[-a, a]$ with $a = \max 1/\lvert χ_U \rvert$ over the support,
# so $n = \lceil 2 a^2 \ln(2/δ) / ε^2 \rceil$ samples estimate $F_e$ to within
# $ε$ with probability $1 - δ$. For characterizable gates $a = 1$ and the count
# is independent of $D$.
# The `"empirical"` method uses the variance of a pilot run instead,
# $n = \lceil \operatorname{Var}[X] / ε^2 \rceil$.

# %%
def required_samples(U: UnitaryGate, ch: QuantumChannel, B: OperatorBasis,
                     target: float, method: Literal["bound", "empirical"]="bound",
                     delta: Optional[float]=None, pilot: Optional[int]=None,
                     seed: Optional[int]=None) -> int:
    """Number of samples to estimate F_e to within `target`."""
    if target <= 0:
        raise ValueError(f"`target` must be positive; received {target}.")
    dist = relevance_distribution(U, B)
    if method == "bound":
        if delta is None:
            delta = config.estimation.confidence_delta
        # |χ_U| = 1 exactly on the support of a characterizable gate
        a = 1. if dist.characterizable else float(np.max(1/np.abs(dist.chi)))
        return math.ceil(2 * a**2 * math.log(2/delta) / target**2)
    elif method == "empirical":
        est = mc_estimate(U, ch, B, n=pilot, seed=seed, distribution=dist)
        D = B.D
        var_X = (est.stderr * (D+1)/D)**2 * est.n_samples
        return max(1, math.ceil(var_X / target**2))
    else:
        raise ValueError(f"`method` must be 'bound' or 'empirical'; received '{method}'.")


# %% [markdown]
# ### Example

# %% editable=true slideshow={"slide_type": ""} tags=["active-ipynb"]
# from quditmub.pauli_basis import build_basis
# from quditmub.gate_classify import builtin_gate
# B = build_basis(3)
# U = builtin_gate("I", [3])
# ch = noisy_implementation(U, depolarizing(3, 0.1))
# mc_estimate(U, ch, B, n=2000, seed=7), exact_average_fidelity(U, ch)
