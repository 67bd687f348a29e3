import json
import logging
from fractions import Fraction

import numpy as np
import pytest

from quditmub.pauli_basis import build_basis, build_tensor_basis, build_composite_basis
from quditmub.mub_partition import mub_collection, product_family
from quditmub.gate_classify import builtin_gate
from quditmub.fidelity_mc import (QuantumChannel, depolarizing, dephasing, unitary_error,
                                  noisy_implementation, parse_channel,
                                  exact_entanglement_fidelity, exact_average_fidelity,
                                  entanglement_fidelity_by_contraction,
                                  relevance_distribution, element_eigensystem,
                                  eigenstate_inputs, mc_estimate, required_samples)
from quditmub.utils import DimensionMismatchError, NotTracePreservingError


# ## Channels

def test_channel_validation():
    with pytest.raises(NotTracePreservingError):
        QuantumChannel((2,), (np.eye(2), np.eye(2)))
    with pytest.raises(DimensionMismatchError):
        QuantumChannel((3,), (np.eye(2),))
    with pytest.raises(ValueError):
        QuantumChannel((2,), ())
    for p in (-0.1, 1.5):
        with pytest.raises(ValueError):
            depolarizing(3, p)
        with pytest.raises(ValueError):
            dephasing(3, p)
    with pytest.raises(DimensionMismatchError):
        noisy_implementation(builtin_gate("F", [3]), depolarizing(2, 0.1))

def test_channel_kraus_counts():
    assert len(depolarizing(3, 0.1).kraus) == 1 + 9
    assert len(depolarizing(3, 0.).kraus) == 1
    assert len(depolarizing([2, 3], 1.).kraus) == 36
    assert len(dephasing(4, 0.5).kraus) == 1 + 4

def test_depolarizing_action():
    ch = depolarizing(3, 0.25)
    ρ = np.diag([1., 0, 0])
    assert np.allclose(ch.apply(ρ), 0.75*ρ + 0.25*np.eye(3)/3)
    # Traceless operators are only shrunk
    Z = builtin_gate("Z", [3]).matrix
    assert np.allclose(ch.apply(Z), 0.75*Z)

def test_exact_fidelities():
    I3 = builtin_gate("I", [3])
    ch = noisy_implementation(I3, depolarizing(3, 0.1))
    assert exact_entanglement_fidelity(I3, ch) == pytest.approx(0.9 + 0.1/9)
    assert exact_average_fidelity(I3, ch) == pytest.approx(0.933333, abs=1e-6)
    I2 = builtin_gate("I", [2])
    assert exact_average_fidelity(I2, depolarizing(2, 1.)) == pytest.approx(0.5)
    assert exact_entanglement_fidelity(I2, dephasing(2, 0.2)) == pytest.approx(0.9)

def test_unitary_error():
    U = builtin_gate("random:11", [3])
    assert exact_average_fidelity(U, unitary_error(3, U)) == pytest.approx(1)
    assert exact_average_fidelity(U, unitary_error(3, np.exp(0.4j)*U.matrix)) == pytest.approx(1)
    assert exact_average_fidelity(U, unitary_error(3, builtin_gate("F", [3]))) < 1

def test_contraction_agrees_with_exact():
    B = build_basis(3)
    U = builtin_gate("random:4", [3])
    ch = noisy_implementation(builtin_gate("random:5", [3]), dephasing(3, 0.3))
    assert entanglement_fidelity_by_contraction(U, ch, B) == pytest.approx(
        exact_entanglement_fidelity(U, ch), abs=1e-12)
    V = builtin_gate("CSUM", [3, 3])
    ch = noisy_implementation(V, depolarizing([3, 3], 0.2))
    assert entanglement_fidelity_by_contraction(V, ch, build_tensor_basis([3, 3])) == pytest.approx(
        exact_entanglement_fidelity(V, ch), abs=1e-12)

def test_parse_channel(tmp_path):
    U = builtin_gate("F", [3])
    ch = parse_channel("depolarizing:0.1", U)
    assert exact_average_fidelity(U, ch) == pytest.approx(0.933333, abs=1e-6)
    # Kraus file: noise applied after the gate
    path = tmp_path/"noise.json"
    path.write_text(json.dumps(dephasing(3, 0.2).to_json()))
    ch = parse_channel(str(path), U)
    assert exact_entanglement_fidelity(U, ch) == pytest.approx(
        exact_entanglement_fidelity(builtin_gate("I", [3]), dephasing(3, 0.2)))
    # Unitary implementation
    path = tmp_path/"impl.json"
    path.write_text(json.dumps(U.to_json()))
    assert exact_average_fidelity(U, parse_channel(f"unitary:{path}", U)) == pytest.approx(1)
    for bad in ("depolarizing:abc", "amplitude:0.1", str(tmp_path/"missing.json")):
        with pytest.raises(ValueError):
            parse_channel(bad, U)


# ## Relevance distribution

def test_relevance_characterizable():
    dist = relevance_distribution(builtin_gate("F", [3]), build_basis(3))
    assert dist.support == 9 and dist.minimal and dist.characterizable
    assert dist.exact_weight == Fraction(1, 9)
    assert np.allclose(np.abs(dist.chi), 1)
    dist = relevance_distribution(builtin_gate("pauli:1,0,2,1", [3, 3]), build_tensor_basis([3, 3]))
    assert dist.support == 81 and dist.minimal

def test_relevance_not_characterizable():
    dist = relevance_distribution(builtin_gate("random:3", [2]), build_basis(2))
    assert dist.support > 4 and not dist.minimal
    assert dist.weights.sum() == pytest.approx(1)
    assert dist.exact_weight is None


# ## Preparation states

def test_eigenstate_inputs():
    Z_states = eigenstate_inputs(mub_collection(3)[0])
    assert np.allclose(np.abs(np.array(Z_states)), np.eye(3))
    # X at d = 2: |+⟩ and |-⟩
    for v in eigenstate_inputs(mub_collection(2)[1]):
        assert np.allclose(np.abs(v)**2, [0.5, 0.5])
    c = mub_collection(3)
    states = eigenstate_inputs(product_family([c[1], c[2]]))
    assert len(states) == 9
    for v in states:
        assert np.linalg.matrix_rank(v.reshape(3, 3), tol=1e-10) == 1

def test_element_eigensystem():
    B = build_tensor_basis([2, 3])
    for i in range(len(B)):
        λ, V = element_eigensystem(B, i)
        assert np.allclose((V * λ) @ V.conj().T, B.dense(i))


# ## Estimator

def test_perfect_implementation():
    U = builtin_gate("F", [5])
    est = mc_estimate(U, unitary_error(5, U), build_basis(5), n=500, seed=1)
    assert est.mean == pytest.approx(1)
    assert est.efficient and est.exact_reference == pytest.approx(1)

def test_estimate_depolarized_identity():
    U = builtin_gate("I", [3])
    ch = noisy_implementation(U, depolarizing(3, 0.1))
    est = mc_estimate(U, ch, build_basis(3), n=2000, seed=7)
    assert est.n_samples == 2000 and est.seed == 7
    assert abs(est.mean - 0.933333) <= 4*est.stderr + 1e-6
    assert 0 < est.stderr < 0.01

@pytest.mark.parametrize("D", [2, 3, 4, 9])
def test_estimates_are_unbiased(D):
    B = build_composite_basis(D)
    dims = [int(d) for d in B.dims]
    U = builtin_gate("F", dims)
    ch = noisy_implementation(U, depolarizing(dims, 0.1))
    dist = relevance_distribution(U, B)
    exact = exact_average_fidelity(U, ch)
    hits = 0
    for seed in range(50):
        est = mc_estimate(U, ch, B, n=2000, seed=seed, distribution=dist)
        hits += abs(est.mean - exact) <= 3*est.stderr
    assert hits >= 45

def test_estimate_reproducible(monkeypatch):
    U, B = builtin_gate("F", [3]), build_basis(3)
    ch = noisy_implementation(U, dephasing(3, 0.3))
    monkeypatch.setenv("QUDIT_MUB_THREADS", "1")
    a = mc_estimate(U, ch, B, n=1500, seed=21)
    monkeypatch.setenv("QUDIT_MUB_THREADS", "4")
    b = mc_estimate(U, ch, B, n=1500, seed=21)
    assert a.mean == b.mean and a.stderr == b.stderr

def test_estimate_two_qutrits():
    U = builtin_gate("pauli:1,0,0,1", [3, 3])
    ch = noisy_implementation(U, depolarizing([3, 3], 0.05))
    est = mc_estimate(U, ch, build_tensor_basis([3, 3]), n=2000, seed=3)
    assert est.efficient and est.distribution.support == 81
    assert abs(est.mean - exact_average_fidelity(U, ch)) <= 4*est.stderr + 1e-6

def test_estimate_with_shots():
    U = builtin_gate("F", [3])
    ch = noisy_implementation(U, depolarizing(3, 0.1))
    est = mc_estimate(U, ch, build_basis(3), n=400, seed=5, shots=200)
    assert est.shots == 200
    assert abs(est.mean - exact_average_fidelity(U, ch)) <= 4*est.stderr + 1e-3

def test_estimate_argument_errors():
    U, B = builtin_gate("F", [3]), build_basis(3)
    ch = depolarizing(3, 0.1)
    with pytest.raises(ValueError):
        mc_estimate(U, ch, B, n=0)
    with pytest.raises(ValueError):
        mc_estimate(U, ch, B, n=10, shots=-1)
    with pytest.raises(DimensionMismatchError):
        mc_estimate(U, ch, build_basis(5), n=10)

def test_inefficient_estimate_warns(caplog):
    U = builtin_gate("random:1", [2])
    ch = noisy_implementation(U, depolarizing(2, 0.1))
    with caplog.at_level(logging.WARNING):
        est = mc_estimate(U, ch, build_basis(2), n=200, seed=0)
    assert not est.efficient
    assert "not efficiently characterizable" in caplog.text


# ## Sample requirements

def test_required_samples_bound_is_dimension_independent():
    counts = []
    for dims in ([2], [3], [3, 3]):
        U = builtin_gate("F", dims)
        B = build_basis(dims[0]) if len(dims) == 1 else build_tensor_basis(dims)
        counts.append(required_samples(U, depolarizing(dims, 0.1), B, target=0.01))
    assert counts[0] == counts[1] == counts[2]
    U = builtin_gate("random:2", [3])
    assert required_samples(U, depolarizing(3, 0.1), build_basis(3), target=0.01) > counts[1]

def test_required_samples_empirical():
    counts = {}
    for dims in ([2], [3], [3, 3]):
        U = builtin_gate("I", dims)
        B = build_basis(dims[0]) if len(dims) == 1 else build_tensor_basis(dims)
        ch = noisy_implementation(U, depolarizing(dims, 0.1))
        counts[len(B)] = required_samples(U, ch, B, target=0.01, method="empirical",
                                          pilot=2000, seed=0)
    assert all(n >= 1 for n in counts.values())
    assert counts[81] <= 2*max(counts[4], counts[9])

def test_required_samples_errors():
    U, B = builtin_gate("F", [3]), build_basis(3)
    with pytest.raises(ValueError):
        required_samples(U, depolarizing(3, 0.1), B, target=0)
    with pytest.raises(ValueError):
        required_samples(U, depolarizing(3, 0.1), B, target=0.01, method="guess")
