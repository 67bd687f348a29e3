import json
import logging

import numpy as np
import pytest

from quditmub.zd_arith import PhaseExp
from quditmub.monomial import multiply, adjoint
from quditmub.pauli_basis import make_X, make_Z, build_basis, build_tensor_basis
from quditmub.mub_partition import mub_collection
from quditmub.gate_classify import (UnitaryGate, ConjugationMatch, builtin_gate, parse_gate,
                                    conjugation_image, classify, phase_is_dnary,
                                    is_mub_preserving, mub_image_map,
                                    cycle_degree_histogram)
from quditmub.utils import NonUnitaryError, NotCharacterizableError, DimensionMismatchError


def test_unitary_gate_validation():
    with pytest.raises(NonUnitaryError):
        UnitaryGate((2,), [[1, 1], [0, 1]])
    with pytest.raises(DimensionMismatchError):
        UnitaryGate((3,), np.eye(2))
    g = builtin_gate("F", [3])
    assert g.D == 3
    assert np.allclose((g @ g.dag).matrix, np.eye(3))

def test_identity_matches_itself():
    B = build_basis(3)
    I = builtin_gate("I", [3])
    for i in range(len(B)):
        m = conjugation_image(I, i, B)
        assert m.target == i and m.phase_exp == PhaseExp(0, 3)
        assert m.fidelity == pytest.approx(1)

def test_conjugation_agrees_with_exact_product():
    d = 3
    B = build_basis(d)
    X, Z = make_X(d), make_Z(d)
    j, t = B.locate(multiply(multiply(X, Z), adjoint(X)))
    m = conjugation_image(builtin_gate("X", [d]), B.index((0, 1)), B)
    assert m.target == j and m.phase_exp == t

def test_fourier_maps_X_to_Z():
    B = build_basis(5)
    m = conjugation_image(builtin_gate("F", [5]), B.index((1, 0)), B)
    assert m.matched
    assert B.labels[m.target].exponents[0][0] == 0

@pytest.mark.parametrize("d", [2, 3, 5])
def test_paulis_fix_every_element(d):
    B = build_basis(d)
    for a in range(d):
        for b in range(d):
            r = classify(builtin_gate(f"pauli:{a},{b}", [d]), B)
            assert r.characterizable
            assert cycle_degree_histogram(r) == {1: d**2 - 1}
            assert r.all_phases_dnary
            assert r.mub_preserving is True

@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_fourier(d):
    r = classify(builtin_gate("F", [d]), build_basis(d))
    assert r.characterizable and r.mub_preserving
    assert sum(r.cycles.degrees) == d**2 - 1
    assert r.to_json()["degree_histogram"]

@pytest.mark.parametrize("d", [3, 5, 7])
def test_phase_gate_odd(d):
    r = classify(builtin_gate("S", [d]), build_basis(d))
    assert r.characterizable and r.all_phases_dnary

def test_phase_gate_qubit():
    # S X S† = i XZ: a match, but the phase is not a sign
    r = classify(builtin_gate("S", [2]), build_basis(2))
    assert r.characterizable
    assert r.all_phases_dnary is False
    assert r.mub_preserving is True

@pytest.mark.parametrize("d", [2, 3, 5])
def test_random_gates_not_characterizable(d):
    B = build_basis(d)
    for seed in range(20):
        r = classify(builtin_gate(f"random:{seed}", [d]), B)
        assert not r.characterizable and r.mub_preserving is False
        assert r.cycles is None and r.all_phases_dnary is None
        assert len(r.unmatched) > 0
        with pytest.raises(NotCharacterizableError):
            cycle_degree_histogram(r)

def test_expherm_not_characterizable():
    r = classify(builtin_gate("expherm:3", [3]), build_basis(3))
    assert not r.characterizable

def test_global_phase_invariance():
    B = build_basis(5)
    U = builtin_gate("F", [5])
    V = UnitaryGate((5,), np.exp(0.37j) * U.matrix)
    r, s = classify(U, B), classify(V, B)
    assert [m.target for m in r.matches] == [m.target for m in s.matches]
    assert all(m.phase_exp == n.phase_exp for m, n in zip(r.matches, s.matches))

@pytest.mark.parametrize("gate", ["CSUM", "tensor:F|X", "F", "pauli:1,2,0,1"])
def test_tensor_gates(gate):
    B = build_tensor_basis([3, 3])
    r = classify(builtin_gate(gate, [3, 3]), B)
    assert r.characterizable
    assert sum(r.cycles.degrees) == 80
    assert r.mub_preserving is None

def test_products_of_characterizable_gates():
    B = build_basis(3)
    U = builtin_gate("F", [3]) @ builtin_gate("S", [3])
    assert classify(U, B).characterizable

def test_phase_is_dnary():
    assert phase_is_dnary(np.exp(2j*np.pi/3), order=3) == (True, PhaseExp(1, 3))
    assert phase_is_dnary(1j, order=3) == (False, None)
    assert phase_is_dnary(1j, order=4) == (True, PhaseExp(1, 4))
    with pytest.raises(TypeError):
        phase_is_dnary(1j)
    unmatched = ConjugationMatch(1, None, None, None, 0.4, 3)
    with pytest.raises(ValueError):
        phase_is_dnary(unmatched)
    r = classify(builtin_gate("Z", [3]), build_basis(3))
    assert phase_is_dnary(r.matches[1])[0]

def test_builtin_gate_errors():
    for name, dims in [("H", [3]), ("pauli:1", [3, 3]), ("pauli:a,b", [3]),
                       ("CSUM", [2, 3]), ("CSUM", [3]), ("random:abc", [3]),
                       ("tensor:F", [3, 3])]:
        with pytest.raises(ValueError):
            builtin_gate(name, dims)

def test_gate_zoo():
    X3, Z3 = make_X(3).dense(), make_Z(3).dense()
    assert np.allclose(builtin_gate("X", [3, 3]).matrix, np.kron(X3, X3))
    assert np.allclose(builtin_gate("pauli:1,0,0,1", [3, 3]).matrix, np.kron(X3, Z3))
    assert np.allclose(builtin_gate("tensor:F|X", [3, 3]).matrix,
                       np.kron(builtin_gate("F", [3]).matrix, X3))
    csum = builtin_gate("CSUM", [3, 3]).matrix
    # |1,2⟩ ↦ |1,0⟩
    assert csum[3*1 + 0, 3*1 + 2] == 1

def test_parse_gate_from_file(tmp_path):
    g = builtin_gate("random:5", [3])
    path = tmp_path/"gate.json"
    with open(path, "w") as f:
        json.dump(g.to_json(), f)
    assert np.allclose(parse_gate(str(path), [3]).matrix, g.matrix)
    with pytest.raises(DimensionMismatchError):
        parse_gate(str(path), [2])
    assert np.allclose(parse_gate("F", [3]).matrix, builtin_gate("F", [3]).matrix)

def test_mub_image_map():
    c = mub_collection(3)
    images = mub_image_map(builtin_gate("F", [3]), c)
    assert images is not None and sorted(images) == list(range(4))
    assert mub_image_map(builtin_gate("I", [3]), c) == (0, 1, 2, 3)
    assert not is_mub_preserving(builtin_gate("random:2", [3]), c)
    with pytest.raises(DimensionMismatchError):
        mub_image_map(builtin_gate("F", [5]), c)

def test_no_disagreement_warning(caplog):
    with caplog.at_level(logging.WARNING):
        classify(builtin_gate("F", [5]), build_basis(5))
        classify(builtin_gate("random:1", [5]), build_basis(5))
    assert "disagree" not in caplog.text
