import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from quditmub.zd_arith import PhaseExp
from quditmub.monomial import MonomialOperator, multiply, hs_inner
from quditmub.pauli_basis import (PauliLabel, OperatorBasis, make_X, make_Z, make_pauli,
                                  commutation_phase, build_basis, build_tensor_basis,
                                  build_composite_basis, audit)


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_basis_audit(d):
    B = build_basis(d)
    assert len(B) == d**2
    assert B.identity_index == 0 and B[0].is_identity()
    report = audit(B)
    assert report.passed, report.failures
    assert report.orthonormal and report.traceless and report.dnary_per_factor
    # Only the identity is Hermitian, except for the qubit Paulis X and Z
    assert report.hermitian_count == (3 if d == 2 else 1)

def test_non_prime_rejected():
    with pytest.raises(ValueError, match="build_composite_basis"):
        build_basis(4)
    with pytest.raises(ValueError):
        build_tensor_basis([2, 4])

def test_tensor_bases():
    B = build_tensor_basis([3, 3])
    assert len(B) == 81 and B.phase_order == 3
    assert B.audit().passed
    C = build_composite_basis(6)
    assert C.dims == (2, 3) and len(C) == 36 and C.phase_order == 6
    assert C.audit().passed

def test_memoized_construction():
    assert build_basis(5) is build_basis(5)

def test_commutation_phase():
    d = 3
    X, Z = PauliLabel.single(1, 0, d), PauliLabel.single(0, 1, d)
    assert commutation_phase(X, Z) == PhaseExp(2, 3)
    assert commutation_phase(Z, Z) == PhaseExp(0, 3)
    # Agreement with direct multiplication, for all pairs
    B = build_basis(d)
    ω = np.exp(2j*np.pi/d)
    for l1, M1 in B.elements:
        for l2, M2 in B.elements:
            t = commutation_phase(l1, l2).k
            assert np.allclose((M1 @ M2).dense(), ω**t * (M2 @ M1).dense())

def test_commutation_phase_tensor():
    l1 = PauliLabel((2, 3), ((1, 0), (1, 0)))
    l2 = PauliLabel((2, 3), ((0, 1), (0, 1)))
    t = commutation_phase(l1, l2)
    assert t.d == 6
    M1, M2 = make_pauli(l1), make_pauli(l2)
    assert np.allclose((M1 @ M2).dense(), t.value * (M2 @ M1).dense())

def test_make_pauli():
    assert make_pauli(PauliLabel.single(1, 1, 3)) == multiply(make_X(3), make_Z(3))
    assert str(PauliLabel.single(1, 2, 3)) == "XZ^2"
    assert str(PauliLabel((2, 3), ((0, 0), (1, 0)))) == "1⊗X"

def test_index_and_locate():
    B = build_basis(3)
    j = B.index((0, 1))
    assert B.labels[j] == PauliLabel.single(0, 1, 3)
    # ω Z is the basis element Z times ω
    ωZ = MonomialOperator(3, (0, 1, 2), (1, 2, 0))
    assert B.locate(ωZ) == (j, PhaseExp(1, 3))
    # A transposition is not proportional to any basis element
    assert B.locate(MonomialOperator(3, (1, 0, 2), (0, 0, 0))) is None
    with pytest.raises(TypeError):
        build_tensor_basis([3, 3]).index((0, 1))
    with pytest.raises(KeyError):
        B.index(PauliLabel.single(0, 1, 5))

def test_coefficients_reconstruct():
    rng = np.random.default_rng(97)
    for B in (build_basis(3), build_composite_basis(6)):
        A = rng.normal(size=(B.D, B.D)) + 1j*rng.normal(size=(B.D, B.D))
        c = B.coefficients(A)
        assert np.allclose(B.reconstruct(c), A)
        # Coefficients of a basis element are a unit vector
        e = B.coefficients(B.dense(4))
        assert np.allclose(e, np.eye(len(B))[4])

def test_from_json_audit_detects_corruption():
    B = build_basis(3)
    data = B.to_json()
    assert OperatorBasis.from_json(data).audit().passed
    data["elements"][1]["phase"] = [0, 0, 0]   # Z replaced by a second identity
    report = OperatorBasis.from_json(data).audit()
    assert not report.passed
    assert not report.orthonormal and not report.traceless
    with pytest.raises(ValueError):
        OperatorBasis.from_json({"dims": [3]})

def test_composite_basis_dims():
    for p in (2, 3, 5, 7):
        C, B = build_composite_basis(p), build_basis(p)
        assert C.dims == B.dims and C.labels == B.labels and C.operators == B.operators
    B = build_composite_basis(4)
    assert B.dims == (2, 2) and len(B) == 16
    assert B.audit().passed


# ## Group structure

@pytest.mark.parametrize("d", [2, 3, 5])
def test_products_stay_in_basis(d):
    B = build_basis(d)
    for i, Mi in enumerate(B):
        for j, Mj in enumerate(B):
            found = B.locate(multiply(Mi, Mj))
            assert found is not None, (i, j)
            k, t = found
            # Exponents add, the phase is a power of ω
            (ai, bi), = B.labels[i].exponents
            (aj, bj), = B.labels[j].exponents
            assert B.labels[k].exponents == (((ai+aj) % d, (bi+bj) % d),)
            assert 0 <= t.k < d

@seed(3)
@settings(max_examples=60, deadline=None)
@given(dims=st.sampled_from([(2, 3), (3, 3), (2, 2)]), data=st.data())
def test_tensor_products_stay_in_basis(dims, data):
    B = build_tensor_basis(dims)
    i = data.draw(st.integers(0, len(B)-1))
    j = data.draw(st.integers(0, len(B)-1))
    assert B.locate(multiply(B[i], B[j])) is not None

@seed(5)
@settings(max_examples=100, deadline=None)
@given(dims=st.sampled_from([(2,), (3,), (5,), (2, 3), (3, 3)]), data=st.data())
def test_exact_inner_product_matches_dense(dims, data):
    B = build_tensor_basis(dims)
    i = data.draw(st.integers(0, len(B)-1))
    j = data.draw(st.integers(0, len(B)-1))
    A, C = B[i], B[j]
    dense = np.trace(A.dense() @ C.dense().conj().T) / B.D
    assert abs(complex(hs_inner(A, C)) - dense) < 1e-12
    assert abs(dense - (i == j)) < 1e-12
