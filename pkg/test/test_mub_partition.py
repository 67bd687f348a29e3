import numpy as np
import pytest

from quditmub.monomial import identity
from quditmub.pauli_basis import make_X, make_Z, build_basis, build_tensor_basis
from quditmub.mub_partition import (BasisChangeMatrix, KnightViolation, ShiftOperator,
                                    family_powers, partition_basis, partition_tensor_basis,
                                    mub_collection, product_family, verify_mub,
                                    projector_from_family, power_from_relabeling,
                                    knight_move_unitary, shift_compose,
                                    verify_diagonal_property, knight_census,
                                    count_knight_unitaries)
from quditmub.utils import NotDnaryError, ResourceLimitError


@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_partition(d):
    B = build_basis(d)
    c = partition_basis(B)
    assert len(c) == d + 1
    assert all(len(f) == d - 1 for f in c)
    covered = [l for f in c for l in f.labels]
    assert sorted(covered, key=str) == sorted((B.labels[i] for i in B.traceless_indices), key=str)
    assert len(set(covered)) == d**2 - 1
    report = verify_mub(c)
    assert report.passed
    assert report.max_gram_dev < 1e-12
    assert report.to_json()["pass"] is True

def test_partition_tensor_basis():
    B = build_tensor_basis([3, 5])
    with pytest.raises(ValueError, match="partition_tensor_basis"):
        partition_basis(B)
    cs = partition_tensor_basis(B)
    assert [len(c) for c in cs] == [4, 6]
    assert cs[0] is mub_collection(3)

def test_product_family():
    c = mub_collection(3)
    pf = product_family([c[0], c[2]])
    V = pf.eigenvectors
    assert V.shape == (9, 9)
    assert np.allclose(V.conj().T @ V, np.eye(9))
    with pytest.raises(ValueError):
        product_family([])

def test_family_powers():
    f = family_powers(make_Z(3))
    # Z is diagonal: its ordered eigenbasis is computational, up to phases
    assert np.allclose(np.abs(f.eigenvectors), np.eye(3))
    assert f.members[1] == make_Z(3) @ make_Z(3)
    with pytest.raises(NotDnaryError):
        family_powers(identity(3))
    with pytest.raises(ValueError):
        family_powers(make_X(4))

def test_family_with_global_phase():
    # XZ at d = 2 has spectrum ±i; (XZ)² = -1
    f = family_powers(make_X(2) @ make_Z(2))
    assert len(f) == 1
    assert f.eigenbasis.residual(make_X(2) @ make_Z(2)) < 1e-12

@pytest.mark.parametrize("d", [3, 5])
def test_projectors(d):
    for f in mub_collection(d):
        for n in range(d):
            P = projector_from_family(f, n).matrix
            assert np.allclose(P, P.conj().T)
            assert np.allclose(P @ P, P)
            assert np.trace(P).real == pytest.approx(1)
        with pytest.raises(IndexError):
            projector_from_family(f, d)

@pytest.mark.parametrize("d", [2, 3, 5])
def test_power_from_relabeling(d):
    for f in mub_collection(d):
        for b in range(1, d):
            assert np.allclose(power_from_relabeling(f, b).matrix, f.members[b-1].dense())

def test_knight_move_matrix():
    m = knight_move_unitary(5, 2)
    assert isinstance(m, BasisChangeMatrix)
    assert m.columns == (0, 2, 4, 1, 3)
    assert m.to_json()["ones_1based"][1] == [2, 3]
    M = m.matrix
    assert (M.sum(axis=0) == 1).all() and (M.sum(axis=1) == 1).all()

@pytest.mark.parametrize("d", [3, 5, 7, 11])
def test_diagonal_property_prime(d):
    for b in range(2, d):
        report = verify_diagonal_property(knight_move_unitary(d, b))
        assert report.passed and report.vanishes
        assert report.c.c == (1,)*d

def test_knight_violations():
    v = knight_move_unitary(4, 2)
    assert isinstance(v, KnightViolation)
    assert v.column_collisions[0] == (0, (0, 2))
    assert v.to_json()["violation"] is True
    # Non-prime d does not always fail
    assert isinstance(knight_move_unitary(9, 2), BasisChangeMatrix)
    assert isinstance(knight_move_unitary(9, 3), KnightViolation)
    for d in (4, 6, 8, 9, 10, 12):
        assert any(isinstance(knight_move_unitary(d, b), KnightViolation)
                   for b in range(2, d))
    for b in (0, 1, 5):
        with pytest.raises(ValueError):
            knight_move_unitary(5, b)

def test_shift():
    m = knight_move_unitary(5, 3).matrix
    assert ShiftOperator(3, 3).s == 0
    assert (shift_compose(ShiftOperator(5, 5), m) == m).all()
    assert (shift_compose(ShiftOperator(5, 1), m) == ShiftOperator(5, 1).matrix @ m).all()
    report = verify_diagonal_property(np.eye(3))
    assert report.c.c == (3, 0, 0)
    assert not report.passed and not report.vanishes

@pytest.mark.parametrize("d, diagonal, power_orthogonal",
                         [(3, 1, 1), (5, 3, 3), (7, 19, 5)])
def test_knight_census(d, diagonal, power_orthogonal):
    census = knight_census(d)
    assert census.diagonal_count == diagonal
    assert census.power_orthogonal_count == power_orthogonal
    assert census.matches_construction

@pytest.mark.parametrize("d", [2, 3, 5, 7])
def test_count_knight_unitaries(d):
    assert count_knight_unitaries(d) == d - 2

def test_knight_census_limits():
    with pytest.raises(ResourceLimitError):
        knight_census(11)
    with pytest.raises(ValueError):
        knight_census(9)
