from fractions import Fraction

import numpy as np
import pytest

from quditmub.zd_arith import (Dimension, PhaseExp, CsVector, CyclotomicValue,
                               factorize, is_prime, root_of_unity, root_table, reduction_matrix,
                               cyclotomic_reduce, vanishing_sum_check,
                               enumerate_vanishing_sums)
from quditmub.utils import DimensionMismatchError, ResourceLimitError


def test_dimension():
    assert Dimension(7).is_prime
    assert not Dimension(9).is_prime
    assert Dimension(4) == 4 and isinstance(Dimension(4), int)
    with pytest.raises(ValueError):
        Dimension(1)
    with pytest.raises(TypeError):
        Dimension(2.5)

def test_factorize():
    assert factorize(12) == [2, 2, 3]
    assert factorize(7) == [7]
    assert all(isinstance(p, Dimension) and p.is_prime for p in factorize(30))

def test_phase_exp_arithmetic():
    assert PhaseExp.of(5, 3) == PhaseExp(2, 3)
    assert PhaseExp(1, 3) + PhaseExp(2, 3) == PhaseExp(0, 3)
    assert PhaseExp(1, 5) - PhaseExp(3, 5) == PhaseExp(3, 5)
    assert -PhaseExp(1, 4) == PhaseExp(3, 4)
    assert PhaseExp(1, 3) + 4 == PhaseExp(2, 3)
    assert PhaseExp(1, 4).value == pytest.approx(1j)
    with pytest.raises(ValueError):
        PhaseExp(3, 3)
    with pytest.raises(DimensionMismatchError):
        PhaseExp(1, 3) + PhaseExp(1, 5)

def test_is_prime_and_roots():
    assert [n for n in range(2, 20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert root_of_unity(PhaseExp(1, 4)) == pytest.approx(1j)
    assert root_of_unity(PhaseExp(0, 7)) == pytest.approx(1)

def test_root_table():
    for d in (2, 3, 5, 7):
        roots = root_table(d)
        assert np.allclose(roots**d, 1)
        assert abs(roots.sum()) < 1e-12

def test_reduction_matrix():
    R = reduction_matrix(5)
    assert R.shape == (5, 4)
    assert not R.flags.writeable
    # Composite d: rank is Euler's totient
    assert reduction_matrix(12).shape == (12, 4)
    assert reduction_matrix(9).shape == (9, 6)

def test_cyclotomic_reduce():
    # ω² = -1 - ω for d = 3
    assert cyclotomic_reduce([0, 0, 1], 3) == (-1, -1)
    # ω² = -1 and ω³ = -ω for d = 4
    assert cyclotomic_reduce([0, 0, 1, 0], 4) == (-1, 0)
    assert cyclotomic_reduce([0, 0, 0, 1], 4) == (0, -1)
    # Longer vectors wrap around: ω³ = 1 for d = 3
    assert cyclotomic_reduce([0, 0, 0, 1], 3) == (1, 0)

def test_vanishing_sum_check():
    assert vanishing_sum_check(CsVector(3, (1, 1, 1)))
    assert not vanishing_sum_check(CsVector(3, (3, 0, 0)))
    assert vanishing_sum_check(CsVector(4, (2, 0, 2, 0)))
    assert not vanishing_sum_check(CsVector(4, (2, 1, 0, 1)))  # 2 + i - i = 2
    assert vanishing_sum_check(CsVector(6, (1, 0, 1, 0, 1, 0)))
    with pytest.raises(ValueError):
        CsVector(3, (1, -1, 1))
    with pytest.raises(DimensionMismatchError):
        CsVector(3, (1, 1))

def test_cyclotomic_value():
    assert CyclotomicValue(3, (1, 1, 1)).is_zero()
    assert CyclotomicValue(3, (3, 0, 0), denominator=3).is_one()
    assert CyclotomicValue(5, (2, 0, 0, 0, 0), denominator=4) == Fraction(1, 2)
    # Same value, different representations: 1 + ω = -ω²
    assert CyclotomicValue(3, (1, 1, 0)) == CyclotomicValue(3, (0, 0, -1))
    assert complex(CyclotomicValue(4, (0, 1, 0, 0))) == pytest.approx(1j)
    with pytest.raises(TypeError):
        hash(CyclotomicValue(3, (1, 0, 0)))

@pytest.mark.parametrize("d", [2, 3, 5, 7, 11, 13])
def test_vanishing_sums_prime(d):
    assert enumerate_vanishing_sums(d) == [CsVector(d, (1,)*d)]

@pytest.mark.parametrize("d", [4, 6, 8, 9, 10, 12])
def test_vanishing_sums_composite(d):
    sols = enumerate_vanishing_sums(d)
    assert len(sols) > 1
    assert CsVector(d, (1,)*d) in sols
    assert all(v.total == d and abs(v.evaluate()) < 1e-9 for v in sols)

def test_vanishing_sums_d4():
    assert [v.c for v in enumerate_vanishing_sums(4)] == [(2, 0, 2, 0), (1, 1, 1, 1), (0, 2, 0, 2)]

def test_vanishing_sums_guard():
    with pytest.raises(ResourceLimitError):
        enumerate_vanishing_sums(14)
