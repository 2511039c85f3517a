"""Tests for Pfaffian evaluation over floats, rationals and polynomial scalars."""

import random
from fractions import Fraction

import numpy as np
import pytest

from genplasma.pfaffian import (
    MAX_ORACLE_ORDER,
    KernelBlock,
    ZetaPolynomial,
    exact_det,
    pfaffian,
    pfaffian_exact,
    pfaffian_oracle,
    quaternion_pfaffian,
    symplectic_unit,
    symplectic_unit_inverse,
    zeta_pfaffian,
)


def random_skew(rng, n, scale=1.0, complex_entries=True):
    a = rng.standard_normal((n, n)) * scale
    if complex_entries:
        a = a + 1j * rng.standard_normal((n, n)) * scale
    return a - a.T


def random_skew_fractions(rng, n, bound=40):
    a = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = Fraction(rng.randint(-bound, bound), rng.randint(1, 20))
            a[i][j] = v
            a[j][i] = -v
    return a


def skew_from_upper(upper):
    # upper = (a12, a13, a14, a23, a24, a34) for the 4x4 case
    a = np.zeros((4, 4))
    (a[0, 1], a[0, 2], a[0, 3], a[1, 2], a[1, 3], a[2, 3]) = upper
    return a - a.T


def test_pfaffian_two_by_two_definition():
    a = np.array([[0.0, 3.7], [-3.7, 0.0]])
    assert pfaffian(a) == pytest.approx(3.7)


def test_pfaffian_empty_matrix_is_one():
    assert pfaffian(np.zeros((0, 0))) == 1.0 + 0j
    assert pfaffian_exact([]) == Fraction(1)
    assert pfaffian_oracle([]) == 1


def test_pfaffian_4x4_frozen_example():
    # Combinatorial expansion a12*a34 - a13*a24 + a14*a23
    # = 1*25 - 8*32 + 27*9 = 12.
    a = skew_from_upper((1.0, 8.0, 27.0, 9.0, 32.0, 25.0))
    assert pfaffian(a) == pytest.approx(12.0)
    assert pfaffian_oracle(a) == pytest.approx(12.0)


def test_pfaffian_rejects_odd_order_and_non_skew():
    with pytest.raises(ValueError):
        pfaffian(np.zeros((3, 3)))
    bad = np.array([[0.0, 1.0], [-1.0, 1e-3]])
    with pytest.raises(ValueError):
        pfaffian(bad)


def test_pfaffian_of_block_diagonal_J_is_one():
    # J has 2x2 blocks [[0, 1], [-1, 0]] down the diagonal.
    for k in (1, 2, 3, 5):
        j = symplectic_unit_inverse(k)
        assert pfaffian(j) == pytest.approx(1.0)
        assert pfaffian(symplectic_unit(k)) == pytest.approx((-1.0) ** k)


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_pfaffian_squared_is_determinant_floats(n):
    rng = np.random.default_rng(17 + n)
    for _ in range(5):
        a = random_skew(rng, n)
        pf = pfaffian(a)
        det = np.linalg.det(a)
        assert abs(pf * pf - det) <= 1e-8 * max(abs(det), 1.0)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_pfaffian_squared_is_determinant_exact(n):
    rng = random.Random(5 + n)
    for _ in range(5):
        a = random_skew_fractions(rng, n)
        pf = pfaffian_exact(a)
        assert pf * pf == exact_det(a)


def test_oracle_matches_exact_determinant_on_random_rational_6x6():
    rng = random.Random(11)
    a = random_skew_fractions(rng, 6)
    pf = pfaffian_oracle(a)
    assert pf * pf == exact_det(a)
    assert pf == pfaffian_exact(a)


def test_oracle_agrees_with_float_pfaffian_8x8():
    rng = np.random.default_rng(23)
    a = random_skew(rng, 8)
    pf_fast = pfaffian(a)
    pf_slow = pfaffian_oracle(a)
    assert abs(pf_fast - pf_slow) <= 1e-10 * abs(pf_slow)


def test_oracle_rejects_large_orders():
    n = MAX_ORACLE_ORDER + 2
    a = np.zeros((n, n))
    with pytest.raises(ValueError, match=str(MAX_ORACLE_ORDER)):
        pfaffian_oracle(a)


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_congruence_transform_scales_by_determinant(n):
    rng = random.Random(100 + n)
    a = random_skew_fractions(rng, n, bound=8)
    b = [
        [Fraction(rng.randint(-4, 4), rng.randint(1, 4)) for _ in range(n)]
        for _ in range(n)
    ]
    bab = [
        [
            sum(b[i][k] * a[k][l] * b[j][l] for k in range(n) for l in range(n))
            for j in range(n)
        ]
        for i in range(n)
    ]
    assert pfaffian_exact(bab) == exact_det(b) * pfaffian_exact(a)


def test_zeta_polynomial_arithmetic():
    p = ZetaPolynomial([1, 2])
    q = ZetaPolynomial([0, 0, 3])
    assert (p + q).coeffs.tolist() == [1, 2, 3]
    assert (p * q).degree == 3
    assert p(2.0) == pytest.approx(5.0)
    assert ZetaPolynomial([0, 0, 0]).degree == -1
    assert (p - p).degree == -1


def test_zeta_pfaffian_direct_sum_of_zeta_blocks():
    zeta = ZetaPolynomial([0, 1])
    for nblocks in (1, 2, 3):
        n = 2 * nblocks
        entries = [[ZetaPolynomial() for _ in range(n)] for _ in range(n)]
        for t in range(nblocks):
            entries[2 * t][2 * t + 1] = zeta
            entries[2 * t + 1][2 * t] = -zeta
        poly = zeta_pfaffian(entries, 1)
        expected = [0.0] * nblocks + [1.0]
        assert poly.isclose(ZetaPolynomial(expected))


def test_zeta_pfaffian_matches_symbolic_oracle_4x4():
    rng = np.random.default_rng(3)
    c0 = random_skew(rng, 4, complex_entries=False)
    c1 = random_skew(rng, 4, complex_entries=False)
    entries = [
        [ZetaPolynomial([c0[i, j], c1[i, j]]) for j in range(4)] for i in range(4)
    ]
    poly = zeta_pfaffian(entries, 1)
    sym = pfaffian_oracle(entries)
    assert poly.isclose(sym)


def test_zeta_pfaffian_evaluation_consistency():
    rng = np.random.default_rng(7)
    stacks = np.stack([random_skew(rng, 6) for _ in range(3)])
    poly = zeta_pfaffian(stacks, 2)
    for z in (0.0, 0.5, -1.3, 2.0):
        mat = stacks[0] + z * stacks[1] + z * z * stacks[2]
        direct = pfaffian(mat)
        assert abs(poly(z) - direct) <= 1e-9 * max(abs(direct), 1.0)


def test_zeta_pfaffian_flags_degree_bound_violation():
    rng = np.random.default_rng(9)
    stacks = np.stack([random_skew(rng, 4) for _ in range(3)])
    with pytest.raises(ValueError):
        zeta_pfaffian(stacks, 1)


def test_quaternion_pfaffian_scalar_block():
    rho = 0.8
    block = KernelBlock(S=rho, D=0.0, Itilde=0.0, Sswap=rho)
    assert quaternion_pfaffian([[block]]) == pytest.approx(rho)


def test_quaternion_pfaffian_sine_kernel_reduces_to_determinant():
    # With D = Itilde = 0 the 2x2-block Pfaffian must equal det of the S grid.
    def sine(x, y):
        return np.sinc(x - y)

    pts = [0.0, 0.37]
    blocks = [
        [
            KernelBlock(
                S=sine(a, b), D=0.0, Itilde=0.0, Sswap=sine(b, a)
            )
            for b in pts
        ]
        for a in pts
    ]
    expected = np.linalg.det(np.array([[sine(a, b) for b in pts] for a in pts]))
    assert quaternion_pfaffian(blocks) == pytest.approx(expected)


def test_quaternion_pfaffian_rejects_antisymmetry_defect():
    good = KernelBlock(S=1.0, D=0.1, Itilde=0.2, Sswap=1.0)
    bad = KernelBlock(S=1.0, D=0.3, Itilde=0.2, Sswap=2.0)  # Sswap mismatch
    blocks = [[KernelBlock(1.0, 0.0, 0.0, 1.0), good], [bad, KernelBlock(1.0, 0.0, 0.0, 1.0)]]
    with pytest.raises(ValueError, match="antisym"):
        quaternion_pfaffian(blocks)
