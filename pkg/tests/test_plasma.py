"""Tests for the finite-N plasma model: weight, normalization, Gram data,
partition function and skew-orthogonal structure."""

import math

import numpy as np
import pytest

from genplasma.pfaffian import ZetaPolynomial
from genplasma.plasma import (
    TWO_PI,
    PlasmaConfig,
    Weight,
    config_from_json,
    default_node_count,
    gram_a_uniform,
    gram_b_uniform,
    gram_matrices,
    log_boltzmann_weight,
    normalization,
    partition_function,
    phi_transform,
    phi_transform_quadrature,
    required_node_count,
    skew_permutation,
    skew_structure,
)


def brute_force_z(cfg, u, v, m=40):
    """Direct tensor-grid quadrature of the generalized partition function."""
    theta, w = TWO_PI * np.arange(m) / m, TWO_PI / m
    axes = [theta] * (cfg.n1 + cfg.n2)
    grids = np.meshgrid(*axes, indexing="ij") if axes else []
    weight = np.ones([m] * (cfg.n1 + cfg.n2))
    n1 = cfg.n1
    for i in range(n1):
        for j in range(i + 1, n1):
            weight = weight * (2 - 2 * np.cos(grids[i] - grids[j]))
    for a in range(n1, n1 + cfg.n2):
        for b in range(a + 1, n1 + cfg.n2):
            weight = weight * (2 - 2 * np.cos(grids[a] - grids[b])) ** 2
    for i in range(n1):
        for a in range(n1, n1 + cfg.n2):
            weight = weight * (2 - 2 * np.cos(grids[i] - grids[a]))
    for i in range(n1):
        weight = weight * u(grids[i])
    for a in range(n1, n1 + cfg.n2):
        weight = weight * v(grids[a])
    total = weight.sum() * w ** (cfg.n1 + cfg.n2)
    return total / normalization(cfg.n1, cfg.n2)


def test_log_weight_two_romans_opposite():
    cfg = PlasmaConfig(2, 0)
    assert log_boltzmann_weight([0.0, math.pi], []) == pytest.approx(math.log(4.0))
    assert cfg.order == 2


def test_log_weight_single_greek_is_zero():
    assert log_boltzmann_weight([], [1.234]) == 0.0


def test_log_weight_coincidence_is_minus_infinity():
    assert log_boltzmann_weight([0.3, 0.3], []) == -math.inf


def test_config_rejects_odd_n1():
    with pytest.raises(ValueError, match="even"):
        PlasmaConfig(1, 1)
    with pytest.raises(ValueError):
        PlasmaConfig(0, 0)


def test_normalization_small_cases():
    assert normalization(0, 1) == pytest.approx(TWO_PI)
    assert normalization(2, 0) == pytest.approx(2 * TWO_PI**2)
    assert normalization(2, 1) == pytest.approx(48 * math.pi**3)


def test_normalization_2_1_against_triple_quadrature():
    # C is the integral of the bare weight; quadrature of the weight over
    # the 3-torus must reproduce it exactly (trigonometric polynomial).
    cfg = PlasmaConfig(2, 1)
    one = Weight.uniform()
    z = brute_force_z(cfg, one, one, m=24)
    # brute_force_z divides by C, so Z must be 1 when C is correct
    assert z == pytest.approx(1.0, rel=1e-12)


def test_normalization_rejects_odd():
    with pytest.raises(ValueError):
        normalization(3, 0)


def test_gram_uniform_closed_forms():
    for n1, n2 in [(2, 0), (2, 1), (4, 1), (0, 2), (4, 2)]:
        cfg = PlasmaConfig(n1, n2)
        g = gram_matrices(cfg)
        n = cfg.order
        scale = TWO_PI**2
        for j in range(1, n + 1):
            for k in range(1, n + 1):
                assert abs(g.a[j - 1, k - 1] - gram_a_uniform(cfg, j, k)) <= 1e-13 * scale
                assert abs(g.b[j - 1, k - 1] - gram_b_uniform(cfg, j, k)) <= 1e-13 * scale


def test_gram_antisymmetry_exact():
    cfg = PlasmaConfig(4, 2)
    u = Weight(1.0, cos=(0.5, 0.2), sin=(0.1,))
    v = Weight(1.0, cos=(-0.3,))
    g = gram_matrices(cfg, u=u, v=v)
    assert np.array_equal(g.a, -g.a.T)
    assert np.array_equal(g.b, -g.b.T)


def test_gram_node_count_validation():
    cfg = PlasmaConfig(2, 1)
    with pytest.raises(ValueError, match="need >="):
        gram_matrices(cfg, m=4)
    assert required_node_count(cfg, 0) == 2 * cfg.order + 2
    assert default_node_count(cfg) > required_node_count(cfg)


def test_gram_a_with_weight_against_dense_oracle():
    # Dense 2D quadrature with half-step-offset nodes for the inner variable
    # keeps the (removable) singularity away while staying exact.
    cfg = PlasmaConfig(2, 1)
    u = Weight(1.0, cos=(1.0,))
    g = gram_matrices(cfg, u=u)
    m = 96
    t1 = TWO_PI * np.arange(m) / m
    t2 = TWO_PI * (np.arange(m) + 0.31) / m
    z1 = np.exp(1j * t1)[:, None]
    z2 = np.exp(1j * t2)[None, :]
    a = cfg.n1 // 2
    kern = (z2**-a - z1**-a) ** 2 / (z2**-1 - z1**-1)
    for j, k in [(1, 4), (2, 3), (3, 2), (1, 2), (4, 2)]:
        integrand = (
            u(t1)[:, None]
            * u(t2)[None, :]
            * z1**-cfg.n2
            * z2**-cfg.n2
            * kern
            * z1 ** (j - 1)
            * z2 ** (k - 1)
        )
        val = integrand.sum() * (TWO_PI / m) ** 2
        assert abs(g.a[j - 1, k - 1] - val) <= 1e-12 * TWO_PI**2


@pytest.mark.parametrize("n1,n2", [(2, 1), (4, 2)])
def test_partition_function_uniform_is_one(n1, n2):
    assert partition_function(PlasmaConfig(n1, n2)) == pytest.approx(1.0, rel=1e-12)


def test_partition_function_weighted_against_brute_force():
    cfg = PlasmaConfig(2, 1)
    u = Weight(1.0, cos=(0.5,))
    z = partition_function(cfg, u=u)
    z_direct = brute_force_z(cfg, u, Weight.uniform(), m=24)
    assert z == pytest.approx(z_direct, rel=1e-8)


def test_partition_function_rotation_invariance():
    cfg = PlasmaConfig(2, 1)
    u = Weight(1.2, cos=(0.4, 0.1), sin=(0.2,))
    v = Weight(1.0, cos=(0.3,), sin=(-0.2,))
    alpha = 1.0471975511965976
    z0 = partition_function(cfg, u=u, v=v)
    z1 = partition_function(cfg, u=u.rotated(alpha), v=v.rotated(alpha))
    assert z1 == pytest.approx(z0, rel=1e-10)


def test_zeta_coefficient_reproduces_block_product():
    # For (2,1) the pencil Pfaffian is (6 pi) * ((2 pi)^2 zeta + 2 pi);
    # its zeta coefficient is the product-formula normalizer.
    cfg = PlasmaConfig(2, 1)
    g = gram_matrices(cfg)
    from genplasma.pfaffian import zeta_pfaffian

    poly = zeta_pfaffian(np.stack([g.b, g.a]), 1)
    assert poly.coefficient(1) == pytest.approx(6 * math.pi * TWO_PI**2, rel=1e-12)
    assert poly.coefficient(0) == pytest.approx(6 * math.pi * TWO_PI, rel=1e-12)


def test_skew_permutation_2_1():
    assert skew_permutation(PlasmaConfig(2, 1)) == (2, 3, 1, 4)


def test_skew_structure_examples():
    s = skew_structure(PlasmaConfig(2, 1))
    assert s.normalizations[0].isclose(ZetaPolynomial([TWO_PI, TWO_PI**2]))
    assert s.normalizations[1].isclose(ZetaPolynomial([6 * math.pi]))

    s20 = skew_structure(PlasmaConfig(2, 0))
    assert s20.normalizations[0].isclose(ZetaPolynomial([TWO_PI, TWO_PI**2]))

    s02 = skew_structure(PlasmaConfig(0, 2))
    assert s02.normalizations[0].isclose(ZetaPolynomial([6 * math.pi]))
    assert s02.normalizations[1].isclose(ZetaPolynomial([TWO_PI]))


def test_skew_structure_full_sweep_exact():
    for n1 in range(0, 11, 2):
        for n2 in range(0, (10 - n1) // 2 + 1):
            if n1 + n2 < 1:
                continue
            skew_structure(PlasmaConfig(n1, n2))  # raises on any defect


def test_phi_transform_against_quadrature():
    cfg = PlasmaConfig(2, 1)
    z = np.exp(0.7j)
    for j in range(cfg.order):
        closed = phi_transform(cfg, j, z)
        quad = phi_transform_quadrature(cfg, j, z)
        assert abs(closed - quad) <= 1e-12 * TWO_PI


def test_phi_transform_examples():
    cfg = PlasmaConfig(2, 1)
    assert phi_transform(cfg, 0, 1.0) == 0
    assert phi_transform(cfg, 3, 1.0) == 0
    assert phi_transform(cfg, 1, 1.0 + 0j) == pytest.approx(TWO_PI)
    # band edge j = n2 + n1 - 1 flips sign
    assert phi_transform(cfg, 2, 1.0 + 0j) == pytest.approx(-TWO_PI)


def test_phi_transform_band_edges_larger_case():
    cfg = PlasmaConfig(4, 2)
    z = np.exp(0.3j)
    for j in range(cfg.order):
        closed = phi_transform(cfg, j, z)
        quad = phi_transform_quadrature(cfg, j, z)
        assert abs(closed - quad) <= 1e-12 * TWO_PI


def test_config_from_json_round_trip():
    cfg, u, v = config_from_json(
        {"N1": 2, "N2": 1, "u": {"kind": "fourier", "const": 1.0, "cos": [0.5]}}
    )
    assert cfg == PlasmaConfig(2, 1)
    assert u.degree == 1 and v.degree == 0
    assert u.to_json()["cos"] == [0.5]
