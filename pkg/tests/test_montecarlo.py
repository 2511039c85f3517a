"""Tests for the Metropolis sampler and its histogram validation tools."""

import io
import math

import numpy as np
import pytest
from scipy.stats import kstest

from genplasma.montecarlo import (
    binned_pair_density,
    metropolis_sample,
    pair_separation_counts,
    reference_pair_density,
    write_histogram_csv,
    write_samples_csv,
)
from genplasma.plasma import TWO_PI, PlasmaConfig


@pytest.mark.filterwarnings("ignore:chain .* acceptance")
def test_two_roman_separation_histogram_matches_one_minus_cos():
    # For (2,0) the pair-separation density is (2 - 2 cos s)/(2 pi)^2.
    cfg = PlasmaConfig(2, 0)
    mc = metropolis_sample(cfg, chains=4, steps=40_000, burn_in=5_000, seed=3)
    edges, est, sig = binned_pair_density(mc, "rr", bins=20)
    mids = 0.5 * (edges[:-1] + edges[1:])
    width = edges[1] - edges[0]
    # bin-averaged target
    target = (2.0 - 2.0 * np.cos(mids) * np.sinc(width / 2 / math.pi)) / TWO_PI**2
    z = np.abs(est - target) / sig
    assert (z < 3.0).sum() >= 18


def test_mixed_pair_histogram_matches_exact_finite_n():
    cfg = PlasmaConfig(4, 2)
    mc = metropolis_sample(cfg, chains=4, steps=50_000, burn_in=6_000, seed=11)
    edges, est, sig = binned_pair_density(mc, "rg", bins=20)
    ref = reference_pair_density(cfg, "rg", edges)
    z = np.abs(est - ref) / sig
    assert (z < 3.0).sum() >= 18


def test_uniform_target_sanity_ks():
    cfg = PlasmaConfig(2, 1)
    mc = metropolis_sample(
        cfg, chains=2, steps=30_000, burn_in=2_000, seed=5, force_uniform=True,
        thin=60,
    )
    pooled = (mc.samples.ravel() / TWO_PI) % 1.0
    assert kstest(pooled, "uniform").pvalue > 0.01


@pytest.mark.filterwarnings("ignore:chain .* acceptance")
def test_seed_reproducibility_bit_identical():
    cfg = PlasmaConfig(2, 1)
    a = metropolis_sample(cfg, chains=3, steps=5_000, burn_in=500, seed=42)
    b = metropolis_sample(cfg, chains=3, steps=5_000, burn_in=500, seed=42)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.chain_ids, b.chain_ids)
    c = metropolis_sample(cfg, chains=3, steps=5_000, burn_in=500, seed=43)
    assert not np.array_equal(a.samples, c.samples)


def test_acceptance_rates_tuned_into_band():
    cfg = PlasmaConfig(4, 2)
    mc = metropolis_sample(cfg, chains=2, steps=30_000, burn_in=6_000, seed=9)
    for rates in mc.acceptance:
        assert 0.2 <= rates["R"] <= 0.6
        assert 0.2 <= rates["G"] <= 0.6


def test_acceptance_warning_when_not_tuned():
    cfg = PlasmaConfig(4, 2)
    with pytest.warns(UserWarning, match="acceptance"):
        metropolis_sample(
            cfg, chains=1, steps=4_000, burn_in=0, seed=1, tune=False,
            step_theta=1e-3, step_phi=1e-3,
        )


@pytest.mark.filterwarnings("ignore:chain .* acceptance")
def test_invalid_arguments_rejected():
    cfg = PlasmaConfig(2, 0)
    with pytest.raises(ValueError):
        metropolis_sample(cfg, chains=0)
    with pytest.raises(ValueError):
        metropolis_sample(cfg, step_theta=-1.0)
    mc = metropolis_sample(cfg, chains=1, steps=100, burn_in=0, seed=0)
    with pytest.raises(ValueError):
        pair_separation_counts(mc, "gg", np.linspace(0, TWO_PI, 5))


@pytest.mark.filterwarnings("ignore:chain .* acceptance")
def test_sample_and_histogram_csv_layout():
    cfg = PlasmaConfig(2, 1)
    mc = metropolis_sample(cfg, chains=1, steps=30, burn_in=0, seed=0, thin=3)
    buf = io.StringIO()
    write_samples_csv(mc, buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "chain,step,theta_0,theta_1,phi_0"
    assert len(lines) == 1 + len(mc.samples)

    buf2 = io.StringIO()
    edges = np.linspace(0, TWO_PI, 4)
    write_histogram_csv(edges, [1.0, 2.0, 3.0], [0.1, 0.1, 0.1], [1.1, 2.1, 3.1], buf2)
    assert buf2.getvalue().splitlines()[0] == "bin_lo,bin_hi,density,sigma,reference"
