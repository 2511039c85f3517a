"""Metropolis sampling of the plasma density for statistical validation.

Single-angle random-walk Metropolis on the torus, with independent seeded
chains and per-species step sizes auto-tuned during burn-in towards an
acceptance rate inside [0.2, 0.6] (the charge-2 species repels more strongly
and wants smaller moves).  Given the seed the sample stream is
bit-reproducible: chains draw from generators spawned off one SeedSequence
and are merged in chain order.

Validation happens through pair-separation histograms: the expected number
of ordered (s1, s2) pairs per configuration with separation in a bin is the
integral of 2*pi*rho_(s1,s2)(0, s) over the bin (rotation invariance), which
is compared against the exact finite-N correlation with batch-means error
bars.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .finite import correlation
from .plasma import TWO_PI

__all__ = [
    "MCSamples",
    "metropolis_sample",
    "pair_separation_counts",
    "binned_pair_density",
    "reference_pair_density",
    "write_samples_csv",
    "write_histogram_csv",
]

ACCEPTANCE_BAND = (0.2, 0.6)


@dataclass
class MCSamples:
    """Thinned Metropolis samples with bookkeeping for error analysis."""

    samples: np.ndarray  # (kept, n1 + n2) angles
    chain_ids: np.ndarray  # (kept,) chain index per sample
    steps_kept: np.ndarray  # (kept,) post-burn-in step index of each sample
    n1: int
    n2: int
    seed: int
    thin: int
    acceptance: list  # per chain: {"R": rate, "G": rate}
    step_sizes: list  # per chain: {"R": step, "G": step}


def _half_exponent_rows(n1, n2):
    """Row i: pair couplings/2 against every other particle (0 on the diagonal)."""
    n = n1 + n2
    rows = np.ones((n, n))
    rows[n1:, n1:] = 2.0
    np.fill_diagonal(rows, 0.0)
    return rows


def _run_chain(cfg, rng, steps, burn_in, thin, step_theta, step_phi, tune,
               force_uniform):
    n1, n2 = cfg.n1, cfg.n2
    n = n1 + n2
    rows = _half_exponent_rows(n1, n2)
    angles = rng.uniform(0.0, TWO_PI, n)
    steps_by_species = {"R": step_theta, "G": step_phi}
    species_of = ["R"] * n1 + ["G"] * n2

    def log_terms(i, value):
        d = value - angles
        d[i] = math.pi  # dummy; weight row is zero there
        with np.errstate(divide="ignore"):
            return float(np.dot(rows[i], np.log(2.0 - 2.0 * np.cos(d))))

    def attempt(i, count=None):
        sp = species_of[i]
        old = angles[i]
        new = (old + steps_by_species[sp] * (2.0 * rng.random() - 1.0)) % TWO_PI
        if force_uniform:
            delta = 0.0
        else:
            delta = log_terms(i, new) - log_terms(i, old)
        if delta >= 0.0 or math.log(rng.random()) < delta:
            angles[i] = new
            if count is not None:
                count[sp] += 1
            return True
        return False

    # burn-in with step tuning
    tune_interval = 250
    proposals = {"R": 0, "G": 0}
    accepts = {"R": 0, "G": 0}
    for step in range(burn_in):
        i = step % n
        sp = species_of[i]
        proposals[sp] += 1
        if attempt(i):
            accepts[sp] += 1
        if tune and proposals[sp] == tune_interval:
            rate = accepts[sp] / proposals[sp]
            if rate > ACCEPTANCE_BAND[1]:
                steps_by_species[sp] = min(steps_by_species[sp] * 1.25, math.pi)
            elif rate < ACCEPTANCE_BAND[0]:
                steps_by_species[sp] = max(steps_by_species[sp] / 1.25, 1e-3)
            proposals[sp] = 0
            accepts[sp] = 0

    kept = []
    kept_steps = []
    accepted = {"R": 0, "G": 0}
    totals = {"R": 0, "G": 0}
    for step in range(steps):
        i = step % n
        totals[species_of[i]] += 1
        attempt(i, accepted)
        if (step + 1) % thin == 0:
            kept.append(angles.copy())
            kept_steps.append(step + 1)
    rates = {
        sp: (accepted[sp] / totals[sp]) if totals[sp] else float("nan")
        for sp in ("R", "G")
    }
    return np.array(kept), np.array(kept_steps), rates, dict(steps_by_species)


def metropolis_sample(
    cfg,
    chains=4,
    steps=200_000,
    burn_in=20_000,
    seed=0,
    thin=None,
    step_theta=0.6,
    step_phi=0.4,
    tune=True,
    force_uniform=False,
):
    """Sample the plasma density; ``steps`` counts post-burn-in attempts per chain.

    Returns an :class:`MCSamples` with one thinned configuration every
    ``thin`` attempts (default: one sweep, n1+n2 attempts).  A post-tuning
    acceptance rate outside [0.2, 0.6] for a species emits a warning with
    the diagnostics rather than failing.
    """
    if chains < 1 or steps < 1 or burn_in < 0:
        raise ValueError("chains and steps must be positive")
    if step_theta <= 0 or step_phi <= 0:
        raise ValueError("step sizes must be positive")
    n = cfg.n1 + cfg.n2
    if thin is None:
        thin = n
    seq = np.random.SeedSequence(seed)
    all_samples = []
    all_ids = []
    all_steps = []
    acceptance = []
    final_steps = []
    for chain, child in enumerate(seq.spawn(chains)):
        rng = np.random.Generator(np.random.PCG64(child))
        samples, kept_steps, rates, sizes = _run_chain(
            cfg, rng, steps, burn_in, thin, step_theta, step_phi, tune,
            force_uniform,
        )
        all_samples.append(samples)
        all_ids.append(np.full(len(samples), chain))
        all_steps.append(kept_steps)
        acceptance.append(rates)
        final_steps.append(sizes)
        for sp in ("R", "G"):
            rate = rates[sp]
            if not math.isnan(rate) and not force_uniform and not (
                ACCEPTANCE_BAND[0] <= rate <= ACCEPTANCE_BAND[1]
            ):
                warnings.warn(
                    f"chain {chain} species {sp}: acceptance {rate:.3f} outside "
                    f"{ACCEPTANCE_BAND} (step {sizes[sp]:.4f})",
                    stacklevel=2,
                )
    return MCSamples(
        samples=np.concatenate(all_samples),
        chain_ids=np.concatenate(all_ids),
        steps_kept=np.concatenate(all_steps),
        n1=cfg.n1,
        n2=cfg.n2,
        seed=seed,
        thin=thin,
        acceptance=acceptance,
        step_sizes=final_steps,
    )


def pair_separation_counts(mc, pair, bin_edges):
    """Per-sample histogram of ordered pair separations, shape (kept, bins).

    ``pair`` selects the ordered species pair: "rr", "gg" or "rg" (first
    species fixed conceptually at the origin; separations are measured from
    the first to the second coordinate, mod 2*pi).
    """
    thetas = mc.samples[:, : mc.n1]
    phis = mc.samples[:, mc.n1 :]
    if pair == "rr":
        a, b = thetas, thetas
        same = True
    elif pair == "gg":
        a, b = phis, phis
        same = True
    elif pair == "rg":
        a, b = thetas, phis
        same = False
    else:
        raise ValueError("pair must be 'rr', 'gg' or 'rg'")
    if a.shape[1] == 0 or b.shape[1] == 0 or (same and a.shape[1] < 2):
        raise ValueError(f"not enough particles for pair {pair!r}")
    seps = (b[:, None, :] - a[:, :, None]) % TWO_PI
    if same:
        m = a.shape[1]
        off = ~np.eye(m, dtype=bool)
        seps = seps[:, off]
    else:
        seps = seps.reshape(len(seps), -1)
    counts = np.stack(
        [np.histogram(row, bins=bin_edges)[0] for row in seps]
    ).astype(float)
    return counts


def binned_pair_density(mc, pair, bins=20, batches=20):
    """Estimate of rho_(pair)(0, s) per bin with batch-means errors.

    The per-configuration expected count in a bin is
    2*pi*rho(0, s_mid)*bin_width, so the density estimate divides the mean
    count accordingly.  Returns (bin_edges, density, sigma).
    """
    bin_edges = np.linspace(0.0, TWO_PI, bins + 1)
    counts = pair_separation_counts(mc, pair, bin_edges)
    width = bin_edges[1] - bin_edges[0]
    scale = 1.0 / (TWO_PI * width)
    density = counts.mean(axis=0) * scale
    # contiguous batches within each chain keep autocorrelation intact
    batch_means = []
    for chain in np.unique(mc.chain_ids):
        rows = counts[mc.chain_ids == chain]
        per_chain = max(1, len(rows) // max(1, batches // len(np.unique(mc.chain_ids))))
        nb = len(rows) // per_chain
        for b in range(nb):
            batch_means.append(rows[b * per_chain : (b + 1) * per_chain].mean(axis=0))
    batch_means = np.array(batch_means) * scale
    nb = len(batch_means)
    if nb < 2:
        raise ValueError("not enough samples for batch-means errors")
    sigma = batch_means.std(axis=0, ddof=1) / math.sqrt(nb)
    return bin_edges, density, sigma


def reference_pair_density(cfg, pair, bin_edges, nodes_per_bin=9):
    """Bin-averaged exact finite-N pair correlation rho_(pair)(0, s).

    Uses Gauss-Legendre nodes inside each bin so the comparison with the
    histogram (a bin average) carries no midpoint bias.
    """
    x, w = np.polynomial.legendre.leggauss(nodes_per_bin)
    out = np.empty(len(bin_edges) - 1)
    for b in range(len(out)):
        lo, hi = bin_edges[b], bin_edges[b + 1]
        mid = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
        if pair == "rr":
            vals = [correlation(2, 0, [0.0, s], [], cfg) for s in mid]
        elif pair == "gg":
            vals = [correlation(0, 2, [], [0.0, s], cfg) for s in mid]
        elif pair == "rg":
            vals = [correlation(1, 1, [0.0], [s], cfg) for s in mid]
        else:
            raise ValueError("pair must be 'rr', 'gg' or 'rg'")
        out[b] = 0.5 * float(np.dot(w, vals))  # mean over the bin
    return out


def write_samples_csv(mc, fileobj):
    """Dump samples as CSV: chain, step, then one angle column per particle."""
    cols = [f"theta_{i}" for i in range(mc.n1)] + [f"phi_{a}" for a in range(mc.n2)]
    fileobj.write("chain,step," + ",".join(cols) + "\n")
    for cid, step, row in zip(mc.chain_ids, mc.steps_kept, mc.samples):
        vals = ",".join(f"{v:.17g}" for v in row)
        fileobj.write(f"{cid},{step},{vals}\n")


def write_histogram_csv(bin_edges, density, sigma, reference, fileobj):
    fileobj.write("bin_lo,bin_hi,density,sigma,reference\n")
    for b in range(len(density)):
        fileobj.write(
            f"{bin_edges[b]:.17g},{bin_edges[b + 1]:.17g},"
            f"{density[b]:.17g},{sigma[b]:.17g},{reference[b]:.17g}\n"
        )
