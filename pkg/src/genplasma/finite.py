"""Finite-N correlation functions of the generalized plasma in Pfaffian form.

The (k1, k2)-point correlation of the plasma with n1 charge-1 (R) and n2
charge-2 (G) particles is a Pfaffian of a 2(k1+k2) matrix assembled from
2x2 species-pair kernel blocks.  The kernels are finite sums over the
skew-orthogonal pairs of the monomial basis; each pair contributes monomial
terms z^p w^q whose coefficients may carry one power of the formal variable
that tags the R-R interaction in the underlying Pfaffian partition function.

Two evaluation modes are provided:

* ``limit`` (the production path): every kernel entry is replaced by its
  value as the formal variable grows without bound.  The R-R pair
  normalizations are linear in that variable, so surviving terms are those
  whose numerator carries exactly one power of it, while the I-tilde R-R
  entry has an exact cancellation leaving a finite weighted sum.
* ``zeta`` (the cross-check route): entries keep an explicit numeric value
  of the formal variable.  :func:`correlation_zeta_route` reconstructs the
  correlation from the coefficient extraction applied to the product of the
  pair normalizations and the Pfaffian, which must agree with the limit
  form.

All conventions here are pinned by two independent validations: exact
agreement with brute-force marginal integration of the density
(:mod:`genplasma.oracle`) and the block skew-diagonalization checked in
:mod:`genplasma.plasma`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pfaffian import KernelBlock, quaternion_pfaffian
from .plasma import TWO_PI, PlasmaConfig, pair_normalizations

__all__ = [
    "BasisFunctions",
    "basis_functions",
    "kernel_entries",
    "correlation",
    "correlation_zeta_route",
    "write_correlation_csv",
]

FOUR_PI_SQ = TWO_PI**2


@dataclass(frozen=True)
class BasisFunctions:
    """Coefficient/exponent tables of the paired basis and its transforms.

    Arrays are indexed by (pair, slot) with slot 0/1 the even/odd member of
    the skew pair.  ``eps_r`` coefficients are understood to carry one power
    of the formal variable (``zdeg`` one); everything else is variable free.
    ``r_alpha``/``r_beta`` give the pair normalization
    r_t = alpha*(2pi)^2*zeta + beta*2pi.
    """

    n_pairs: int
    roman: np.ndarray  # bool mask, True for pairs tied to the R-R coupling
    psi_r_coef: np.ndarray
    psi_r_exp: np.ndarray
    psi_g_coef: np.ndarray
    psi_g_exp: np.ndarray
    eps_r_coef: np.ndarray
    eps_r_exp: np.ndarray
    eps_g_coef: np.ndarray
    eps_g_exp: np.ndarray
    r_alpha: np.ndarray
    r_beta: np.ndarray


def basis_functions(cfg):
    """Build the per-pair tables for a plasma configuration."""
    h = cfg.n1 // 2
    n1, n2 = cfg.n1, cfg.n2
    p = h + n2
    roman = np.zeros(p, dtype=bool)
    roman[:h] = True

    psi_r_coef = np.ones((p, 2))
    psi_g_coef = np.ones((p, 2))
    psi_r_exp = np.zeros((p, 2), dtype=int)
    psi_g_exp = np.zeros((p, 2), dtype=int)
    eps_r_coef = np.zeros((p, 2))
    eps_r_exp = np.zeros((p, 2), dtype=int)
    eps_g_coef = np.zeros((p, 2))
    eps_g_exp = np.zeros((p, 2), dtype=int)
    r_alpha = np.zeros(p)
    r_beta = np.zeros(p)

    for t in range(h):
        psi_r_exp[t] = (t, n1 - 1 - t)
        psi_g_exp[t] = (t + 1 - h, h - t)
        eps_r_coef[t] = (-math.pi, math.pi)
        eps_r_exp[t] = (t + 1 - n1, -t)
        eps_g_coef[t] = ((t + 1 - h) / 2.0, (h - t) / 2.0)
        eps_g_exp[t] = (t - h, h - t - 1)
        r_alpha[t] = 1.0
        r_beta[t] = n1 - 1 - 2 * t
    for t in range(h, p):
        psi_r_exp[t] = (t - h - n2, n2 + 3 * h - t - 1)
        psi_g_exp[t] = (t + 1 - n1 - n2, n1 + n2 - t)
        eps_g_coef[t] = ((t + 1 - n1 - n2) / 2.0, (n1 + n2 - t) / 2.0)
        eps_g_exp[t] = (t - n1 - n2, n1 + n2 - t - 1)
        r_beta[t] = 2 * n2 + 2 * n1 - 1 - 2 * t

    return BasisFunctions(
        n_pairs=p,
        roman=roman,
        psi_r_coef=psi_r_coef,
        psi_r_exp=psi_r_exp,
        psi_g_coef=psi_g_coef,
        psi_g_exp=psi_g_exp,
        eps_r_coef=eps_r_coef,
        eps_r_exp=eps_r_exp,
        eps_g_coef=eps_g_coef,
        eps_g_exp=eps_g_exp,
        r_alpha=r_alpha,
        r_beta=r_beta,
    )


def _table(tables, kind, species):
    if kind == "psi":
        if species == "R":
            return tables.psi_r_coef, tables.psi_r_exp, 0
        return tables.psi_g_coef, tables.psi_g_exp, 0
    if species == "R":
        return tables.eps_r_coef, tables.eps_r_exp, 1
    return tables.eps_g_coef, tables.eps_g_exp, 0


def _pair_weights(tables, zdeg_total, mode, zeta):
    """Per-pair weight of zeta^zdeg / r_t in the requested mode."""
    if mode == "zeta":
        r = FOUR_PI_SQ * tables.r_alpha * zeta + TWO_PI * tables.r_beta
        return zeta**zdeg_total / r
    if mode != "limit":
        raise ValueError(f"unknown mode {mode!r}")
    w = np.zeros(tables.n_pairs)
    if zdeg_total == 1:
        w[tables.roman] = 1.0 / FOUR_PI_SQ
    elif zdeg_total == 0:
        greek = ~tables.roman
        w[greek] = 1.0 / (TWO_PI * tables.r_beta[greek])
    else:
        raise ValueError("quadratic variable power has no finite limit here")
    return w


def _pair_sum(tables, kind_a, s1, kind_b, s2, mu, eta, mode, zeta):
    """2 sum_t w_t [A_{2t}(mu) B_{2t+1}(eta) - A_{2t+1}(mu) B_{2t}(eta)]."""
    coef_a, exp_a, zdeg_a = _table(tables, kind_a, s1)
    coef_b, exp_b, zdeg_b = _table(tables, kind_b, s2)
    w = _pair_weights(tables, zdeg_a + zdeg_b, mode, zeta)
    za = np.exp(1j * mu * exp_a)
    zb = np.exp(1j * eta * exp_b)
    terms = (
        coef_a[:, 0] * za[:, 0] * coef_b[:, 1] * zb[:, 1]
        - coef_a[:, 1] * za[:, 1] * coef_b[:, 0] * zb[:, 0]
    )
    return 2.0 * np.sum(w * terms)


def _itilde_rr(tables, cfg, mu, eta, mode, zeta):
    """I-tilde for the R-R pair, where the variable-quadratic part cancels.

    After the cancellation the sum carries per-pair weights proportional to
    the constant part of the R pair normalizations; in the limit mode these
    become (n1 - 1 - 2t)/(4 pi).
    """
    h = cfg.n1 // 2
    if h == 0:
        return 0j
    t = np.arange(h)
    m = cfg.n1 - 1 - 2 * t
    z1 = np.exp(1j * mu * (t + 1 - cfg.n1)) * np.exp(-1j * eta * t)
    z2 = np.exp(-1j * mu * t) * np.exp(1j * eta * (t + 1 - cfg.n1))
    binomials = z1 - z2
    if mode == "limit":
        return np.sum(m / (2 * TWO_PI) * binomials)
    r = FOUR_PI_SQ * tables.r_alpha[:h] * zeta + TWO_PI * tables.r_beta[:h]
    return np.sum(math.pi * zeta * m / r * binomials)


def kernel_entries(s1, s2, mu, eta, cfg, mode="limit", zeta=None):
    """The 2x2 kernel block K_{s1,s2}(mu, eta) for species labels "R"/"G".

    ``mode`` selects the production limit kernels or the variable-resolved
    ones at a numeric ``zeta``.
    """
    if s1 not in ("R", "G") or s2 not in ("R", "G"):
        raise ValueError("species labels must be 'R' or 'G'")
    if mode == "zeta" and zeta is None:
        raise ValueError("zeta mode requires a numeric zeta")
    tables = basis_functions(cfg)
    s = _pair_sum(tables, "psi", s1, "eps", s2, mu, eta, mode, zeta)
    sswap = _pair_sum(tables, "psi", s2, "eps", s1, eta, mu, mode, zeta)
    d = _pair_sum(tables, "psi", s1, "psi", s2, mu, eta, mode, zeta)
    if s1 == "R" and s2 == "R":
        itilde = _itilde_rr(tables, cfg, mu, eta, mode, zeta)
        if mode == "zeta":
            pass  # cancellation already folded into _itilde_rr
    else:
        itilde = _pair_sum(tables, "eps", s1, "eps", s2, mu, eta, mode, zeta)
    return KernelBlock(S=s, D=d, Itilde=itilde, Sswap=sswap)


def _validate_points(k1, k2, xs, ys, cfg):
    xs = [float(x) % TWO_PI for x in xs]
    ys = [float(y) % TWO_PI for y in ys]
    if len(xs) != k1 or len(ys) != k2:
        raise ValueError("point counts must match (k1, k2)")
    if k1 > cfg.n1 or k2 > cfg.n2:
        raise ValueError("cannot fix more points than particles of a species")
    if k1 + k2 < 1:
        raise ValueError("at least one test point is required")
    for pts in (xs, ys):
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if abs((pts[i] - pts[j] + math.pi) % TWO_PI - math.pi) < 1e-12:
                    raise ValueError("coincident test points within a species")
    return xs, ys


def _assemble_blocks(points, cfg, mode, zeta):
    k = len(points)
    blocks = [[None] * k for _ in range(k)]
    for i, (si, ti) in enumerate(points):
        for j, (sj, tj) in enumerate(points):
            blocks[i][j] = kernel_entries(si, sj, ti, tj, cfg, mode=mode, zeta=zeta)
    return blocks


def correlation(k1, k2, xs, ys, cfg, imag_rtol=1e-8):
    """Finite-N correlation rho_{(k1,k2)} at Roman points xs and Greek points ys.

    Pf of the assembled block matrix times the inverse symplectic unit, using
    the limit kernels.  The value must be real and non-negative within
    tolerance.
    """
    xs, ys = _validate_points(k1, k2, xs, ys, cfg)
    points = [("R", x) for x in xs] + [("G", y) for y in ys]
    val = quaternion_pfaffian(_assemble_blocks(points, cfg, "limit", None))
    scale = max(abs(val), 1.0)
    if abs(val.imag) > imag_rtol * scale:
        raise ValueError(f"correlation has imaginary residual {val.imag:.3e}")
    if val.real < -1e-10 * scale:
        raise ValueError(f"correlation is negative beyond tolerance: {val.real:.3e}")
    return float(val.real)


def correlation_zeta_route(k1, k2, xs, ys, cfg, imag_rtol=1e-8, fit_rtol=1e-6):
    """Correlation via the variable-resolved route (the cross-check oracle).

    Evaluates the product of all pair normalizations with the Pfaffian of
    the variable-resolved kernels at n1/2 + 2 sample points, interpolates the
    degree-(n1/2) polynomial, extracts its top coefficient and divides by the
    top coefficient of the normalization product.  Restricted to small
    systems; the residual at the extra sample point guards the polynomial
    degree assumption.
    """
    if k1 + k2 > 3:
        raise ValueError("zeta route is limited to k1 + k2 <= 3")
    if cfg.order > 8:
        raise ValueError("zeta route is limited to n1 + 2*n2 <= 8")
    xs, ys = _validate_points(k1, k2, xs, ys, cfg)
    points = [("R", x) for x in xs] + [("G", y) for y in ys]
    h = cfg.n1 // 2
    norms = pair_normalizations(cfg)
    pts = 1.0 + np.arange(h + 2)
    vals = np.empty(h + 2, dtype=complex)
    for s, zeta in enumerate(pts):
        prod_r = 1.0 + 0j
        for r in norms:
            prod_r *= r(zeta)
        pf = quaternion_pfaffian(_assemble_blocks(points, cfg, "zeta", zeta))
        vals[s] = prod_r * pf
    vander = pts[: h + 1, None] ** np.arange(h + 1)[None, :]
    coeffs = np.linalg.solve(vander, vals[: h + 1])
    scale = max(np.abs(vals).max(), 1e-300)
    resid = abs(np.polyval(coeffs[::-1], pts[-1]) - vals[-1])
    if resid > fit_rtol * scale:
        raise ValueError(
            f"numerator is not a degree-{h} polynomial (residual {resid:.3e})"
        )
    denom = FOUR_PI_SQ**h
    for beta in np.asarray([r.coefficient(0) for r in norms])[h:]:
        denom *= beta.real
    val = coeffs[h] / denom
    if abs(val.imag) > imag_rtol * max(abs(val), 1.0):
        raise ValueError(f"imaginary residual {val.imag:.3e} in zeta route")
    return float(val.real)


def write_correlation_csv(rows, fileobj):
    """CSV rows (k1, k2, x_1..x_k1, y_1..y_k2, rho, abs_imag_residual)."""
    k1max = max((r["k1"] for r in rows), default=0)
    k2max = max((r["k2"] for r in rows), default=0)
    header = (
        ["k1", "k2"]
        + [f"x_{i + 1}" for i in range(k1max)]
        + [f"y_{i + 1}" for i in range(k2max)]
        + ["rho", "abs_imag_residual"]
    )
    fileobj.write(",".join(header) + "\n")
    for r in rows:
        xs = list(r["xs"]) + [""] * (k1max - r["k1"])
        ys = list(r["ys"]) + [""] * (k2max - r["k2"])
        cells = [str(r["k1"]), str(r["k2"])]
        cells += [f"{x:.17g}" if x != "" else "" for x in xs]
        cells += [f"{y:.17g}" if y != "" else "" for y in ys]
        cells += [f"{r['rho']:.17g}", f"{r.get('abs_imag_residual', 0.0):.3g}"]
        fileobj.write(",".join(cells) + "\n")
