"""Finite-N two-component generalized plasma on the circle.

The system has ``n1`` charge-1-like particles (species R, angles theta) and
``n2`` charge-2-like particles (species G, angles phi) with Boltzmann weight

    prod |e^{i th_k} - e^{i th_j}|^2  prod |e^{i ph_a} - e^{i ph_b}|^4
    prod |e^{i th_j} - e^{i ph_a}|^2

on [0, 2pi)^(n1+n2).  ``n1`` must be even.  The module provides the log
weight, the exact normalization constant, the antisymmetric Gram matrices of
the monomial basis under one-body weights u and v, the generalized partition
function as a coefficient of a Pfaffian polynomial in a formal variable, and
the ordering that makes the uniform-weight Gram pencil block skew-diagonal
(the skew-orthogonality structure underlying all correlation formulas).

Angular integrals are Laurent trigonometric polynomials, so uniform-grid
(periodic trapezoidal) quadrature with enough nodes is exact to roundoff;
node counts are validated against the integrand bandwidth.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .pfaffian import ZetaPolynomial, zeta_pfaffian

__all__ = [
    "TWO_PI",
    "PlasmaConfig",
    "Weight",
    "GramMatrices",
    "SkewOrdering",
    "config_from_json",
    "log_boltzmann_weight",
    "normalization",
    "log_normalization",
    "quadrature_nodes",
    "required_node_count",
    "default_node_count",
    "gram_matrices",
    "gram_a",
    "gram_b",
    "gram_a_uniform",
    "gram_b_uniform",
    "phi_transform",
    "phi_transform_quadrature",
    "partition_function",
    "skew_permutation",
    "pair_normalizations",
    "skew_structure",
    "write_gram_csv",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PlasmaConfig:
    """Particle counts of the two species; n1 must be even, n1 + n2 >= 1."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError("particle counts must be non-negative")
        if self.n1 % 2:
            raise ValueError("n1 must be even")
        if self.n1 + self.n2 < 1:
            raise ValueError("at least one particle is required")

    @property
    def order(self):
        """Dimension n1 + 2*n2 of the Gram matrices."""
        return self.n1 + 2 * self.n2


class Weight:
    """One-body weight on the circle: a constant or a real Fourier polynomial."""

    def __init__(self, const=1.0, cos=(), sin=()):
        self.const = float(const)
        self.cos = tuple(float(c) for c in cos)
        self.sin = tuple(float(s) for s in sin)

    @classmethod
    def uniform(cls):
        return cls(1.0)

    @classmethod
    def from_json(cls, spec):
        if spec is None:
            return cls.uniform()
        kind = spec.get("kind", "const")
        if kind == "const":
            return cls(spec.get("value", 1.0))
        if kind == "fourier":
            return cls(spec.get("const", 0.0), spec.get("cos", ()), spec.get("sin", ()))
        raise ValueError(f"unknown weight kind {kind!r}")

    def to_json(self):
        if not self.cos and not self.sin:
            return {"kind": "const", "value": self.const}
        return {
            "kind": "fourier",
            "const": self.const,
            "cos": list(self.cos),
            "sin": list(self.sin),
        }

    @property
    def degree(self):
        return max(len(self.cos), len(self.sin))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, self.const)
        for m, c in enumerate(self.cos, start=1):
            out = out + c * np.cos(m * theta)
        for m, s in enumerate(self.sin, start=1):
            out = out + s * np.sin(m * theta)
        return out

    def rotated(self, alpha):
        """The same weight translated by alpha along the circle."""
        cos = []
        sin = []
        for m in range(1, self.degree + 1):
            a = self.cos[m - 1] if m <= len(self.cos) else 0.0
            b = self.sin[m - 1] if m <= len(self.sin) else 0.0
            # a cos(m(t-al)) + b sin(m(t-al))
            cos.append(a * math.cos(m * alpha) - b * math.sin(m * alpha))
            sin.append(a * math.sin(m * alpha) + b * math.cos(m * alpha))
        return Weight(self.const, cos, sin)


def config_from_json(spec):
    """Parse {"N1": .., "N2": .., "u": {...}, "v": {...}} into config and weights."""
    cfg = PlasmaConfig(int(spec["N1"]), int(spec["N2"]))
    return cfg, Weight.from_json(spec.get("u")), Weight.from_json(spec.get("v"))


def log_boltzmann_weight(thetas, phis):
    """Log of the unnormalized density; -inf at coincident points.

    Uses |e^{ia} - e^{ib}|^2 = 2 - 2 cos(a - b), so each pair contributes
    (coupling/2) * log(2 - 2 cos).
    """
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    total = 0.0
    with np.errstate(divide="ignore"):
        for k in range(1, len(thetas)):
            total += np.sum(np.log(2.0 - 2.0 * np.cos(thetas[k] - thetas[:k])))
        for b in range(1, len(phis)):
            total += 2.0 * np.sum(np.log(2.0 - 2.0 * np.cos(phis[b] - phis[:b])))
        if len(thetas) and len(phis):
            total += np.sum(np.log(2.0 - 2.0 * np.cos(thetas[:, None] - phis[None, :])))
    return float(total)


def log_normalization(n1, n2):
    """Log of the exact normalization constant, from integer factorials."""
    if n1 < 0 or n1 % 2 or n2 < 0:
        raise ValueError("n1 must be even and both counts non-negative")
    lf = lambda k: math.log(math.factorial(k)) if k > 1 else 0.0
    return (
        (n1 + n2) * math.log(TWO_PI)
        + lf(2 * n2 + n1)
        + lf(n1 // 2)
        + lf(n2)
        - n2 * math.log(2.0)
        - lf(n2 + n1 // 2)
    )


def normalization(n1, n2):
    """The normalization constant C(n1, n2) of the plasma density."""
    return math.exp(log_normalization(n1, n2))


# ----------------------------------------------------------------------------
# quadrature and Gram matrices

def quadrature_nodes(m):
    """m uniform angular nodes and the common weight 2*pi/m."""
    return TWO_PI * np.arange(m) / m, TWO_PI / m


def required_node_count(cfg, degree=0):
    """Minimal node count exceeding the integrand Laurent bandwidth."""
    return 2 * cfg.order + 2 * degree + 2


def default_node_count(cfg, degree=0):
    return 4 * cfg.order + 8 + 2 * degree


def _check_nodes(cfg, m, degree):
    need = required_node_count(cfg, degree)
    if m < need:
        raise ValueError(
            f"{m} quadrature nodes is below the bandwidth bound; need >= {need}"
        )


def _pair_kernel_grid(cfg, z):
    """Antisymmetric kernel (z2^{-a} - z1^{-a})^2 / (z2^{-1} - z1^{-1}) on a grid.

    Evaluated through the quotient expansion, so coincident nodes are exact
    zeros rather than 0/0.  Index convention: K[m1, m2] has z1 = z[m1],
    z2 = z[m2].
    """
    a = cfg.n1 // 2
    zi = 1.0 / z
    if a == 0:
        return np.zeros((len(z), len(z)), dtype=complex)
    front = zi[None, :] ** a - zi[:, None] ** a
    quot = np.zeros((len(z), len(z)), dtype=complex)
    for p in range(a):
        quot += zi[None, :] ** p * zi[:, None] ** (a - 1 - p)
    kern = front * quot
    return 0.5 * (kern - kern.T)


@dataclass(frozen=True)
class GramMatrices:
    """Antisymmetric Gram data: a[u], b[v], plus the sampled weights."""

    a: np.ndarray
    b: np.ndarray
    nodes: np.ndarray
    u_samples: np.ndarray
    v_samples: np.ndarray


def gram_matrices(cfg, u=None, v=None, m=None):
    """All Gram entries a_{j,k}[u], b_{j,k}[v] for j,k = 1..n1+2n2.

    Computed by exact-bandwidth uniform-grid quadrature; the kernel matrix is
    antisymmetrized so a is antisymmetric to the last bit, and b is
    antisymmetric by its (k - j) prefactor.
    """
    u = u or Weight.uniform()
    v = v or Weight.uniform()
    deg = max(u.degree, v.degree)
    if m is None:
        m = default_node_count(cfg, deg)
    _check_nodes(cfg, m, deg)
    n = cfg.order
    theta, w = quadrature_nodes(m)
    z = np.exp(1j * theta)

    kern = _pair_kernel_grid(cfg, z)
    # columns: u(theta) z^{-n2} z^{j-1}, j = 1..n
    p = (u(theta) * z ** (-cfg.n2))[:, None] * z[:, None] ** np.arange(n)[None, :]
    a = (w * w) * (p.T @ kern @ p)
    a = 0.5 * (a - a.T)

    vs = v(theta)
    # moments[t] = int v z^(t+1-n) dtheta for t = (j+k) - 2 in [0, 2n-2]
    exps = np.arange(2 * n - 1) + 1 - n
    moments = w * (z[:, None] ** exps[None, :] * vs[:, None]).sum(axis=0)
    jj, kk = np.meshgrid(np.arange(1, n + 1), np.arange(1, n + 1), indexing="ij")
    b = (kk - jj) * moments[jj + kk - 2]
    return GramMatrices(a=a, b=b, nodes=theta, u_samples=u(theta), v_samples=vs)


def gram_a(cfg, j, k, u=None, m=None):
    """Single entry a_{j,k}[u] (1-based indices)."""
    g = gram_matrices(cfg, u=u, m=m)
    return complex(g.a[j - 1, k - 1])


def gram_b(cfg, j, k, v=None, m=None):
    """Single entry b_{j,k}[v] (1-based indices)."""
    g = gram_matrices(cfg, v=v, m=m)
    return complex(g.b[j - 1, k - 1])


def gram_a_uniform(cfg, j, k):
    """Closed form of a_{j,k}[1]: supported on j+k = n+1 within the R band."""
    n = cfg.order
    if j + k != n + 1:
        return 0.0
    if not (cfg.n2 + 1 <= j <= cfg.n2 + cfg.n1):
        return 0.0
    sign = 1.0 if 2 * cfg.n2 + cfg.n1 + 1 - 2 * j > 0 else -1.0
    return sign * TWO_PI**2


def gram_b_uniform(cfg, j, k):
    """Closed form of b_{j,k}[1] = 2*pi*(k - j) on the anti-diagonal j+k = n+1."""
    if j + k != cfg.order + 1:
        return 0.0
    return TWO_PI * (k - j)


def phi_transform(cfg, j, z):
    """Closed form of the one-variable kernel transform of z^j (0-based j).

    Nonzero only in the band n2 <= j <= n2 + n1 - 1, where it equals
    2*pi*sgn(n2 + n1/2 - 1/2 - j) * z^(j+1-n1-n2).
    """
    if not 0 <= j <= cfg.order - 1:
        raise ValueError("index out of range")
    if not (cfg.n2 <= j <= cfg.n2 + cfg.n1 - 1):
        return 0j
    sign = 1.0 if 2 * cfg.n2 + cfg.n1 - 1 - 2 * j > 0 else -1.0
    return TWO_PI * sign * z ** (j + 1 - cfg.n1 - cfg.n2)


def phi_transform_quadrature(cfg, j, z, m=None):
    """Quadrature of the defining integral of :func:`phi_transform`."""
    if m is None:
        m = default_node_count(cfg)
    _check_nodes(cfg, m, 0)
    a = cfg.n1 // 2
    phi, wq = quadrature_nodes(m)
    w = np.exp(1j * phi)
    wi = 1.0 / w
    zi = 1.0 / z
    if a == 0:
        return 0j
    quot = sum(zi**p * wi ** (a - 1 - p) for p in range(a))
    kern = (zi**a - wi**a) * quot
    return complex(wq * np.sum(w ** (-cfg.n2) * kern * w**j))


# ----------------------------------------------------------------------------
# partition function

def partition_function(cfg, u=None, v=None, m=None, imag_rtol=1e-8):
    """Generalized partition function Z[u, v] normalized so Z[1, 1] = 1.

    Z equals n1! n2! / C(n1, n2) times the coefficient of zeta^(n1/2) in the
    Pfaffian of zeta*a[u] + b[v].  The prefactor is combined in log space.
    The result must be real; a relative imaginary residual above
    ``imag_rtol`` raises.
    """
    g = gram_matrices(cfg, u=u, v=v, m=m)
    poly = zeta_pfaffian(np.stack([g.b, g.a]), 1)
    coeff = poly.coefficient(cfg.n1 // 2)
    lf = lambda k: math.log(math.factorial(k)) if k > 1 else 0.0
    log_pref = lf(cfg.n1) + lf(cfg.n2) - log_normalization(cfg.n1, cfg.n2)
    z = coeff * math.exp(log_pref)
    if abs(z.imag) > imag_rtol * max(abs(z), 1e-300):
        raise ValueError(f"partition function has imaginary residual {z.imag:.3e}")
    return z.real


# ----------------------------------------------------------------------------
# skew-orthogonal structure

def skew_permutation(cfg):
    """Row/column ordering making the uniform Gram pencil block skew-diagonal.

    Returns the 1-based images (R(1), ..., R(n)).
    """
    n1, n2 = cfg.n1, cfg.n2
    r = [0] * cfg.order
    for j in range(1, n1 // 2 + 1):
        r[2 * j - 2] = n2 + j
        r[2 * j - 1] = n2 + n1 - j + 1
    for j in range(n1 // 2 + 1, n1 // 2 + n2 + 1):
        r[2 * j - 2] = j - n1 // 2
        r[2 * j - 1] = 2 * n2 + 3 * n1 // 2 - j + 1
    return tuple(r)


def _pair_normalization_ints(cfg):
    """Per-pair (alpha, beta) with r_t = alpha*(2pi)^2*zeta + beta*2pi."""
    out = []
    for t in range(cfg.n1 // 2):
        out.append((1, cfg.n1 - 1 - 2 * t))
    for t in range(cfg.n1 // 2, cfg.n1 // 2 + cfg.n2):
        out.append((0, 2 * cfg.n2 + 2 * cfg.n1 - 1 - 2 * t))
    return tuple(out)


def pair_normalizations(cfg):
    """The 2x2 block values r_t of the reordered pencil, as polynomials."""
    return tuple(
        ZetaPolynomial([TWO_PI * beta, TWO_PI**2 * alpha])
        for alpha, beta in _pair_normalization_ints(cfg)
    )


@dataclass(frozen=True)
class SkewOrdering:
    """Skew-orthogonality data: the permutation and the block normalizations."""

    permutation: tuple
    normalizations: tuple
    normalization_ints: tuple


def skew_structure(cfg):
    """Build and exactly verify the block skew-diagonal structure.

    The uniform-weight Gram entries are integer multiples of (2pi)^2 (the
    zeta part) and 2pi (the constant part), so the verification is pure
    integer arithmetic: after reordering, every off-block entry must be
    identically zero and block t must equal r_t.  Any violation raises.
    """
    n = cfg.order
    n1, n2 = cfg.n1, cfg.n2

    def a_int(j, k):
        if j + k != n + 1 or not (n2 + 1 <= j <= n2 + n1):
            return 0
        return 1 if 2 * n2 + n1 + 1 - 2 * j > 0 else -1

    def b_int(j, k):
        return (k - j) if j + k == n + 1 else 0

    perm = skew_permutation(cfg)
    ints = _pair_normalization_ints(cfg)
    for i in range(n):
        for j in range(i + 1, n):
            alpha = a_int(perm[i], perm[j])
            beta = b_int(perm[i], perm[j])
            if i % 2 == 0 and j == i + 1:
                if (alpha, beta) != ints[i // 2]:
                    raise AssertionError(
                        f"block {i // 2} is ({alpha},{beta}), expected {ints[i // 2]}"
                    )
            elif (alpha, beta) != (0, 0):
                raise AssertionError(
                    f"off-block entry at reordered position ({i},{j}) is nonzero"
                )
    return SkewOrdering(
        permutation=perm,
        normalizations=pair_normalizations(cfg),
        normalization_ints=ints,
    )


def write_gram_csv(matrix, fileobj):
    """Dump one Gram matrix as CSV rows ``j,k,re,im`` (1-based indices)."""
    fileobj.write("j,k,re,im\n")
    n = matrix.shape[0]
    for j in range(n):
        for k in range(n):
            val = complex(matrix[j, k])
            fileobj.write(f"{j + 1},{k + 1},{val.real:.17g},{val.imag:.17g}\n")
