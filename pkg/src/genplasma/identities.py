"""Exact-rational verification of Pfaffian forms of the Vandermonde product.

Five identities are checked, all over ``fractions.Fraction`` with zero
tolerance:

* ``vandermonde``: Pf[(x_n^{N/2} - x_m^{N/2})^2 / (x_n - x_m)] equals the
  Vandermonde product over distinct points x_1..x_N (N even).
* ``monic-pair``: the generalization where the squared power difference is
  replaced by (F(x_n) - F(x_m)) (G(x_n) - G(x_m)) for monic F, G of degree
  N/2.
* ``family``: Pf of the pairing kernel built from any degree ladder
  pi_0..pi_{N-1} equals the product of leading coefficients times the
  Vandermonde product.
* ``confluent``: the confluent extension of ``family``.  An LN x LN matrix W
  collects normalized derivatives D_l = (1/l!) d^l/dx^l of the pairing
  kernel; Pf W equals det V for the confluent Vandermonde matrix V, both
  equal the leading-coefficient product times the Vandermonde product raised
  to L^2, and W factorizes as V J V^T.
* ``confluent-power``: the confluent form with the explicit power kernel
  (y^{LN/2} - x^{LN/2})^2 / (y - x), whose Pfaffian is the pure Vandermonde
  power with unit constant.

Matrix entries involving the division by (y - x) are always built from the
exact quotient polynomial, never by dividing sampled values, so coincident
substitutions stay well defined.

The derivative normalization is pinned to D_l = (1/l!) d^l/dx^l.  This is the
only choice under which D_0 is the identity and the ``confluent-power``
constant equals one; both facts are exercised by the tests.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .pfaffian import exact_det, pfaffian_exact

__all__ = [
    "IdentityReport",
    "IDENTITY_NAMES",
    "vandermonde_product",
    "power_pair_kernel",
    "check_vandermonde_pfaffian",
    "check_monic_pair_pfaffian",
    "check_polynomial_family_pfaffian",
    "check_confluent_family_pfaffian",
    "check_confluent_power_pfaffian",
    "random_distinct_rationals",
    "random_degree_ladder",
    "run_identity_suite",
]

IDENTITY_NAMES = (
    "vandermonde",
    "monic-pair",
    "family",
    "confluent",
    "confluent-power",
)


# ----------------------------------------------------------------------------
# exact polynomial helpers (dense Fraction coefficients, low degree first)

def poly_eval(coeffs, x):
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def poly_degree(coeffs):
    for i in range(len(coeffs) - 1, -1, -1):
        if coeffs[i] != 0:
            return i
    return -1


def normalized_derivative(coeffs, order):
    """Coefficients of f^(order)/order! (the Taylor-shift normalization)."""
    if order == 0:
        return list(coeffs)
    out = []
    for m in range(len(coeffs) - order):
        out.append(math.comb(m + order, order) * coeffs[m + order])
    return out


def divided_difference(coeffs, x, y):
    """Exact (f(y) - f(x)) / (y - x) via the quotient polynomial."""
    total = Fraction(0)
    xp = [Fraction(1)]
    yp = [Fraction(1)]
    deg = len(coeffs) - 1
    for _ in range(deg):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    for j, c in enumerate(coeffs):
        if c == 0:
            continue
        # (y^j - x^j)/(y - x) = sum_{p<j} y^p x^{j-1-p}
        total += c * sum(yp[p] * xp[j - 1 - p] for p in range(j))
    return total


def vandermonde_product(xs, power=1):
    """Exact prod_{m<n} (x_n - x_m)^power."""
    xs = [Fraction(x) for x in xs]
    prod = Fraction(1)
    for m in range(len(xs)):
        for n in range(m + 1, len(xs)):
            prod *= xs[n] - xs[m]
    return prod ** power


def power_pair_kernel(half_degree, x, y):
    """The quotient polynomial (y^a - x^a)^2/(y - x), a = half_degree, at (x, y).

    Expanded form: sum_{t<a} (y^{2a-1-t} x^t - y^t x^{2a-1-t}).
    """
    a = half_degree
    xp = [Fraction(1)]
    yp = [Fraction(1)]
    for _ in range(2 * a - 1):
        xp.append(xp[-1] * x)
        yp.append(yp[-1] * y)
    total = Fraction(0)
    for t in range(a):
        total += yp[2 * a - 1 - t] * xp[t] - yp[t] * xp[2 * a - 1 - t]
    return total


# ----------------------------------------------------------------------------
# reports

@dataclass
class IdentityReport:
    identity: str
    n: int
    level: int
    seed: int | None
    passed: bool
    lhs: Fraction
    rhs: Fraction
    checks: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "theorem": self.identity,
            "N": self.n,
            "L": self.level,
            "seed": self.seed,
            "pass": self.passed,
            "lhs": _frac_str(self.lhs),
            "rhs": _frac_str(self.rhs),
            "checks": dict(self.checks),
        }


def _frac_str(q):
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _validate_points(xs):
    xs = [Fraction(x) for x in xs]
    n = len(xs)
    if n % 2:
        raise ValueError("the number of points must be even")
    if len(set(xs)) != n:
        raise ValueError("points must be pairwise distinct")
    return xs


# ----------------------------------------------------------------------------
# identity checks

def check_vandermonde_pfaffian(xs, seed=None):
    """Pf of the power pair kernel equals the Vandermonde product, exactly.

    Besides the identity itself, the two structural facts used in its proof
    are asserted: the Pfaffian vanishes when two points coincide, and both
    sides are homogeneous of degree N(N-1)/2.
    """
    xs = _validate_points(xs)
    n = len(xs)
    a = n // 2

    def matrix(points):
        return [
            [power_pair_kernel(a, points[m], points[j]) for j in range(n)]
            for m in range(n)
        ]

    lhs = pfaffian_exact(matrix(xs))
    rhs = vandermonde_product(xs)
    checks = {"identity": lhs == rhs}

    merged = list(xs)
    merged[1] = merged[0]
    checks["coincidence_vanishes"] = pfaffian_exact(matrix(merged)) == 0

    c = Fraction(3, 2)
    scaled = pfaffian_exact(matrix([c * x for x in xs]))
    checks["homogeneous"] = scaled == c ** (n * (n - 1) // 2) * lhs

    return IdentityReport(
        "vandermonde", n, 1, seed, all(checks.values()), lhs, rhs, checks
    )


def check_monic_pair_pfaffian(xs, f_coeffs, g_coeffs, seed=None):
    """Pf[(F(x_n)-F(x_m)) (G(x_n)-G(x_m)) / (x_n-x_m)] = Vandermonde product.

    F, G must be monic of degree N/2; anything else is rejected.
    """
    xs = _validate_points(xs)
    n = len(xs)
    f = [Fraction(c) for c in f_coeffs]
    g = [Fraction(c) for c in g_coeffs]
    for name, coeffs in (("F", f), ("G", g)):
        if poly_degree(coeffs) != n // 2 or coeffs[n // 2] != 1:
            raise ValueError(f"{name} must be monic of degree {n // 2}")
    gvals = [poly_eval(g, x) for x in xs]
    mat = [
        [
            divided_difference(f, xs[m], xs[j]) * (gvals[j] - gvals[m])
            for j in range(n)
        ]
        for m in range(n)
    ]
    lhs = pfaffian_exact(mat)
    rhs = vandermonde_product(xs)
    return IdentityReport(
        "monic-pair", n, 1, seed, lhs == rhs, lhs, rhs, {"identity": lhs == rhs}
    )


def _validate_ladder(polys, count):
    polys = [[Fraction(c) for c in p] for p in polys]
    if len(polys) != count:
        raise ValueError(f"expected {count} polynomials, got {len(polys)}")
    for i, p in enumerate(polys):
        if poly_degree(p) != i:
            raise ValueError(f"polynomial {i} must have degree exactly {i}")
    return polys


def check_polynomial_family_pfaffian(xs, polys, seed=None):
    """Pf of the pairing kernel of a degree ladder pi_0..pi_{N-1}.

    The value is the product of the leading coefficients times the
    Vandermonde product.
    """
    xs = _validate_points(xs)
    n = len(xs)
    polys = _validate_ladder(polys, n)
    vals = [[poly_eval(p, x) for p in polys] for x in xs]
    mat = [
        [
            sum(
                vals[m][2 * t] * vals[j][2 * t + 1]
                - vals[m][2 * t + 1] * vals[j][2 * t]
                for t in range(n // 2)
            )
            for j in range(n)
        ]
        for m in range(n)
    ]
    lhs = pfaffian_exact(mat)
    lead = Fraction(1)
    for i, p in enumerate(polys):
        lead *= p[i]
    rhs = lead * vandermonde_product(xs)
    return IdentityReport(
        "family", n, 1, seed, lhs == rhs, lhs, rhs, {"identity": lhs == rhs}
    )


def _symplectic_j(order):
    j = [[Fraction(0)] * order for _ in range(order)]
    for t in range(order // 2):
        j[2 * t][2 * t + 1] = Fraction(1)
        j[2 * t + 1][2 * t] = Fraction(-1)
    return j


def check_confluent_family_pfaffian(xs, level, polys, seed=None):
    """Confluent pairing-kernel identity for a ladder pi_0..pi_{LN-1}.

    Builds the confluent Vandermonde matrix V (rows D_0..D_{L-1} per point)
    and the antisymmetric matrix W of derivative-paired kernels, then asserts
    Pf W = det V, det V = prod(a_k) * Vandermonde^(L^2), and the entrywise
    factorization W = V J V^T.
    """
    xs = _validate_points(xs)
    n = len(xs)
    lvl = int(level)
    if lvl < 1:
        raise ValueError("level must be >= 1")
    order = lvl * n
    polys = _validate_ladder(polys, order)

    # dvals[m][l][i] = D_l pi_i(x_m)
    derivs = [[normalized_derivative(p, l) for p in polys] for l in range(lvl)]
    dvals = [
        [[poly_eval(derivs[l][i], x) for i in range(order)] for l in range(lvl)]
        for x in xs
    ]

    v = [dvals[m][l] for m in range(n) for l in range(lvl)]
    det_v = exact_det(v)

    def w_entry(m, l, j, mm):
        return sum(
            dvals[m][l][2 * t] * dvals[j][mm][2 * t + 1]
            - dvals[m][l][2 * t + 1] * dvals[j][mm][2 * t]
            for t in range(order // 2)
        )

    w = [
        [w_entry(m, l, j, mm) for j in range(n) for mm in range(lvl)]
        for m in range(n)
        for l in range(lvl)
    ]
    pf_w = pfaffian_exact(w)

    lead = Fraction(1)
    for i, p in enumerate(polys):
        lead *= p[i]
    rhs = lead * vandermonde_product(xs, power=lvl * lvl)

    jmat = _symplectic_j(order)
    vjt = [
        [
            sum(v[r][c] * jmat[c][cc] * v[s][cc] for c in range(order) for cc in range(order))
            for s in range(order)
        ]
        for r in range(order)
    ]
    checks = {
        "pfaffian_equals_det": pf_w == det_v,
        "det_equals_product": det_v == rhs,
        "factorization": vjt == w,
    }
    return IdentityReport(
        "confluent", n, lvl, seed, all(checks.values()), pf_w, rhs, checks
    )


def degree_ordering_signature(order):
    """Signature of the permutation sorting the power-kernel ladder by degree.

    The ladder alternates x^t and x^{order-1-t}; position 2t carries degree t
    and position 2t+1 carries degree order-1-t.
    """
    perm = [0] * order
    for t in range(order // 2):
        perm[2 * t] = t
        perm[2 * t + 1] = order - 1 - t
    inversions = sum(
        1
        for i in range(order)
        for j in range(i + 1, order)
        if perm[i] > perm[j]
    )
    return -1 if inversions % 2 else 1


def check_confluent_power_pfaffian(xs, level, seed=None):
    """Confluent identity for the explicit power pair kernel.

    The matrix U collects D^l_x D^m_y of (y^{LN/2} - x^{LN/2})^2/(y-x); its
    Pfaffian equals the Vandermonde product to the power L^2 with constant
    one.  The degree-ordering permutation of the underlying ladder must have
    signature +1, which is asserted directly.
    """
    xs = _validate_points(xs)
    n = len(xs)
    lvl = int(level)
    if lvl < 1:
        raise ValueError("level must be >= 1")
    order = lvl * n
    a = order // 2

    # F(x, y) = sum_t (x^t y^{order-1-t} - x^{order-1-t} y^t); normalized
    # derivatives act termwise through binomial coefficients.
    terms = [(t, order - 1 - t) for t in range(a)]

    xpows = {}
    for x in xs:
        pw = [Fraction(1)]
        for _ in range(order - 1):
            pw.append(pw[-1] * x)
        xpows[x] = pw

    def dd_f(x, y, l, mm):
        px, py = xpows[x], xpows[y]
        total = Fraction(0)
        for (p, q) in terms:
            if p >= l and q >= mm:
                total += math.comb(p, l) * math.comb(q, mm) * px[p - l] * py[q - mm]
            if q >= l and p >= mm:
                total -= math.comb(q, l) * math.comb(p, mm) * px[q - l] * py[p - mm]
        return total

    u = [
        [dd_f(xm, xj, l, mm) for xj in xs for mm in range(lvl)]
        for xm in xs
        for l in range(lvl)
    ]
    lhs = pfaffian_exact(u)
    rhs = vandermonde_product(xs, power=lvl * lvl)
    checks = {
        "identity": lhs == rhs,
        "degree_ordering_signature": degree_ordering_signature(order) == 1,
    }
    return IdentityReport(
        "confluent-power", n, lvl, seed, all(checks.values()), lhs, rhs, checks
    )


# ----------------------------------------------------------------------------
# randomized suite

def random_distinct_rationals(n, rng, bound=20):
    """n pairwise distinct rationals with numerators/denominators in [-bound, bound]."""
    out = []
    seen = set()
    while len(out) < n:
        q = Fraction(rng.randint(-bound, bound), rng.randint(1, bound))
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


def random_degree_ladder(count, rng, coeff_bound=5):
    """Polynomials pi_0..pi_{count-1} with deg pi_i = i and small int coefficients."""
    polys = []
    for i in range(count):
        coeffs = [Fraction(rng.randint(-coeff_bound, coeff_bound)) for _ in range(i)]
        lead = 0
        while lead == 0:
            lead = rng.randint(-coeff_bound, coeff_bound)
        polys.append(coeffs + [Fraction(lead)])
    return polys


def random_monic(degree, rng, coeff_bound=5):
    coeffs = [Fraction(rng.randint(-coeff_bound, coeff_bound)) for _ in range(degree)]
    return coeffs + [Fraction(1)]


def _one_instance(identity, n, level, seed):
    rng = random.Random(seed)
    xs = random_distinct_rationals(n, rng)
    if identity == "vandermonde":
        return check_vandermonde_pfaffian(xs, seed=seed)
    if identity == "monic-pair":
        return check_monic_pair_pfaffian(
            xs, random_monic(n // 2, rng), random_monic(n // 2, rng), seed=seed
        )
    if identity == "family":
        return check_polynomial_family_pfaffian(
            xs, random_degree_ladder(n, rng), seed=seed
        )
    if identity == "confluent":
        return check_confluent_family_pfaffian(
            xs, level, random_degree_ladder(level * n, rng), seed=seed
        )
    if identity == "confluent-power":
        return check_confluent_power_pfaffian(xs, level, seed=seed)
    raise ValueError(f"unknown identity {identity!r}")


def run_identity_suite(
    identities=("all",),
    ns=(2, 4, 6, 8),
    levels=(1, 2, 3),
    trials=100,
    seed=0,
    max_order=12,
    threads=1,
):
    """Run randomized instances of the selected identities.

    Configurations are all even N in ``ns``; the confluent identities also
    sweep ``levels`` subject to L*N <= ``max_order``.  Each instance draws its
    own sub-seed so reports are reproducible in isolation.  Returns the list
    of :class:`IdentityReport`.
    """
    chosen = list(identities)
    if "all" in chosen:
        chosen = list(IDENTITY_NAMES)
    for name in chosen:
        if name not in IDENTITY_NAMES:
            raise ValueError(f"unknown identity {name!r}")
    jobs = []
    for name in chosen:
        for n in ns:
            if n % 2 or n < 2:
                raise ValueError("N values must be positive even integers")
            lvls = levels if name in ("confluent", "confluent-power") else (1,)
            for lvl in lvls:
                if lvl * n > max_order:
                    continue
                for t in range(trials):
                    jobs.append((name, n, lvl, seed + 104729 * t + 7919 * lvl + n))

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda j: _one_instance(*j), jobs))
    else:
        reports = [_one_instance(*j) for j in jobs]
    return reports
