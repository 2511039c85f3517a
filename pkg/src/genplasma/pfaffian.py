"""Pfaffian evaluation over float, exact-rational and polynomial scalars.

The Pfaffian of an even-order antisymmetric matrix A is a polynomial in the
entries with Pf(A)^2 = det(A).  Several evaluation routes are provided, each
serving as a cross-check on the others:

* :func:`pfaffian` -- O(n^3) skew-symmetric Gaussian elimination with partial
  pivoting, for float/complex matrices.
* :func:`pfaffian_exact` -- the same elimination over an exact field
  (``fractions.Fraction``), pivoting on the first nonzero entry.
* :func:`pfaffian_oracle` -- recursive first-row minor expansion.  Only
  ring operations (+, -, *) are used, so it works over rationals and over
  polynomial scalars, but the term count grows as (n-1)!! and the order is
  therefore capped.
* :func:`zeta_pfaffian` -- Pfaffian of a matrix whose entries are polynomials
  in a formal variable, computed by sampling at distinct real points and
  interpolating.  Degree bounds are known a priori by the caller.
* :func:`quaternion_pfaffian` -- the 2k x 2k Pfaffian attached to a k x k
  grid of 2x2 correlation-kernel blocks, i.e. the quaternion determinant
  qdet(M) = Pf(M Z^{-1}).

Matrices are accepted as numpy arrays or nested sequences.  Exact routines
keep whatever scalar type they are given.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "MAX_ORACLE_ORDER",
    "ZetaPolynomial",
    "KernelBlock",
    "check_skew",
    "pfaffian",
    "pfaffian_exact",
    "pfaffian_oracle",
    "exact_det",
    "zeta_pfaffian",
    "symplectic_unit",
    "symplectic_unit_inverse",
    "quaternion_pfaffian",
]

# Recursive minor expansion has (n-1)!! terms; order 12 means 10395 of them.
MAX_ORACLE_ORDER = 12

# Relative antisymmetry tolerance.  Entries come from analytic formulas, so a
# larger defect indicates a construction bug rather than roundoff.
ANTISYM_RTOL = 1e-10


class ZetaPolynomial:
    """Dense univariate polynomial in a formal variable with complex coefficients.

    Coefficients are stored low degree first and trailing exact zeros are
    trimmed, so the zero polynomial has an empty coefficient array.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).ravel()
        nz = np.nonzero(c)[0]
        self.coeffs = c[: nz[-1] + 1].copy() if nz.size else np.zeros(0, dtype=complex)

    @property
    def degree(self):
        """Degree, or -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def coefficient(self, k):
        if 0 <= k < len(self.coeffs):
            return complex(self.coeffs[k])
        return 0j

    def __call__(self, zeta):
        if not len(self.coeffs):
            return 0j
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * zeta + c
        return acc

    def __add__(self, other):
        other = _as_zeta(other)
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return ZetaPolynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return ZetaPolynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_zeta(other))

    def __rsub__(self, other):
        return _as_zeta(other) + (-self)

    def __mul__(self, other):
        other = _as_zeta(other)
        if not len(self.coeffs) or not len(other.coeffs):
            return ZetaPolynomial()
        return ZetaPolynomial(np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __eq__(self, other):
        other = _as_zeta(other)
        return self.coeffs.shape == other.coeffs.shape and np.array_equal(
            self.coeffs, other.coeffs
        )

    def __repr__(self):
        return f"ZetaPolynomial({self.coeffs.tolist()})"

    def isclose(self, other, rtol=1e-9, atol=1e-12):
        other = _as_zeta(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=complex)
        b = np.zeros(n, dtype=complex)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), atol)
        return np.abs(a - b).max(initial=0.0) <= rtol * scale + atol


def _as_zeta(x):
    if isinstance(x, ZetaPolynomial):
        return x
    return ZetaPolynomial([complex(x)])


@dataclass(frozen=True)
class KernelBlock:
    """One 2x2 block of a species-pair matrix kernel.

    The block matrix is ``[[S, -D], [Itilde, Sswap]]`` where ``Sswap`` is the
    S entry with species and arguments interchanged.  Entries may be scalars
    or broadcastable numpy arrays.
    """

    S: complex
    D: complex
    Itilde: complex
    Sswap: complex

    def matrix(self):
        return np.array(
            [[self.S, -self.D], [self.Itilde, self.Sswap]], dtype=complex
        )


def check_skew(a, rtol=ANTISYM_RTOL):
    """Validate antisymmetry of a square float/complex matrix.

    Raises ``ValueError`` reporting the maximum deviation when
    max|A + A^T| exceeds ``rtol * max|A|``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.size == 0:
        return
    dev = np.abs(a + a.T).max()
    scale = np.abs(a).max()
    if dev > rtol * max(scale, 1e-300):
        raise ValueError(
            f"matrix is not antisymmetric: max|A+A^T| = {dev:.3e}, max|A| = {scale:.3e}"
        )


def _require_even(n):
    if n % 2:
        raise ValueError(f"Pfaffian requires even order, got {n}")


def pfaffian(a, rtol=ANTISYM_RTOL):
    """Pfaffian of an even-order antisymmetric float/complex matrix.

    Skew-symmetric Gaussian elimination with partial pivoting; each step is a
    unit-determinant congruence, so the Pfaffian is the product of the
    (k, k+1) pivots with a sign per row/column swap.  Pf of the empty matrix
    is 1.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0] if a.ndim == 2 else 0
    _require_even(n)
    check_skew(a, rtol=rtol)
    if n == 0:
        return 1.0 + 0j
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        row = np.abs(a[k, k + 1 :])
        j = k + 1 + int(np.argmax(row))
        if row[j - (k + 1)] == 0.0:
            return 0j
        if j != k + 1:
            a[[k + 1, j], :] = a[[j, k + 1], :]
            a[:, [k + 1, j]] = a[:, [j, k + 1]]
            pf = -pf
        piv = a[k, k + 1]
        pf *= piv
        if k + 2 < n:
            f = a[k, k + 2 :] / piv
            a[k + 2 :, :] -= f[:, None] * a[k + 1 : k + 2, :]
            a[:, k + 2 :] -= f[None, :] * a[:, k + 1 : k + 2]
    return pf


def pfaffian_exact(rows):
    """Pfaffian over an exact field (e.g. ``fractions.Fraction``).

    Same elimination as :func:`pfaffian` but pivoting on the first nonzero
    entry; all arithmetic stays in the scalar type of the input.
    """
    a = [list(r) for r in rows]
    n = len(a)
    _require_even(n)
    for i in range(n):
        if len(a[i]) != n:
            raise ValueError("matrix is not square")
        if a[i][i] != 0:
            raise ValueError("nonzero diagonal entry in antisymmetric matrix")
        for j in range(i + 1, n):
            if a[i][j] != -a[j][i]:
                raise ValueError("matrix is not antisymmetric")
    if n == 0:
        return Fraction(1)
    pf = 1
    for k in range(0, n - 1, 2):
        piv_j = None
        for j in range(k + 1, n):
            if a[k][j] != 0:
                piv_j = j
                break
        if piv_j is None:
            return 0 * a[0][1]
        if piv_j != k + 1:
            a[k + 1], a[piv_j] = a[piv_j], a[k + 1]
            for row in a:
                row[k + 1], row[piv_j] = row[piv_j], row[k + 1]
            pf = -pf
        piv = a[k][k + 1]
        pf = pf * piv
        for j in range(k + 2, n):
            f = a[k][j] / piv
            if f:
                for i in range(n):
                    a[i][j] -= f * a[i][k + 1]
                for i in range(n):
                    a[j][i] -= f * a[k + 1][i]
    return pf


def pfaffian_oracle(rows):
    """Combinatorial Pfaffian by recursive minor expansion along the first row.

    Ring generic: only +, - and * are used, so entries may be rationals,
    complexes or :class:`ZetaPolynomial`.  Rejects orders above
    ``MAX_ORACLE_ORDER`` because the term count is (n-1)!!.
    """
    if isinstance(rows, np.ndarray):
        rows = rows.tolist()
    a = [list(r) for r in rows]
    n = len(a)
    _require_even(n)
    if n > MAX_ORACLE_ORDER:
        raise ValueError(
            f"oracle expansion limited to order {MAX_ORACLE_ORDER}, got {n}"
        )
    if n == 0:
        return 1

    def expand(idx):
        if not idx:
            return 1
        i0 = idx[0]
        total = None
        for pos in range(1, len(idx)):
            j = idx[pos]
            rest = idx[1:pos] + idx[pos + 1 :]
            term = a[i0][j] * expand(rest)
            if pos % 2 == 0:
                term = -term
            total = term if total is None else total + term
        return total

    return expand(tuple(range(n)))


def exact_det(rows):
    """Exact determinant by fraction-free (Bareiss) elimination.

    Entries are coerced with ``fractions.Fraction`` when they are ints or
    rationals; Fraction inputs pass through unchanged.
    """

    def coerce(x):
        return x if isinstance(x, Fraction) else Fraction(x)

    a = [[coerce(x) for x in r] for r in rows]
    n = len(a)
    if any(len(r) != n for r in a):
        raise ValueError("matrix is not square")
    if n == 0:
        return Fraction(1)
    sign = 1
    prev = Fraction(1)
    for k in range(n - 1):
        if a[k][k] == 0:
            pivot = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if pivot is None:
                return Fraction(0)
            a[k], a[pivot] = a[pivot], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev
            a[i][k] = Fraction(0)
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _coefficient_stack(entries, degree_bound):
    """Normalize a matrix of polynomial entries to a (d+1, n, n) complex stack."""
    arr = np.asarray(entries, dtype=object)
    if arr.ndim == 3:
        stack = np.asarray(entries, dtype=complex)
        if stack.shape[0] > degree_bound + 1:
            raise ValueError("entry degree exceeds the declared bound")
        out = np.zeros((degree_bound + 1,) + stack.shape[1:], dtype=complex)
        out[: stack.shape[0]] = stack
        return out
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix of polynomials, got {arr.shape}")
    n = arr.shape[0]
    stack = np.zeros((degree_bound + 1, n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            p = _as_zeta(arr[i, j])
            if p.degree > degree_bound:
                raise ValueError(
                    f"entry ({i},{j}) has degree {p.degree} > bound {degree_bound}"
                )
            stack[: len(p.coeffs), i, j] = p.coeffs
    return stack


def zeta_pfaffian(entries, degree_bound, rtol=1e-8):
    """Exact polynomial Pf(A)(zeta) for a matrix of polynomial entries.

    Every entry must have degree <= ``degree_bound``; the Pfaffian then has
    degree <= n/2 * degree_bound and is recovered by evaluating the float
    Pfaffian at that many plus one distinct integer points, centred at zero,
    followed by Vandermonde interpolation.  The interpolant is re-evaluated at
    one extra point and a residual above ``rtol`` (relative to the sampled
    magnitudes) is flagged as an error, since it means the degree bound was
    violated.

    ``entries`` may be a matrix of :class:`ZetaPolynomial`/scalars or a
    ready-made coefficient stack of shape (degree_bound+1, n, n).
    """
    stack = _coefficient_stack(entries, degree_bound)
    n = stack.shape[1]
    _require_even(n)
    for p in range(stack.shape[0]):
        check_skew(stack[p])
    if n == 0:
        return ZetaPolynomial([1.0])
    deg = (n // 2) * degree_bound
    pts = np.arange(deg + 2, dtype=float) - deg // 2
    if len(np.unique(pts)) != len(pts):
        raise RuntimeError("internal error: sample points collide")
    powers = pts[:, None] ** np.arange(stack.shape[0])[None, :]
    vals = np.empty(len(pts), dtype=complex)
    for s, pt_powers in enumerate(powers):
        mat = np.tensordot(pt_powers, stack, axes=(0, 0))
        vals[s] = pfaffian(mat)
    vander = pts[: deg + 1, None] ** np.arange(deg + 1)[None, :]
    coeffs = np.linalg.solve(vander, vals[: deg + 1])
    poly = ZetaPolynomial(coeffs)
    scale = max(np.abs(vals).max(), 1e-300)
    resid = abs(poly(pts[-1]) - vals[-1])
    if resid > rtol * scale:
        raise ValueError(
            f"interpolation residual {resid:.3e} exceeds {rtol:.1e} x scale; "
            "degree bound is likely violated"
        )
    return poly


def symplectic_unit(k):
    """The 2k x 2k block-diagonal symplectic unit Z with blocks [[0,-1],[1,0]]."""
    if k < 0:
        raise ValueError("half-order must be non-negative")
    z = np.zeros((2 * k, 2 * k))
    for t in range(k):
        z[2 * t, 2 * t + 1] = -1.0
        z[2 * t + 1, 2 * t] = 1.0
    return z


def symplectic_unit_inverse(k):
    """Inverse of :func:`symplectic_unit`; equals -Z, with Pfaffian +1."""
    return -symplectic_unit(k)


def quaternion_pfaffian(blocks, k=None, rtol=ANTISYM_RTOL):
    """Quaternion determinant of a k x k grid of 2x2 kernel blocks.

    Assembles the 2k x 2k matrix M from the grid, multiplies by the inverse
    symplectic unit on the right and returns Pf(M Z^{-1}).  The product must
    be antisymmetric within tolerance; a violation is rejected with the
    maximum deviation reported.
    """
    grid = list(blocks)
    kk = len(grid) if k is None else k
    if len(grid) != kk or any(len(r) != kk for r in grid):
        raise ValueError("blocks must form a square grid")
    if kk == 0:
        return 1.0 + 0j
    m = np.zeros((2 * kk, 2 * kk), dtype=complex)
    for i in range(kk):
        for j in range(kk):
            b = grid[i][j]
            m[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = (
                b.matrix() if isinstance(b, KernelBlock) else np.asarray(b)
            )
    p = m @ symplectic_unit_inverse(kk)
    check_skew(p, rtol=rtol)
    return pfaffian(p, rtol=rtol)
