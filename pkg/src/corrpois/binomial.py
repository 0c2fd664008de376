"""Exact combinatorics for the equal-probability (binomial) case.

With p_i = lam/n the factorial moments of S_n are (n)_m lam^m / n^m, and the
falling factorial expands as

    (n)_m = n^m - A_1 n^(m-1) + A_2 n^(m-2) - ...,

where A_k = A_k(m-1) is the elementary symmetric function of 1..m-1 of order
k (an unsigned Stirling number of the first kind).  Truncating the expansion
after nu terms and matching it against the corrected-measure moment factor
1 - sum_j gamma_j (m)_j yields, for each truncation order nu, exact rational
coefficients gamma_j(nu) as polynomials in 1/n.  Matching is a triangular
change of basis (powers of m into falling factorials), solved here by exact
back-substitution from the highest degree down.

Everything in this module is exact: arbitrary-precision integers and
``fractions.Fraction`` throughout.  The companion constants

    C_nu(lam) = lam^(nu+1) e^(2 lam) Q_(nu-1)(lam)

bound the order-two factorial moment distance for the binomial case by
C_nu(lam) n^(-nu); the Q polynomials obey an exact integral recurrence and
an equivalent differential one, both implemented on coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
__all__ = [
    "RationalPolynomial",
    "GammaTable",
    "stirling_unsigned",
    "stirling_poly",
    "falling_factorial_remainder",
    "solve_gamma_table",
    "gamma_floats",
    "q_polynomial",
    "c_constant",
    "c_constant_series",
    "PUBLISHED_GAMMA_TABLE",
    "SUSPECT_PUBLISHED_ENTRIES",
    "compare_with_published",
]


@dataclass(frozen=True)
class RationalPolynomial:
    """Polynomial with exact rational coefficients, index = degree."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        c = [Fraction(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [Fraction(0)]
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __add__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [Fraction(0)] * (n - len(self.coeffs))
        for i, c in enumerate(other.coeffs):
            a[i] += c
        return RationalPolynomial(tuple(a))

    def scale(self, s) -> "RationalPolynomial":
        s = Fraction(s)
        return RationalPolynomial(tuple(c * s for c in self.coeffs))

    def __mul__(self, other: "RationalPolynomial") -> "RationalPolynomial":
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RationalPolynomial(tuple(out))

    def derivative(self) -> "RationalPolynomial":
        if len(self.coeffs) == 1:
            return RationalPolynomial((Fraction(0),))
        return RationalPolynomial(tuple(i * c for i, c in enumerate(self.coeffs) if i > 0))

    def shift_up(self) -> "RationalPolynomial":
        """Multiply by the variable."""
        return RationalPolynomial((Fraction(0),) + self.coeffs)

    def eval_exact(self, x) -> Fraction:
        x = Fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_float(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc


def stirling_unsigned(m: int, k: int) -> int:
    """A_k(m-1): sum of k-fold products over 1 <= i_1 < ... < i_k <= m-1.

    These are the unsigned Stirling numbers of the first kind arranged as
    expansion coefficients of (n)_m in powers of n; A_k = 0 for k >= m and
    A_0 = 1.  Exact integer arithmetic, no overflow possible.
    """
    if m < 0 or k < 0:
        raise ValueError("require m >= 0 and k >= 0")
    if k == 0:
        return 1
    if k >= m:
        return 0
    e = [0] * (k + 1)
    e[0] = 1
    for v in range(1, m):
        for j in range(min(k, v), 0, -1):
            e[j] += v * e[j - 1]
    return e[k]


_STIRLING_POLY_CACHE: dict[int, RationalPolynomial] = {}


def stirling_poly(k: int) -> RationalPolynomial:
    """A_k(m-1) as an exact polynomial in m, of degree 2k.

    Obtained by Lagrange interpolation on m = 0..2k; the degree-2k bound and
    the vanishing at m = 0..k (binomial factor C(m, k+1)) are both asserted
    against extra exact values.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k in _STIRLING_POLY_CACHE:
        return _STIRLING_POLY_CACHE[k]
    pts = [(Fraction(m), Fraction(stirling_unsigned(m, k))) for m in range(2 * k + 1)]
    poly = _lagrange(pts)
    for m in range(2 * k + 1, 2 * k + 5):
        if poly.eval_exact(m) != stirling_unsigned(m, k):
            raise AssertionError(f"degree bound 2k failed for A_{k}")
    for m in range(k + 1):
        if poly.eval_exact(m) != 0 and k > 0:
            raise AssertionError(f"A_{k} does not vanish at m = {m}")
    _STIRLING_POLY_CACHE[k] = poly
    return poly


def _lagrange(points: list[tuple[Fraction, Fraction]]) -> RationalPolynomial:
    total = RationalPolynomial((Fraction(0),))
    for i, (xi, yi) in enumerate(points):
        basis = RationalPolynomial((Fraction(1),))
        denom = Fraction(1)
        for j, (xj, _) in enumerate(points):
            if j == i:
                continue
            basis = basis * RationalPolynomial((-xj, Fraction(1)))
            denom *= xi - xj
        total = total + basis.scale(yi / denom)
    return total


def falling_factorial_remainder(n: int, m: int, nu: int) -> tuple[int, Fraction]:
    """Truncate the (n)_m expansion after nu alternating terms.

    Returns (truncation, R_nu) where

        truncation = sum_{k=0}^{nu-1} (-1)^k A_k(m-1) n^(m-k)
        R_nu = (-1)^nu ((n)_m - truncation) n^(nu-m),

    and asserts the sandwich 0 <= R_nu <= A_nu(m-1).  R_nu = 0 whenever the
    truncation already reproduces (n)_m exactly (nu >= m).
    """
    if nu < 1 or n < 1 or m < 0:
        raise ValueError("require nu >= 1, n >= 1, m >= 0")
    exact = 1
    for i in range(m):
        exact *= n - i
    trunc = sum((-1) ** k * stirling_unsigned(m, k) * n ** (m - k) for k in range(nu))
    r = Fraction((-1) ** nu * (exact - trunc), n ** (m - nu)) if m >= nu \
        else Fraction((-1) ** nu * (exact - trunc)) * n ** (nu - m)
    if not 0 <= r <= stirling_unsigned(m, nu):
        raise AssertionError(f"remainder {r} outside [0, A_{nu}] for n={n}, m={m}")
    return trunc, r


def _to_falling_basis(poly: RationalPolynomial) -> dict[int, Fraction]:
    """Rewrite a polynomial in m as sum_j c_j (m)_j, highest degree first.

    This is the triangular back-substitution behind the coefficient solver:
    (m)_j is monic of degree j, so the top power-basis coefficient determines
    c_deg, and the remainder has strictly smaller degree.
    """
    work = list(poly.coeffs)
    out: dict[int, Fraction] = {}
    for j in range(len(work) - 1, -1, -1):
        c = work[j]
        out[j] = c
        if c:
            ff = RationalPolynomial((Fraction(1),))
            for i in range(j):
                ff = ff * RationalPolynomial((Fraction(-i), Fraction(1)))
            for d, fc in enumerate(ff.coeffs):
                work[d] -= c * fc
    if any(work):
        raise AssertionError("falling-factorial conversion left a nonzero residue")
    return {j: c for j, c in out.items() if c != 0}


@dataclass(frozen=True)
class GammaTable:
    """Correction coefficients gamma_j(nu), exact polynomials in 1/n.

    ``entries[j]`` is a RationalPolynomial in the variable 1/n (coefficient
    index = power of 1/n, constant term always zero), for j = 2..2 nu - 2.
    """

    nu: int
    entries: dict[int, RationalPolynomial]

    def gamma_at(self, j: int, n: int) -> Fraction:
        poly = self.entries.get(j)
        return poly.eval_exact(Fraction(1, n)) if poly is not None else Fraction(0)

    def to_json_dict(self) -> dict:
        return {
            "nu": self.nu,
            "gamma": {
                str(j): [[k, str(c)] for k, c in enumerate(poly.coeffs) if c != 0]
                for j, poly in sorted(self.entries.items())
            },
        }


def solve_gamma_table(nu: int) -> GammaTable:
    """Exact gamma_j(nu) for the equal-probability corrected measure.

    Equates the nu-term truncation of (n)_m / n^m, namely
    1 - A_1/n + A_2/n^2 - ... +- A_(nu-1)/n^(nu-1), with the moment factor
    1 - sum_j gamma_j (m)_j, as polynomial identities in m of degree
    2 nu - 2.  Each A_k contributes its falling-factorial expansion to the
    n^(-k) coefficient of gamma_j.
    """
    if not 2 <= nu <= 8:
        raise ValueError("supported truncation orders are 2..8")
    entries: dict[int, dict[int, Fraction]] = {j: {} for j in range(2, 2 * nu - 1)}
    for k in range(1, nu):
        for j, c in _to_falling_basis(stirling_poly(k)).items():
            if j < 2:
                raise AssertionError("A_k must have no constant or linear falling part")
            entries[j][k] = (-1) ** (k - 1) * c
    polys = {}
    for j, powers in entries.items():
        if not powers:
            continue
        top = max(powers)
        coeffs = [powers.get(i, Fraction(0)) for i in range(top + 1)]
        polys[j] = RationalPolynomial(tuple(coeffs))
    table = GammaTable(nu, polys)
    if table.entries[2].coeffs != (Fraction(0), Fraction(1, 2)):
        raise AssertionError("gamma_2 must equal 1/(2n) for every order")
    return table


def gamma_floats(nu: int, n: int) -> dict[int, float]:
    """gamma_j(nu) evaluated at a concrete n, as floats keyed by degree j."""
    if nu == 1:
        return {}
    table = solve_gamma_table(nu)
    return {j: float(table.gamma_at(j, n)) for j in sorted(table.entries)}


# Coefficient listing as printed in the published table for this correction
# family (j: {power of 1/n: coefficient}); columns for successive orders
# extend each other, so the cumulative form below carries the whole table.
PUBLISHED_GAMMA_TABLE: dict[int, dict[int, Fraction]] = {
    2: {1: Fraction(1, 2)},
    3: {2: Fraction(-1, 3)},
    4: {2: Fraction(-1, 8), 3: Fraction(1, 4)},
    5: {3: Fraction(1, 6), 4: Fraction(-1, 5)},
    6: {3: Fraction(1, 48), 4: Fraction(-13, 72), 5: Fraction(1, 6)},
    7: {4: Fraction(-1, 24), 5: Fraction(11, 60), 6: Fraction(-1, 7)},
    8: {4: Fraction(-1, 384), 5: Fraction(17, 388), 6: Fraction(-29, 160)},
    9: {5: Fraction(1, 144), 6: Fraction(-59, 810)},
    10: {5: Fraction(1, 3840), 6: Fraction(-7, 576)},
    11: {6: Fraction(-1, 1152)},
    12: {6: Fraction(-1, 46080)},
}

# Entries flagged as likely misprints (solver output is authoritative either
# way; the flag only distinguishes "known suspect" from "new disagreement").
SUSPECT_PUBLISHED_ENTRIES: frozenset[tuple[int, int]] = frozenset({(8, 5)})


def compare_with_published(nu: int) -> list[dict]:
    """Diff the solved table for order nu against the published listing.

    Returns one record per disagreeing (j, 1/n-power) cell with both values
    as exact rational strings.  Agreement everywhere yields an empty list.
    """
    table = solve_gamma_table(nu)
    mismatches = []
    for j in range(2, 2 * nu - 1):
        poly = table.entries.get(j)
        solved = {
            k: c for k, c in enumerate(poly.coeffs if poly is not None else ()) if c != 0
        }
        printed = {k: c for k, c in PUBLISHED_GAMMA_TABLE.get(j, {}).items() if k <= nu - 1}
        for k in sorted(set(solved) | set(printed)):
            a, b = printed.get(k), solved.get(k)
            if a != b:
                mismatches.append({
                    "j": j,
                    "power": k,
                    "published": str(a) if a is not None else None,
                    "computed": str(b) if b is not None else None,
                    "flagged_suspect": (j, k) in SUSPECT_PUBLISHED_ENTRIES,
                })
    return mismatches


def q_polynomial(nu: int) -> RationalPolynomial:
    """Q_nu, exactly, from the integral recurrence

        Q_(nu+1)(lam) = 2 Q_nu(lam) + 2 int_0^1 y^(nu+2) (2 lam y - 1) Q_nu(lam y) dy

    starting from Q_0 = 1.  On coefficients: a term c lam^i contributes
    c lam^i (2 lam / (nu+i+4) - 1 / (nu+i+3)) to the integral.
    """
    if nu < 0:
        raise ValueError("nu must be >= 0")
    q = RationalPolynomial((Fraction(1),))
    for s in range(nu):
        parts = [Fraction(0)] * (q.degree + 2)
        for i, c in enumerate(q.coeffs):
            parts[i + 1] += c * Fraction(2, s + i + 4)
            parts[i] -= c * Fraction(1, s + i + 3)
        q = q.scale(2) + RationalPolynomial(tuple(parts)).scale(2)
    return q


def c_constant_series(nu: int, lam: float, rel_tol: float = 1e-14) -> tuple[float, float]:
    """The distance constant as the series (1/2) sum_m (2 lam)^m / m! A_nu(m-1).

    Returns (value, tail_bound); the tail bound is twice the last retained
    term, valid once consecutive terms certifiably at least halve.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if lam <= 0:
        raise ValueError("lam must be positive")
    total = 0.0
    w = 1.0  # (2 lam)^m / m!
    m = 0
    last = math.inf
    while True:
        term = w * stirling_unsigned(m, nu) if m >= nu else 0.0
        total += term
        w *= 2.0 * lam / (m + 1)
        m += 1
        if m > nu + 2 and term > 0:
            if m > 4 * lam + 2 * nu + 4 and term <= 0.5 * last and term <= rel_tol * total:
                return 0.5 * total, term
            last = term
        if m > 10_000:
            raise RuntimeError("series failed to converge")


def c_constant(nu: int, lam: float) -> float:
    """Closed form lam^(nu+1) e^(2 lam) Q_(nu-1)(lam).

    Cross-checked against the Stirling-number series before returning; a
    disagreement beyond the series tail bound is an internal error.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    if lam <= 0:
        raise ValueError("lam must be positive")
    value = lam ** (nu + 1) * math.exp(2.0 * lam) * q_polynomial(nu - 1).eval_float(lam)
    series, tail = c_constant_series(nu, lam)
    if abs(value - series) > tail + 1e-10 * abs(value):
        raise RuntimeError(
            f"closed form {value} and series {series} disagree beyond tolerance"
        )
    return value
