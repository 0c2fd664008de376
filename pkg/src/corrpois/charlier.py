"""Poisson-Charlier orthogonal polynomials at a fixed mean.

P_m is evaluated through its explicit triangular expansion

    P_m(k) = sum_{j=0}^m (-1)^(m-j) C(m, j) lam^(m-j) (k)_j,

not a three-term recurrence: degrees stay small (m <= 12 everywhere in this
package) and the explicit sum is the directly checkable definition.  The
recurrence is kept in the test-suite as an independent oracle.

The module also provides numeric verification of the two identities the rest
of the package leans on: orthogonality E P_m(Z) P_nu(Z) = m! lam^m delta and
the covariance identity E P_m(Z) g(Z) = lam^m E D^m g(Z), where D is the
forward difference operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .pmf import poisson_pmf, poisson_tail_bound

__all__ = [
    "falling_factorial",
    "charlier",
    "charlier_values",
    "default_kmax",
    "OrthogonalityReport",
    "CovarianceReport",
    "orthogonality_check",
    "covariance_identity_check",
]


def falling_factorial(k: int, m: int) -> float:
    """(k)_m = k (k-1) ... (k-m+1), with (k)_0 = 1; zero when m > k >= 0."""
    if k < 0 or m < 0:
        raise ValueError("falling factorial requires k >= 0 and m >= 0")
    out = 1.0
    for i in range(m):
        out *= k - i
    return out


def charlier(m: int, lam: float, k: int) -> float:
    """Value of the degree-m Charlier polynomial at integer k."""
    if m < 0 or k < 0:
        raise ValueError("require m >= 0 and k >= 0")
    if lam <= 0:
        raise ValueError("lam must be positive")
    terms = []
    ff = 1.0  # (k)_j
    for j in range(m + 1):
        terms.append((-1.0) ** (m - j) * math.comb(m, j) * lam ** (m - j) * ff)
        ff *= k - j
    return math.fsum(terms)


def charlier_values(m: int, lam: float, kmax: int) -> np.ndarray:
    """P_m(k) for k = 0..kmax, one compensated sum per point."""
    if m < 0 or kmax < 0:
        raise ValueError("require m >= 0 and kmax >= 0")
    if lam <= 0:
        raise ValueError("lam must be positive")
    ks = np.arange(kmax + 1, dtype=float)
    ff = np.ones((m + 1, kmax + 1))
    for j in range(1, m + 1):
        ff[j] = ff[j - 1] * (ks - (j - 1))
    coef = [(-1.0) ** (m - j) * math.comb(m, j) * lam ** (m - j) for j in range(m + 1)]
    out = np.array(
        [math.fsum(coef[j] * ff[j, k] for j in range(m + 1)) for k in range(kmax + 1)]
    )
    out.flags.writeable = False
    return out


def default_kmax(lam: float, degree: int) -> int:
    """Truncation point for expectations of degree-`degree` polynomials.

    Polynomial-times-Poisson tails decay superexponentially past
    lam + 20 sqrt(lam) + 4*degree; a Chernoff tail bound is attached to each
    report so the truncation stays honest.
    """
    return max(50, math.ceil(lam + 20.0 * math.sqrt(lam) + 4 * degree))


def _poly_tail_envelope(lam: float, kmax: int, values: Callable[[int], float]) -> float:
    """Tail estimate: Chernoff mass beyond kmax times a lookahead envelope."""
    env = max(abs(values(k)) for k in range(kmax + 1, kmax + 51))
    return poisson_tail_bound(lam, kmax + 1) * (1.0 + env)


@dataclass(frozen=True)
class OrthogonalityReport:
    m: int
    nu: int
    lam: float
    value: float
    expected: float
    deviation: float
    tail_bound: float
    kmax: int
    within_tol: bool


@dataclass(frozen=True)
class CovarianceReport:
    m: int
    lam: float
    lhs: float
    rhs: float
    difference: float
    tail_bound: float
    kmax: int


def orthogonality_check(m: int, nu: int, lam: float, tol: float = 1e-9) -> OrthogonalityReport:
    """Compare the truncated sum E P_m(Z) P_nu(Z) with m! lam^m delta_{m,nu}."""
    if m > 12 or nu > 12:
        raise ValueError("orthogonality check supports degrees up to 12")
    if lam > 10:
        raise ValueError("orthogonality check supports lam <= 10")
    kmax = default_kmax(lam, m + nu)
    pois = poisson_pmf(lam, kmax)
    pm = charlier_values(m, lam, kmax)
    pn = pm if nu == m else charlier_values(nu, lam, kmax)
    value = math.fsum(pois.mass[k] * pm[k] * pn[k] for k in range(kmax + 1))
    expected = math.factorial(m) * lam**m if m == nu else 0.0
    tail = _poly_tail_envelope(lam, kmax, lambda k: charlier(m, lam, k) * charlier(nu, lam, k))
    dev = abs(value - expected)
    return OrthogonalityReport(m, nu, lam, value, expected, dev, tail, kmax,
                               dev <= tol + tail)


def forward_difference(g: Callable[[int], float], m: int, k: int) -> float:
    """m-th iterated forward difference of g at k."""
    vals = [g(k + i) for i in range(m + 1)]
    for _ in range(m):
        vals = [vals[i + 1] - vals[i] for i in range(len(vals) - 1)]
    return vals[0]


def covariance_identity_check(m: int, lam: float, g: Callable[[int], float],
                              kmax: int | None = None) -> CovarianceReport:
    """Evaluate both sides of E P_m(Z) g(Z) = lam^m E D^m g(Z), truncated.

    g must be evaluable on 0..kmax+m.  Both expectations are truncated at
    kmax and the recorded tail bound covers the Poisson mass left out
    (times a polynomial envelope for the left side).
    """
    if m < 0:
        raise ValueError("m must be >= 0")
    if lam <= 0:
        raise ValueError("lam must be positive")
    if kmax is None:
        kmax = default_kmax(lam, m)
    pois = poisson_pmf(lam, kmax)
    pm = charlier_values(m, lam, kmax)
    lhs = math.fsum(pois.mass[k] * pm[k] * g(k) for k in range(kmax + 1))
    rhs = lam**m * math.fsum(
        pois.mass[k] * forward_difference(g, m, k) for k in range(kmax + 1)
    )
    tail = _poly_tail_envelope(
        lam, kmax, lambda k: charlier(m, lam, k) * g(k)
    )
    return CovarianceReport(m, lam, lhs, rhs, lhs - rhs, tail, kmax)
