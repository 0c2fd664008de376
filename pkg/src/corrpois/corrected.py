"""Corrected Poisson signed measures.

A corrected measure of order nu multiplies the Poisson(lam) mass by the
polynomial factor 1 - sum_{j=2}^{2nu-2} gamma_j P_j(k).  Because every P_j
integrates to zero against the Poisson weight, the result always sums to 1,
but it may dip negative: it is a signed measure, not a distribution.  Its
payoff is an exact factorial moment sequence

    mu_m = lam^m (1 - sum_j gamma_j (m)_j),

which the orders nu = 2, 3 use to match the moments of S_n:

  * order 2: gamma_2 = lambda_2 / (2 lam^2), matching mean and variance;
  * order 3: additionally gamma_3 = -lambda_3 / (3 lam^3) and
    gamma_4 = -lambda_2^2 / (8 lam^4), matching moments up to order three.

The sign convention is fixed once and for all by the (1 - sum gamma_j P_j)
form above; the order-3 coefficients come out negative so that the P_3 and
P_4 corrections enter with plus signs.  The difference
mu_4 - mu_4(S_n) = 6 lambda_4 pins the convention in the tests.

A simplified order-3 variant keeps only the P_2 and P_3 corrections.  It
matches moments up to order three as well, yet approximates S_n markedly
worse (its rate degrades by one full power of n in the binomial case), which
is exactly what makes it interesting as a counterexample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .charlier import charlier, charlier_values, falling_factorial
from .pmf import (
    FactorialMoments,
    ProbVector,
    SignedPmf,
    poisson_pmf,
    poisson_tail_bound,
    power_sums,
)

__all__ = [
    "CorrectionSpec",
    "CorrectedMeasure",
    "spec_poisson",
    "spec_phi2",
    "spec_phi3",
    "spec_phi3_tilde",
    "build_phi_nu",
    "build_phi2",
    "build_phi3",
    "build_phi3_tilde",
    "invert_moments",
]

MOMENT_MATCHED = "moment-matched-from-ProbVector"
BINOMIAL_CLOSED_FORM = "binomial-closed-form"
USER_SUPPLIED = "user-supplied"


@dataclass(frozen=True)
class CorrectionSpec:
    """Order, mean and correction coefficients of a corrected measure.

    ``gamma`` maps polynomial degree j (2 <= j <= 2 nu - 2) to the
    coefficient gamma_j; missing degrees count as zero, and an empty map
    (forced when nu = 1) is the plain Poisson.
    """

    nu: int
    lam: float
    gamma: Mapping[int, float] = field(default_factory=dict)
    provenance: str = USER_SUPPLIED

    def __post_init__(self) -> None:
        if self.nu < 1:
            raise ValueError("order nu must be >= 1")
        if not self.lam > 0:
            raise ValueError("corrected measures require a positive mean")
        gamma = {int(j): float(g) for j, g in self.gamma.items() if g != 0.0}
        for j in gamma:
            if not 2 <= j <= 2 * self.nu - 2:
                raise ValueError(f"gamma degree {j} outside 2..{2 * self.nu - 2}")
        object.__setattr__(self, "gamma", gamma)

    @property
    def degree(self) -> int:
        """Highest correction degree present (0 for plain Poisson)."""
        return max(self.gamma, default=0)

    def density_factor(self, m: int) -> float:
        """1 - sum_j gamma_j (m)_j, the factor multiplying lam^m in mu_m."""
        return math.fsum([1.0] + [-g * falling_factorial(m, j) for j, g in self.gamma.items()])

    def moments(self) -> FactorialMoments:
        """Closed-form factorial moments lam^m (1 - sum_j gamma_j (m)_j)."""
        lam = self.lam

        def mu(m: int) -> float:
            return lam**m * self.density_factor(m)

        return FactorialMoments(mu, exact_upto=None, degree=self.degree)


def spec_poisson(lam: float) -> CorrectionSpec:
    """Order-1 spec: no correction, plain Poisson(lam)."""
    return CorrectionSpec(1, lam, {}, MOMENT_MATCHED)


def spec_phi2(p: ProbVector) -> CorrectionSpec:
    """Variance-matching order-2 spec for the given indicator probabilities."""
    ps = power_sums(p, 2)
    lam = ps.lam
    if not lam > 0:
        raise ValueError("corrected measures require a positive mean")
    return CorrectionSpec(2, lam, {2: ps[2] / (2.0 * lam**2)}, MOMENT_MATCHED)


def spec_phi3(p: ProbVector) -> CorrectionSpec:
    """Order-3 spec matching the factorial moments of S_n up to order three."""
    ps = power_sums(p, 3)
    lam = ps.lam
    if not lam > 0:
        raise ValueError("corrected measures require a positive mean")
    gamma = {
        2: ps[2] / (2.0 * lam**2),
        3: -ps[3] / (3.0 * lam**3),
        4: -ps[2] ** 2 / (8.0 * lam**4),
    }
    return CorrectionSpec(3, lam, gamma, MOMENT_MATCHED)


def spec_phi3_tilde(p: ProbVector) -> CorrectionSpec:
    """Simplified order-3 spec: P_2 and P_3 corrections only."""
    ps = power_sums(p, 3)
    lam = ps.lam
    if not lam > 0:
        raise ValueError("corrected measures require a positive mean")
    gamma = {
        2: ps[2] / (2.0 * lam**2),
        3: -ps[3] / (3.0 * lam**3),
    }
    return CorrectionSpec(3, lam, gamma, MOMENT_MATCHED)


@dataclass(frozen=True)
class CorrectedMeasure:
    spec: CorrectionSpec
    pmf: SignedPmf
    moments: FactorialMoments


def _tail_bound(spec: CorrectionSpec, kmax: int) -> float:
    """Poisson tail beyond kmax, inflated by the correction polynomial.

    The corrections grow polynomially while the Poisson tail dies
    superexponentially; a lookahead envelope of max |P_j| over the next 50
    points absorbs the polynomial growth.
    """
    env = 1.0
    for j, g in spec.gamma.items():
        pj = max(abs(charlier(j, spec.lam, k)) for k in range(kmax + 1, kmax + 51))
        env += abs(g) * pj
    return poisson_tail_bound(spec.lam, kmax + 1) * env


def _auto_kmax(spec: CorrectionSpec) -> int:
    k = max(16, math.ceil(spec.lam + 10.0 * math.sqrt(spec.lam)))
    while _tail_bound(spec, k) >= 1e-13:
        k *= 2
        if k > 1_000_000:
            raise RuntimeError("tail bound failed to converge; mean too large?")
    return k


def build_phi_nu(spec: CorrectionSpec, kmax: int | None = None,
                 label: str | None = None) -> CorrectedMeasure:
    """Corrected measure of arbitrary order from an explicit coefficient spec."""
    if kmax is None:
        kmax = _auto_kmax(spec)
    pois = poisson_pmf(spec.lam, kmax)
    if spec.gamma:
        rows = [charlier_values(j, spec.lam, kmax) * (-g) for j, g in sorted(spec.gamma.items())]
        factor = np.array([math.fsum([1.0] + [r[k] for r in rows]) for k in range(kmax + 1)])
    else:
        factor = np.ones(kmax + 1)
    mass = pois.mass * factor
    if label is None:
        label = f"phi{spec.nu}" if spec.gamma or spec.nu == 1 else "poisson"
    pmf = SignedPmf(mass, _tail_bound(spec, kmax), label)
    return CorrectedMeasure(spec, pmf, spec.moments())


def build_phi2(p: ProbVector, kmax: int | None = None) -> CorrectedMeasure:
    """Order-2 corrected measure for S_n (variance matching)."""
    return build_phi_nu(spec_phi2(p), kmax, label="phi2")


def build_phi3(p: ProbVector, kmax: int | None = None) -> CorrectedMeasure:
    """Order-3 corrected measure for S_n (moments matched up to order 3)."""
    return build_phi_nu(spec_phi3(p), kmax, label="phi3")


def build_phi3_tilde(p: ProbVector, kmax: int | None = None) -> CorrectedMeasure:
    """Simplified order-3 corrected measure (P_2, P_3 corrections only)."""
    return build_phi_nu(spec_phi3_tilde(p), kmax, label="phi3-tilde")


def invert_moments(moments: FactorialMoments, kmax: int, mmax: int | None = None) -> SignedPmf:
    """Recover a mass function from its factorial moments.

    Applies g(k) = (1/k!) sum_{m>=k} (-1)^(m-k) mu_m / (m-k)!, truncating the
    alternating series at mmax.  The magnitude of the first omitted term,
    summed over k, is folded into the recorded tail bound together with the
    mass deficit of the truncated support.
    """
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    if mmax is None:
        mmax = max(moments.mmax_hint, 60)
    if mmax < kmax:
        raise ValueError("mmax must be at least kmax")
    mu = [moments(m) for m in range(mmax + 2)]
    mass = np.empty(kmax + 1)
    remainder = 0.0
    inv_fact_k = 1.0  # 1/k!
    for k in range(kmax + 1):
        if k > 0:
            inv_fact_k /= k
        terms = []
        w = 1.0  # (-1)^(m-k) / (m-k)!
        for m in range(k, mmax + 1):
            terms.append(w * mu[m])
            w = -w / (m + 1 - k)
        mass[k] = inv_fact_k * math.fsum(terms)
        remainder += inv_fact_k * abs(w * mu[mmax + 1])
    deficit = abs(1.0 - math.fsum(mass.tolist()))
    return SignedPmf(mass, deficit + remainder, "inverted")
