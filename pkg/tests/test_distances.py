import math

import numpy as np
import pytest

from corrpois import (
    ProbVector,
    SignedPmf,
    build_phi2,
    build_phi_nu,
    certify_domination,
    d2,
    d2_exact_product,
    d2_tilde,
    factorial_moments_sn,
    hellinger,
    poisson_binomial_pmf,
    poisson_pmf,
    power_sums,
    spec_phi2,
    spec_phi3,
    spec_phi3_tilde,
    spec_poisson,
    tv,
    wasserstein,
    weighted_l1,
)

P123 = ProbVector((0.1, 0.2, 0.3))


def point_mass(at, size):
    mass = np.zeros(size)
    mass[at] = 1.0
    return SignedPmf(mass, 0.0, f"delta{at}")


class TestTotalVariation:
    def test_identical_inputs(self):
        pmf = poisson_pmf(1.0, 20)
        assert tv(pmf, pmf).value == 0.0

    def test_bernoulli_vs_poisson_closed_form(self):
        p = 0.3
        fn = poisson_binomial_pmf(ProbVector((p,)))
        pois = poisson_pmf(p, 60)
        got = tv(fn, pois)
        want = p * (1.0 - math.exp(-p))
        assert got.value == pytest.approx(want, abs=1e-12)
        assert got.value == pytest.approx(0.0777545, abs=1e-6)

    def test_symmetry_and_padding(self):
        a = poisson_pmf(1.0, 15)
        b = poisson_pmf(2.0, 40)
        assert tv(a, b).value == tv(b, a).value

    def test_triangle_inequality(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            pmfs = [
                poisson_binomial_pmf(
                    ProbVector(tuple(rng.uniform(0, 1, rng.integers(1, 9)).tolist())))
                for _ in range(3)
            ]
            ab = tv(pmfs[0], pmfs[1]).value
            bc = tv(pmfs[1], pmfs[2]).value
            ac = tv(pmfs[0], pmfs[2]).value
            assert ac <= ab + bc + 1e-14

    def test_classic_lower_bound(self):
        # min(1, 1/lam)/32 * l2 <= tv(f_n, Poisson)
        rng = np.random.default_rng(67)
        for _ in range(20):
            p = ProbVector(tuple(rng.uniform(0, 0.9, rng.integers(1, 12)).tolist()))
            ps = power_sums(p, 2)
            fn = poisson_binomial_pmf(p)
            pois = poisson_pmf(ps.lam, fn.support_max + 80)
            lower = min(1.0, 1.0 / ps.lam) / 32.0 * ps[2]
            assert lower <= tv(fn, pois).value + 1e-12


class TestD2:
    def test_identical_moments(self):
        mu = factorial_moments_sn(P123)
        assert d2(mu, mu).value == 0.0

    def test_single_indicator_closed_form(self):
        p = 0.5
        mu = factorial_moments_sn(ProbVector((p,)))
        pois = spec_poisson(p).moments()
        got = d2(mu, pois)
        want = 0.5 * (math.exp(2 * p) - 1.0 - 2.0 * p)
        assert got.value == pytest.approx(want, rel=1e-13)
        assert got.value == pytest.approx(0.359141, abs=1e-6)

    def test_poisson_bound(self):
        # d2(f_n, Poisson) <= e^(2 lam) l2
        rng = np.random.default_rng(71)
        for _ in range(20):
            p = ProbVector(tuple(rng.uniform(0, 0.5, rng.integers(1, 12)).tolist()))
            ps = power_sums(p, 2)
            val = d2(factorial_moments_sn(p), spec_poisson(ps.lam).moments()).value
            assert val <= math.exp(2 * ps.lam) * ps[2] * (1 + 1e-9)

    def test_truncation_flagged_when_cap_too_small(self):
        mu = factorial_moments_sn(P123)
        pois = spec_poisson(P123.lam).moments()
        res = d2(mu, pois, mmax=4)
        assert math.isinf(res.truncation_error)
        assert "not certified" in res.note


class TestD2ExactProduct:
    def test_poisson_case_closed_form(self):
        spec = spec_poisson(P123.lam)
        got = d2_exact_product(P123, spec)
        prod = math.prod(1 + 2 * x for x in P123.probs)
        want = 0.5 * (math.exp(2 * P123.lam) - prod)
        assert got.method == "exact-product"
        assert got.value == pytest.approx(want, rel=1e-12)

    def test_matches_series_for_phi2(self):
        series = d2(factorial_moments_sn(P123), spec_phi2(P123).moments())
        exact = d2_exact_product(P123, spec_phi2(P123))
        assert abs(series.value - exact.value) <= 1e-12 * exact.value

    def test_single_indicator_phi2_both_ways(self):
        p = ProbVector((0.5,))
        spec = spec_phi2(p)
        exact = d2_exact_product(p, spec)
        series = d2(factorial_moments_sn(p), spec.moments())
        assert exact.value == pytest.approx(series.value, rel=1e-12)

    def test_domination_signs(self):
        assert certify_domination(P123, spec_poisson(P123.lam)) == -1
        assert certify_domination(P123, spec_phi2(P123)) == 1
        assert certify_domination(P123, spec_phi3(P123)) == -1

    def test_refuses_on_sign_change(self):
        # the simplified order-3 coefficients break one-sided domination:
        # the moment difference starts positive and turns negative once the
        # cubic correction term overtakes the quadratic one
        p = ProbVector((0.3,) * 10)
        spec = spec_phi3_tilde(p)
        with pytest.raises(ValueError):
            certify_domination(p, spec)
        with pytest.warns(UserWarning):
            res = d2_exact_product(p, spec)
        assert res.method == "moment-series"
        assert "sign change" in res.note


class TestD2Tilde:
    def test_identical_moments(self):
        mu = factorial_moments_sn(P123)
        assert d2_tilde(mu, mu).value == 0.0

    def test_single_indicator_closed_form(self):
        p = 0.5
        mu = factorial_moments_sn(ProbVector((p,)))
        pois = spec_poisson(p).moments()
        got = d2_tilde(mu, pois)
        want = p * (math.exp(2 * p) - 1.0)
        assert got.value == pytest.approx(want, rel=1e-13)
        assert got.value == pytest.approx(0.859141, abs=1e-6)

    def test_classic_bound(self):
        rng = np.random.default_rng(73)
        for _ in range(20):
            p = ProbVector(tuple(rng.uniform(0, 0.5, rng.integers(1, 12)).tolist()))
            ps = power_sums(p, 2)
            val = d2_tilde(factorial_moments_sn(p), spec_poisson(ps.lam).moments()).value
            assert val <= 2 * (1 + ps.lam) * math.exp(2 * ps.lam) * ps[2] * (1 + 1e-9)


class TestWasserstein:
    def test_identical(self):
        pmf = poisson_pmf(1.0, 20)
        assert wasserstein(pmf, pmf).value == 0.0

    def test_point_masses(self):
        assert wasserstein(point_mass(0, 4), point_mass(3, 4)).value == pytest.approx(3.0)

    def test_dominated_by_d2_tilde(self):
        rng = np.random.default_rng(79)
        for _ in range(25):
            p = ProbVector(tuple(rng.uniform(0, 0.8, rng.integers(1, 13)).tolist()))
            fn = poisson_binomial_pmf(p)
            pois = poisson_pmf(p.lam, fn.support_max + 80)
            dw = wasserstein(fn, pois).value
            dt = d2_tilde(factorial_moments_sn(p), spec_poisson(p.lam).moments()).value
            assert dw <= dt * (1 + 1e-9) + 1e-12


class TestHellinger:
    def test_identical(self):
        pmf = poisson_pmf(2.0, 40)
        assert hellinger(pmf, pmf).value == 0.0

    def test_rejects_signed_input(self):
        phi = build_phi2(ProbVector((0.4, 0.4)))
        pois = poisson_pmf(0.8, phi.pmf.support_max)
        assert not phi.pmf.is_proper
        with pytest.raises(ValueError):
            hellinger(phi.pmf, pois)

    def test_chain_to_total_variation(self):
        rng = np.random.default_rng(83)
        for _ in range(25):
            p = ProbVector(tuple(rng.uniform(0, 0.9, rng.integers(1, 12)).tolist()))
            fn = poisson_binomial_pmf(p)
            pois = poisson_pmf(p.lam, fn.support_max + 80)
            dh = hellinger(fn, pois).value
            dtv = tv(fn, pois).value
            assert dtv <= dh * math.sqrt(2 - dh**2) + 1e-10

    def test_cubic_power_sum_bound(self):
        rng = np.random.default_rng(89)
        for _ in range(25):
            p = ProbVector(tuple(rng.uniform(0, 0.9, rng.integers(1, 12)).tolist()))
            fn = poisson_binomial_pmf(p)
            pois = poisson_pmf(p.lam, fn.support_max + 80)
            dh = hellinger(fn, pois).value
            rhs = math.fsum(x**3 / (1 - x) for x in p.probs) / p.lam
            assert dh**2 <= rhs + 1e-12


class TestWeightedL1:
    def test_unit_weight_is_twice_tv(self):
        fn = poisson_binomial_pmf(P123)
        pois = poisson_pmf(P123.lam, 50)
        w = weighted_l1(lambda k: 1.0, fn, pois)
        assert w.value == pytest.approx(2 * tv(fn, pois).value, rel=1e-12)

    def test_rejects_negative_weight(self):
        fn = poisson_binomial_pmf(P123)
        pois = poisson_pmf(P123.lam, 50)
        with pytest.raises(ValueError):
            weighted_l1(lambda k: -1.0, fn, pois)

    @pytest.mark.parametrize("weight,wdesc", [(lambda k: float(k), "k"),
                                              (lambda k: float(k * k), "k^2")])
    def test_poisson_weighted_bound(self, weight, wdesc):
        # sum h |f_n - poisson| <= e^(2lam)/(2lam^2)
        #     E[h(Z)(Z^2 + (2lam-1)Z + lam^2)] * l2
        rng = np.random.default_rng(97)
        for _ in range(10):
            p = ProbVector(tuple(rng.uniform(0, 0.6, 8).tolist()))
            ps = power_sums(p, 2)
            lam = ps.lam
            fn = poisson_binomial_pmf(p)
            kmax = fn.support_max + 100
            pois = poisson_pmf(lam, kmax)
            got = weighted_l1(weight, fn, pois).value
            expect = math.fsum(
                pois.mass[k] * weight(k) * (k**2 + (2 * lam - 1) * k + lam**2)
                for k in range(kmax + 1)
            )
            rhs = math.exp(2 * lam) / (2 * lam**2) * expect * ps[2]
            assert got <= rhs * (1 + 1e-9)


class TestMetricAxioms:
    def test_nonnegative_and_zero_on_equal(self):
        fn = poisson_binomial_pmf(P123)
        for metric in (tv, wasserstein):
            assert metric(fn, fn).value == 0.0

    def test_symmetry(self):
        fn = poisson_binomial_pmf(P123)
        pois = poisson_pmf(P123.lam, 40)
        for metric in (tv, wasserstein, hellinger):
            assert metric(fn, pois).value == metric(pois, fn).value
        mu1 = factorial_moments_sn(P123)
        mu2 = spec_poisson(P123.lam).moments()
        assert d2(mu1, mu2).value == d2(mu2, mu1).value
        assert d2_tilde(mu1, mu2).value == d2_tilde(mu2, mu1).value

    def test_tv_le_d2_against_corrections(self):
        rng = np.random.default_rng(101)
        for _ in range(20):
            p = ProbVector(tuple(rng.uniform(0, 0.5, rng.integers(1, 13)).tolist()))
            fn = poisson_binomial_pmf(p)
            mu = factorial_moments_sn(p)
            for spec in (spec_poisson(p.lam), spec_phi2(p), spec_phi3(p)):
                phi = build_phi_nu(spec)
                lhs = tv(fn, phi.pmf).value
                rhs = d2(mu, spec.moments()).value
                assert lhs <= rhs * (1 + 1e-9) + 1e-12
