import math
import random
from fractions import Fraction as F

import pytest

from tvbounds import (
    HypothesisError,
    InvalidDistributionError,
    NotApplicableError,
    family_geometric,
    family_poisson,
    is_log_concave,
    make_dist,
    tv_distance,
)
from tvbounds.compound import (
    CompoundGeometricSpec,
    CompoundPoissonSpec,
    compound_geometric_pmf,
    compound_poisson_pmf,
    compound_poisson_pmf_mixture,
    geometric_bound_compound_geometric,
    geometric_bound_compound_poisson,
    log_concave_criterion,
)


def random_log_concave_severity(rng, length):
    ratios = sorted((rng.uniform(0.1, 1.5) for _ in range(length - 1)), reverse=True)
    masses = [1.0]
    for r in ratios:
        masses.append(masses[-1] * r)
    return make_dist(0, masses)


class TestCompoundPoissonPMF:
    def test_degenerate_severity(self):
        spec = CompoundPoissonSpec(2.0, make_dist(0, (1.0,)))
        pmf = compound_poisson_pmf(spec)
        assert pmf.mass(0) == pytest.approx(1.0)

    def test_bernoulli_thinning_is_poisson(self):
        spec = CompoundPoissonSpec(3.0, make_dist(0, (0.7, 0.3)))
        pmf = compound_poisson_pmf(spec)
        target = family_poisson(0.9, 1e-14)
        for k in range(len(pmf.masses)):
            assert pmf.mass(k) == pytest.approx(target.mass(k), abs=1e-12)

    def test_shifted_severity_scales_support(self):
        # severity concentrated at 2: mass only on even values, Poisson weights
        spec = CompoundPoissonSpec(1.0, make_dist(0, (0.0, 0.0, 1.0)))
        pmf = compound_poisson_pmf(spec)
        for k in range(10):
            expect = math.exp(-1) / math.factorial(k // 2) if k % 2 == 0 else 0.0
            assert pmf.mass(k) == pytest.approx(expect, abs=1e-12)

    def test_recursion_matches_mixture_oracle(self):
        rng = random.Random(23)
        for _ in range(12):
            sev = random_log_concave_severity(rng, rng.randint(1, 5))
            spec = CompoundPoissonSpec(rng.uniform(0.2, 4.0), sev)
            a = compound_poisson_pmf(spec)
            b = compound_poisson_pmf_mixture(spec)
            for k in range(max(len(a.masses), len(b.masses))):
                assert a.mass(k) == pytest.approx(b.mass(k), abs=1e-12)

    def test_rate_validation(self):
        with pytest.raises(InvalidDistributionError):
            CompoundPoissonSpec(0.0, make_dist(0, (1.0,)))


class TestLogConcaveCriterion:
    def test_bernoulli_severity_holds(self):
        assert log_concave_criterion(CompoundPoissonSpec(3.0, make_dist(0, (0.7, 0.3)))).holds

    def test_severity_not_log_concave_is_distinct_failure(self):
        with pytest.raises(HypothesisError):
            log_concave_criterion(CompoundPoissonSpec(0.1, make_dist(0, (0.5, 0.2, 0.3))))

    def test_rate_threshold(self):
        # log-concave severity; aggregate log-concave iff lam F_1^2 >= 2 F_2
        sev = make_dist(0, (0.55, 0.3, 0.15))
        threshold = 2 * 0.15 / 0.3**2
        assert not log_concave_criterion(CompoundPoissonSpec(threshold * 0.9, sev)).holds
        assert log_concave_criterion(CompoundPoissonSpec(threshold * 1.1, sev)).holds

    def test_criterion_predicts_pmf_shape(self):
        sev = make_dist(0, (0.55, 0.3, 0.15))
        threshold = 2 * 0.15 / 0.3**2
        good = compound_poisson_pmf(CompoundPoissonSpec(threshold * 1.2, sev))
        assert is_log_concave(good).holds
        bad = compound_poisson_pmf(CompoundPoissonSpec(threshold * 0.3, sev))
        assert not is_log_concave(bad).holds

    def test_random_criterion_vs_pmf(self):
        rng = random.Random(37)
        checked = 0
        for _ in range(40):
            sev = random_log_concave_severity(rng, rng.randint(2, 4))
            lam = rng.uniform(0.2, 6.0)
            spec = CompoundPoissonSpec(lam, sev)
            crit = log_concave_criterion(spec)
            lhs = lam * float(sev.mass(1)) ** 2
            rhs = 2 * float(sev.mass(2))
            if abs(lhs - rhs) < 1e-6:  # skip near-ties
                continue
            pmf_cert = is_log_concave(compound_poisson_pmf(spec))
            assert crit.holds == pmf_cert.holds
            checked += 1
        assert checked >= 20


class TestGeometricBoundCompoundPoisson:
    def test_thinning_example(self):
        spec = CompoundPoissonSpec(3.0, make_dist(0, (0.7, 0.3)))
        rep = geometric_bound_compound_poisson(spec)
        assert rep.details["theta"] == pytest.approx(0.1)
        assert rep.simplified == pytest.approx(1 - 0.1 * math.exp(0.9), abs=1e-12)
        assert rep.simplified == pytest.approx(0.754, abs=1e-3)
        assert rep.bound_mu_side == pytest.approx(min(math.exp(-0.9) / 0.1 - 1, 1.0), abs=1e-12)
        assert rep.stated_bound == pytest.approx(math.expm1(0.9), rel=1e-12)
        assert rep.details["stated_bound_clamped"] == 1.0
        assert rep.details["proof_form_bound"] == pytest.approx(math.exp(0.9) * 0.1 - 1, rel=1e-12)
        assert float(rep.oracle_tv.lo) == pytest.approx(0.666, abs=1e-3)
        assert rep.dominated is True

    def test_degenerate_limit(self):
        spec = CompoundPoissonSpec(1e-9, make_dist(0, (1.0,)))
        rep = geometric_bound_compound_poisson(spec)
        assert rep.simplified == pytest.approx(0.0, abs=1e-8)
        assert rep.dominated is True

    def test_light_severity(self):
        spec = CompoundPoissonSpec(1.0, make_dist(0, (0.9, 0.1)))
        rep = geometric_bound_compound_poisson(spec)
        assert rep.details["theta"] == pytest.approx(0.9)
        assert rep.dominated is True
        assert min(rep.core_bounds()) >= float(rep.oracle_tv.hi) - 1e-10

    def test_ratio_domain(self):
        with pytest.raises(NotApplicableError):
            geometric_bound_compound_poisson(CompoundPoissonSpec(4.0, make_dist(0, (0.7, 0.3))))

    def test_criterion_failure_raises(self):
        sev = make_dist(0, (0.55, 0.3, 0.15))
        with pytest.raises(HypothesisError):
            geometric_bound_compound_poisson(CompoundPoissonSpec(0.5, sev))


class TestCompoundGeometricPMF:
    def test_count_delta_one_is_the_summand(self):
        spec = CompoundGeometricSpec(make_dist(0, (0.0, 1.0)), 0.3)
        pmf = compound_geometric_pmf(spec)
        for k in range(len(pmf.masses)):
            assert pmf.mass(k) == pytest.approx(0.7 * 0.3**k, abs=1e-13)

    def test_count_delta_zero(self):
        spec = CompoundGeometricSpec(make_dist(0, (1.0,)), 0.3)
        assert compound_geometric_pmf(spec).mass(0) == pytest.approx(1.0)

    def test_two_point_mixture_atoms(self):
        spec = CompoundGeometricSpec(make_dist(0, (0.2, 0.8)), 0.3)
        pmf = compound_geometric_pmf(spec)
        assert pmf.mass(0) == pytest.approx(0.76, abs=1e-13)
        assert pmf.mass(1) == pytest.approx(0.168, abs=1e-13)

    def test_matches_negative_binomial_oracle(self):
        # independent route: k-fold geometric convolutions in closed form
        rng = random.Random(41)
        for _ in range(8):
            p = rng.uniform(0.1, 0.7)
            weights = [rng.random() for _ in range(rng.randint(2, 5))]
            count = make_dist(0, weights)
            pmf = compound_geometric_pmf(CompoundGeometricSpec(count, p))
            kmax = count.support_max
            for j in range(min(len(pmf.masses), 25)):
                expect = float(count.mass(0)) * (j == 0)
                for k in range(1, kmax + 1):
                    expect += float(count.mass(k)) * math.comb(k + j - 1, j) * (1 - p) ** k * p**j
                assert pmf.mass(j) == pytest.approx(expect, abs=1e-12)


class TestGeometricBoundCompoundGeometric:
    def test_count_delta_one_all_zero(self):
        rep = geometric_bound_compound_geometric(CompoundGeometricSpec(make_dist(0, (0.0, 1.0)), 0.3))
        assert rep.simplified == pytest.approx(0.0, abs=1e-12)
        assert rep.stated_bound == pytest.approx(0.0, abs=1e-12)
        assert rep.dominated is True

    def test_two_point_mixture_report(self):
        rep = geometric_bound_compound_geometric(CompoundGeometricSpec(make_dist(0, (0.2, 0.8)), 0.3))
        assert rep.details["rho"] == pytest.approx(0.168 / 0.76, rel=1e-12)
        expect_stated = (1 / 0.8) * (1 + 0.2 / (0.3 * 0.7)) ** 2 - 1
        assert rep.stated_bound == pytest.approx(expect_stated, rel=1e-12)
        assert rep.details["stated_bound_clamped"] == 1.0
        # the aggregate law is not log-concave here (the count has a large
        # atom at zero), so no envelope bound is certified
        assert not rep.hypothesis.holds
        assert rep.bound_nu_side is None
        assert rep.details["matched_atom_bound_raw"] < 0
        assert rep.stated_bound >= float(rep.oracle_tv.hi)

    def test_zero_free_count_certifies(self):
        rep = geometric_bound_compound_geometric(CompoundGeometricSpec(make_dist(0, (0.0, 0.5, 0.5)), 0.3))
        assert rep.hypothesis.holds
        assert rep.anchor.ratio_matched
        assert rep.dominated is True
        assert min(rep.core_bounds()) >= float(rep.oracle_tv.hi) - 1e-10

    def test_f1_limit_closed_form(self):
        # as F_1 -> 1 the closed form collapses to 0
        for f1 in (0.9, 0.99, 0.999):
            rep = geometric_bound_compound_geometric(
                CompoundGeometricSpec(make_dist(0, (0.0, f1, 1 - f1)), 0.4)
            )
            expect = (1 / f1) * (1 + (1 - f1) / (0.4 * 0.6)) ** 2 - 1
            assert rep.stated_bound == pytest.approx(expect, rel=1e-12)
        assert rep.stated_bound < 0.02

    def test_count_not_log_concave_rejected(self):
        with pytest.raises(HypothesisError):
            geometric_bound_compound_geometric(
                CompoundGeometricSpec(make_dist(0, (0.5, 0.1, 0.4)), 0.3)
            )

    def test_f1_zero_rejected(self):
        with pytest.raises(NotApplicableError):
            geometric_bound_compound_geometric(
                CompoundGeometricSpec(make_dist(0, (0.5, 0.0, 0.5)), 0.3)
            )


class TestParameterValidation:
    def test_summand_parameter_domain(self):
        with pytest.raises(InvalidDistributionError):
            CompoundGeometricSpec(make_dist(0, (1.0,)), 0.0)
        with pytest.raises(InvalidDistributionError):
            CompoundGeometricSpec(make_dist(0, (1.0,)), 1.0)

    def test_severity_offset(self):
        with pytest.raises(InvalidDistributionError):
            CompoundPoissonSpec(1.0, make_dist(1, (1.0,)))
