#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "hhepi/stats.hpp"

using namespace hhepi;

namespace {

std::vector<EpidemicOutcome> outcomes_from_sizes(const std::vector<std::uint64_t>& sizes)
{
    std::vector<EpidemicOutcome> out;
    for (auto z : sizes) {
        out.push_back({z, z, 0});
    }
    return out;
}

PopulationSpec poisson_pairs(std::uint64_t n, std::uint64_t seed)
{
    PopulationSpec spec;
    spec.n = n;
    spec.h = 2;
    spec.model = ContactModel(IndependentPoisson{1.0, 1.0});
    spec.seed = seed;
    return spec;
}

}  // namespace

TEST_CASE("wald interval for pi")
{
    std::vector<std::uint64_t> sizes(100, 1);
    std::fill(sizes.begin(), sizes.begin() + 50, 800);
    const auto s = classify_and_estimate(outcomes_from_sizes(sizes), 1000, 1000, MajorCutoff::fraction(0.2));
    CHECK(s.n_total == 100);
    CHECK(s.n_major == 50);
    CHECK(s.pi_hat == 0.5);
    CHECK(s.pi_ci.first == doctest::Approx(0.402).epsilon(1e-3));
    CHECK(s.pi_ci.second == doctest::Approx(0.598).epsilon(1e-3));
    REQUIRE(s.z_hat.has_value());
    CHECK(*s.z_hat == doctest::Approx(0.8));
    CHECK(s.z_ci->first == doctest::Approx(0.8));
    CHECK(*s.sigma_hat == doctest::Approx(0.0));
}

TEST_CASE("no major outbreaks")
{
    const auto s = classify_and_estimate(outcomes_from_sizes({1, 2, 3, 1}), 500, 1000, MajorCutoff::fraction(0.2));
    CHECK(s.no_major_outbreaks());
    CHECK(s.pi_hat == 0.0);
    CHECK_FALSE(s.z_hat.has_value());
    CHECK_FALSE(s.z_ci.has_value());
    CHECK_FALSE(s.sigma_hat.has_value());

    const auto one = classify_and_estimate(outcomes_from_sizes({1, 900}), 500, 1000, MajorCutoff::fraction(0.2));
    CHECK(one.z_hat.has_value());
    CHECK_FALSE(one.sigma_hat.has_value());
}

TEST_CASE("sample moments of the major runs")
{
    const auto s = classify_and_estimate(outcomes_from_sizes({1, 600, 620, 640, 5}), 500, 1000,
                                         MajorCutoff::fraction(0.2));
    CHECK(s.n_major == 3);
    CHECK(*s.z_hat == doctest::Approx(0.62));
    // sd of {0.60, 0.62, 0.64} is 0.02; sigma = sqrt(1000) * 0.02
    CHECK(*s.sigma_hat == doctest::Approx(std::sqrt(1000.0) * 0.02));
    CHECK(s.sigma_ci->first < *s.sigma_hat);
    CHECK(s.sigma_ci->second > *s.sigma_hat);
    const double half = 1.959963984540054 * 0.02 / std::sqrt(3.0);
    CHECK(s.z_ci->first == doctest::Approx(0.62 - half));
    CHECK(s.z_ci->second == doctest::Approx(0.62 + half));
}

TEST_CASE("intervals shrink with more runs")
{
    const auto spec = poisson_pairs(250, 7);
    const auto small = classify_and_estimate(run_batch(spec, 1000), spec.n, spec.population(),
                                             MajorCutoff::fraction(0.2));
    const auto large = classify_and_estimate(run_batch(spec, 16000, 4), spec.n, spec.population(),
                                             MajorCutoff::fraction(0.2));
    const auto width = [](const Interval& i) { return i.second - i.first; };
    CHECK(width(large.pi_ci) < 0.5 * width(small.pi_ci));
    CHECK(width(*large.z_ci) < 0.5 * width(*small.z_ci));
    CHECK(width(*large.sigma_ci) < 0.5 * width(*small.sigma_ci));
}

TEST_CASE("kolmogorov-smirnov distance")
{
    CHECK(ks_statistic({0.5}, 0.5, 1.0, 1) == doctest::Approx(0.5));

    const std::size_t n = 1000;
    std::vector<double> exact;
    for (std::size_t i = 0; i < n; ++i) {
        exact.push_back(0.6 + 0.03 * normal_quantile((static_cast<double>(i) + 0.5) / n));
    }
    // sigma2 / N = 0.03^2
    CHECK(ks_statistic(exact, 0.6, 0.9, 1000) == doctest::Approx(0.5 / n).epsilon(1e-6));

    std::vector<double> shifted = exact;
    for (auto& v : shifted) {
        v += 0.1;
    }
    CHECK(ks_statistic(shifted, 0.7, 0.9, 1000) == doctest::Approx(ks_statistic(exact, 0.6, 0.9, 1000)));
    CHECK(ks_statistic({2.0, 3.0}, 0.0, 1.0, 1) == doctest::Approx(normal_cdf(2.0)).epsilon(1e-12));
    CHECK_THROWS(ks_statistic({}, 0.0, 1.0, 1));
}

TEST_CASE("normal and chi-square helpers")
{
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021).epsilon(1e-6));
    CHECK(normal_cdf(3.0, 1.0, 4.0) == doctest::Approx(normal_cdf(1.0)));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(normal_cdf(normal_quantile(0.01)) == doctest::Approx(0.01).epsilon(1e-12));

    CHECK(chi2_quantile(0.5, 100000) == doctest::Approx(100000.0 - 2.0 / 3.0).epsilon(1e-3));
    for (std::uint64_t dof : {500U, 5000U, 50000U}) {
        const boost::math::chi_squared dist(static_cast<double>(dof));
        for (double q : {0.025, 0.5, 0.975}) {
            CHECK(chi2_quantile(q, dof) == doctest::Approx(boost::math::quantile(dist, q)).epsilon(1e-3));
        }
    }
}

TEST_CASE("compensated summation")
{
    const std::vector<double> v = {1e100, 1.0, -1e100};
    CHECK(stable_sum(v) == 1.0);
    std::vector<double> tenths(1000000, 0.1);
    CHECK(std::abs(stable_sum(tenths) - 100000.0) < 1e-9);
    CHECK(stable_sum({}) == 0.0);
}

TEST_CASE("major cutoff rules")
{
    const auto frac = MajorCutoff::parse("frac:0.2");
    CHECK(frac.rule == MajorCutoff::Rule::Fraction);
    CHECK(frac.is_major({200, 1, 0}, 500, 1000));
    CHECK_FALSE(frac.is_major({199, 199, 0}, 500, 1000));
    CHECK(MajorCutoff::parse(frac.to_string()).z_cut == 0.2);

    const auto houses = MajorCutoff::parse("households:log");
    CHECK(houses.rule == MajorCutoff::Rule::Households);
    // floor(log 1000) = 6
    CHECK(houses.is_major({6, 6, 0}, 1000, 2000));
    CHECK_FALSE(houses.is_major({10, 5, 0}, 1000, 2000));
    CHECK(houses.is_major({1, 1, 0}, 2, 4));

    CHECK_THROWS_AS(MajorCutoff::parse("frac:1.5"), ConfigError);
    CHECK_THROWS_AS(MajorCutoff::parse("frac:"), ConfigError);
    CHECK(MajorCutoff::parse("frac").z_cut == 0.2);
    CHECK_THROWS_AS(MajorCutoff::parse("median"), ConfigError);
}

TEST_CASE("simulate until a number of majors")
{
    const auto spec = poisson_pairs(200, 31);
    const auto cutoff = MajorCutoff::fraction(0.2);
    const auto runs = simulate_until_majors(spec, cutoff, 300, 100000, 3);
    const auto majors = major_fractions(runs, spec.n, spec.population(), cutoff);
    CHECK(majors.size() == 300);
    CHECK(cutoff.is_major(runs.back(), spec.n, spec.population()));
    CHECK(runs == run_batch(spec, runs.size()));
    CHECK(simulate_until_majors(spec, cutoff, 300, 100000, 1) == runs);

    const auto capped = simulate_until_majors(spec, cutoff, 100000, 500, 2);
    CHECK(capped.size() == 500);
}

TEST_CASE("estimates bracket finite-population references")
{
    // Poisson(1,1), h = 2. References (estimate, CI half-width) from 10^5 runs.
    struct Ref
    {
        std::uint64_t n;
        double pi, pi_half, z, z_half, sigma, sigma_half;
    };
    const std::vector<Ref> refs = {
        {250, 0.6053, 0.0030, 0.6135, 0.0004, 1.5249, 0.0067},
        {1000, 0.6169, 0.0030, 0.6170, 0.0002, 1.4359, 0.0063},
    };
    const auto cutoff = MajorCutoff::fraction(0.2);
    for (const auto& r : refs) {
        const auto spec = poisson_pairs(r.n, 1000 + r.n);
        const std::uint64_t runs = 10000;
        const auto s = classify_and_estimate(run_batch(spec, runs, 4), spec.n, spec.population(), cutoff);
        const double k = 1.959963984540054;
        const double pi_se = std::sqrt(s.pi_hat * (1.0 - s.pi_hat) / runs);
        const double z_se = (s.z_ci->second - s.z_ci->first) / (2 * k);
        const double sigma_se = *s.sigma_hat / std::sqrt(2.0 * static_cast<double>(s.n_major));
        CHECK(std::abs(s.pi_hat - r.pi) <= 3.0 * std::hypot(pi_se, r.pi_half / k));
        CHECK(std::abs(*s.z_hat - r.z) <= 3.0 * std::hypot(z_se, r.z_half / k));
        CHECK(std::abs(*s.sigma_hat - r.sigma) <= 3.0 * std::hypot(sigma_se, r.sigma_half / k));
    }
}
