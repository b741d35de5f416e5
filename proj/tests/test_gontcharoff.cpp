#include <doctest.h>

#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "hhepi/gontcharoff.hpp"
#include "hhepi/rng.hpp"
#include "verify/oracles.hpp"

using namespace hhepi;

namespace {

using wide = boost::multiprecision::cpp_bin_float_50;

constexpr auto with = SamplingMode::WithReplacement;
constexpr auto without = SamplingMode::WithoutReplacement;

double falling(std::size_t n, std::size_t i)
{
    double out = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
        out *= static_cast<double>(n - j);
    }
    return out;
}

}  // namespace

TEST_CASE("first Gontcharoff polynomials")
{
    const std::vector<double> u = {0.3, 0.8, 0.1};
    const auto g = gont_polys(0.9, u, 3);
    CHECK(g[0] == 1.0);
    CHECK(g[1] == doctest::Approx(0.9 - 0.3).epsilon(1e-15));
    // n = 2: x^2 = u_0^2 G_0 + 2 u_1 G_1 + 2 G_2
    CHECK(g[2] == doctest::Approx((0.81 - 0.09 - 2 * 0.8 * 0.6) / 2).epsilon(1e-14));
    CHECK_THROWS(gont_polys(0.5, u, 4));
}

TEST_CASE("defining identity residual")
{
    Rng rng(11);
    for (std::size_t h = 2; h <= 20; ++h) {
        for (int rep = 0; rep < 20; ++rep) {
            const double x = rng.uniform();
            std::vector<double> u(h);
            for (auto& v : u) {
                v = rng.uniform();
            }
            const auto g = gont_polys(x, u, h - 1);
            for (std::size_t n = 0; n < h; ++n) {
                // The sum cancels heavily for large n, so it is accumulated in
                // 50 digits; only the returned G_i carry rounding.
                wide lhs = 0;
                for (std::size_t i = 0; i <= n; ++i) {
                    lhs += wide(falling(n, i)) * pow(wide(u[i]), static_cast<int>(n - i)) * wide(g[i]);
                }
                const double residual = static_cast<double>(abs(lhs - pow(wide(x), static_cast<int>(n))));
                CHECK(residual <= 1e-9);
            }
        }
    }
}

TEST_CASE("identity residual is no worse than for correctly rounded values")
{
    Rng rng(11);
    for (std::size_t h = 2; h <= 20; ++h) {
        for (int rep = 0; rep < 20; ++rep) {
            const double x = rng.uniform();
            std::vector<double> u(h);
            for (auto& v : u) {
                v = rng.uniform();
            }
            const auto g = gont_polys(x, u, h - 1);
            const auto exact = oracle::gont_polys_exact(x, u, h - 1);
            for (std::size_t n = 0; n < h; ++n) {
                wide got = 0;
                wide best = 0;
                for (std::size_t i = 0; i <= n; ++i) {
                    const wide c = wide(falling(n, i)) * pow(wide(u[i]), static_cast<int>(n - i));
                    got += c * wide(g[i]);
                    best += c * wide(exact[i]);
                }
                const wide xn = pow(wide(x), static_cast<int>(n));
                CHECK(static_cast<double>(abs(got - xn)) <= 2.0 * static_cast<double>(abs(best - xn)) + 1e-12);
            }
        }
    }
}

TEST_CASE("exact rational oracle at order 12")
{
    Rng rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const double x = rng.uniform();
        std::vector<double> u(12);
        for (auto& v : u) {
            v = rng.uniform();
        }
        const auto got = gont_polys(x, u, 12);
        const auto exact = oracle::gont_polys_exact(x, u, 12);
        for (std::size_t k = 0; k <= 12; ++k) {
            CHECK(std::abs(got[k] - exact[k]) <= 1e-10 * std::abs(exact[k]));
        }
    }
}

TEST_CASE("susceptibility pmf examples")
{
    const SwappedModel one_local(ContactModel(Constant{3, 1}));
    auto pmf = susceptibility_pmf(one_local, 2, with);
    CHECK(pmf.probs[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pmf.probs[1] == doctest::Approx(1.0).epsilon(1e-15));

    pmf = susceptibility_pmf(one_local, 3, with);
    CHECK(std::abs(pmf.probs[0] - 0.25) < 1e-14);
    CHECK(std::abs(pmf.probs[1]) < 1e-14);
    CHECK(std::abs(pmf.probs[2] - 0.75) < 1e-14);

    pmf = susceptibility_pmf(SwappedModel(ContactModel(IndependentPoisson{2.0, 1.0})), 2, with);
    CHECK(pmf.probs[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(pmf.probs[1] == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-14));

    pmf = susceptibility_pmf(one_local, 1, with);
    REQUIRE(pmf.h() == 1);
    CHECK(pmf.probs[0] == 1.0);
}

TEST_CASE("emanating pgf examples")
{
    const SwappedModel pair(ContactModel(Constant{1, 1}));
    for (double s : {0.0, 0.3, 0.7, 1.0}) {
        CHECK(emanating_pgf(pair, 2, with, s) == doctest::Approx(s * s).epsilon(1e-14));
    }
    const SwappedModel gamma(ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}}), 0.3);
    for (double s : {0.0, 0.4, 1.0}) {
        CHECK(emanating_pgf(gamma, 1, with, s) == doctest::Approx(gamma.joint_pgf(s, 1.0)).epsilon(1e-14));
    }
    for (std::size_t h = 1; h <= 10; ++h) {
        CHECK(emanating_pgf(gamma, h, with, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("brute-force household enumeration")
{
    struct Case
    {
        ContactModel model;
        std::vector<JointAtom> atoms;
    };
    const std::vector<Case> cases = {
        {ContactModel(Constant{1, 2}), {{1, 2, 1.0}}},
        {ContactModel(JointTable{{{0, 0, 0.2}, {1, 1, 0.5}, {3, 2, 0.3}}}), {{0, 0, 0.2}, {1, 1, 0.5}, {3, 2, 0.3}}},
    };
    for (const auto& c : cases) {
        for (const auto mode : {with, without}) {
            for (std::size_t h = 1; h <= 4; ++h) {
                if (mode == without && h < 3) {
                    continue;
                }
                for (double p : {0.0, 0.25, 0.9}) {
                    const SwappedModel model(c.model, p);
                    const oracle::SmallLaw law{c.atoms, p};
                    const auto got = susceptibility_pmf(model, h, mode).probs;
                    const auto ref = oracle::susceptibility_pmf(law, h, mode);
                    for (std::size_t i = 0; i < h; ++i) {
                        CHECK(std::abs(got[i] - ref[i]) <= 1e-12);
                    }
                    const auto c_pmf = oracle::emanating_pmf(law, h, mode);
                    for (double s : {0.0, 0.2, 0.6, 1.0}) {
                        CHECK(std::abs(emanating_pgf(model, h, mode, s) - oracle::pgf(c_pmf, s)) <= 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("mean emanating contacts equal mu_G E[S]")
{
    for (const auto& model : {SwappedModel(ContactModel(IndependentPoisson{1.0, 1.0}), 0.2),
                              SwappedModel(ContactModel(IndependentBinomial{2, 0.5, 2, 0.5})),
                              SwappedModel(ContactModel(MixedPoisson{1.0, 1.0, ExponentialMixing{1.0}}), 0.5)}) {
        for (std::size_t h : {1U, 2U, 4U, 7U}) {
            const double d = 1e-6;
            const double mean_c = (emanating_pgf(model, h, with, 1.0) - emanating_pgf(model, h, with, 1.0 - d)) / d;
            const double expect = model.moments().mean_g * susceptibility_pmf(model, h, with).mean();
            CHECK(mean_c == doctest::Approx(expect).epsilon(1e-5));
        }
    }
}

TEST_CASE("log-convex local pgf: f_S decreases with h")
{
    for (const auto& model : {SwappedModel(ContactModel(IndependentPoisson{1.0, 1.0})),
                              SwappedModel(ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}}))}) {
        std::vector<SusceptibilityPmf> pmfs;
        for (std::size_t h = 1; h <= 12; ++h) {
            pmfs.push_back(susceptibility_pmf(model, h, with));
        }
        for (std::size_t k = 1; k < pmfs.size(); ++k) {
            for (int i = 0; i <= 20; ++i) {
                const double s = i / 20.0;
                CHECK(pmfs[k].pgf(s) <= pmfs[k - 1].pgf(s) + 1e-12);
            }
        }
    }
}

TEST_CASE("large households stay accurate")
{
    const SwappedModel model(ContactModel(IndependentPoisson{1.0, 1.0}), 0.1);
    for (std::size_t h : {30U, 40U, 50U}) {
        const auto pmf = susceptibility_pmf(model, h, with);
        CHECK_FALSE(pmf.unstable);
        double total = 0.0;
        for (double v : pmf.probs) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("configuration errors")
{
    const SwappedModel model(ContactModel(Constant{1, 2}));
    CHECK_THROWS_AS(susceptibility_pmf(model, 51, with), ConfigError);
    CHECK_THROWS_AS(susceptibility_pmf(model, 0, with), ConfigError);
    CHECK_THROWS_AS(susceptibility_pmf(model, 2, without), ConfigError);
    CHECK_NOTHROW(susceptibility_pmf(model, 3, without));
    CHECK_THROWS_AS(susceptibility_pmf(SwappedModel(ContactModel(IndependentPoisson{1.0, 1.0})), 4, without),
                    ConfigError);
}

TEST_CASE("household moments")
{
    const SwappedModel one_local(ContactModel(Constant{1, 1}));
    const auto zero = household_moments(one_local, 2, with, 0.0);
    CHECK(zero.nu_r == doctest::Approx(0.0));
    CHECK(std::abs(zero.var_r) < 1e-14);
    CHECK(std::abs(zero.cov_rg) < 1e-14);

    const auto all = household_moments(SwappedModel(ContactModel(IndependentPoisson{1.0, 1.0})), 3, with, 40.0);
    CHECK(all.nu_r == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(all.mean_susceptible) < 1e-12);

    for (double t : {0.1, 0.5, 1.0, 2.0}) {
        const auto m = household_moments(one_local, 2, with, t);
        CHECK(m.nu_r == doctest::Approx(1.0 - std::exp(-2.0 * t)).epsilon(1e-13));
        CHECK(m.nu_r_prime == doctest::Approx(2.0 * std::exp(-2.0 * t)).epsilon(1e-13));
        // R is 0 or 2: var = 4 q (1 - q) with q = 1 - e^{-2t}.
        const double q = 1.0 - std::exp(-2.0 * t);
        CHECK(m.var_r == doctest::Approx(4.0 * q * (1.0 - q)).epsilon(1e-12));
    }

    // var(R) / h against single-household simulation (b = 0).
    const SwappedModel poisson(ContactModel(IndependentPoisson{1.0, 1.0}), 0.3);
    const auto m = household_moments(poisson, 3, with, 0.4);
    const auto mc = oracle::household_variance_mc(poisson, 3, with, 0.4, 0.0, 400000, 99);
    CHECK(std::abs(mc.value - m.var_r / 3.0) < 3.0 * mc.std_error);
}
