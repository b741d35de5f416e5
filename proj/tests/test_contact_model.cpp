#include <doctest.h>

#include <cmath>
#include <map>

#include "hhepi/contact_model.hpp"

using namespace hhepi;

namespace {

std::vector<ContactModel> catalog()
{
    return {
        ContactModel(Constant{1, 1}),
        ContactModel(Constant{2, 0}),
        ContactModel(IndependentPoisson{1.0, 1.0}),
        ContactModel(IndependentPoisson{0.7, 2.3}),
        ContactModel(IndependentBinomial{2, 0.5, 2, 0.5}),
        ContactModel(IndependentBinomial{3, 0.2, 4, 0.6}),
        ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}}),
        ContactModel(MixedPoisson{1.0, 1.0, ExponentialMixing{1.0}}),
        ContactModel(MixedPoisson{1.5, 0.5, GammaMixing{0.5, 0.5}}),
        ContactModel(MixedPoisson{1.0, 2.0, PointMassMixing{0.8}}),
        ContactModel(JointTable{{{0, 1, 0.5}, {2, 0, 0.3}, {1, 2, 0.2}}}),
    };
}

}  // namespace

TEST_CASE("joint pgf closed forms")
{
    CHECK(ContactModel(Constant{1, 1}).joint_pgf(0.5, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    for (const auto& m : catalog()) {
        CHECK(m.joint_pgf(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    const ContactModel gamma(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}});
    CHECK(gamma.joint_pgf(0.0, 0.0) == doctest::Approx(0.25).epsilon(1e-14));

    const ContactModel poisson(IndependentPoisson{0.7, 2.3});
    for (double s1 : {0.0, 0.3, 0.9}) {
        for (double s2 : {0.0, 0.4, 1.0}) {
            const double expect = std::exp(0.7 * (s1 - 1.0) + 2.3 * (s2 - 1.0));
            CHECK(poisson.joint_pgf(s1, s2) == doctest::Approx(expect).epsilon(1e-14));
        }
    }
    // Gamma(shape a, rate r) mixing: E[e^{uI}] = (1 - u/r)^{-a}, u = b_g(s1-1) + b_l(s2-1).
    const ContactModel mixed(MixedPoisson{1.5, 0.5, GammaMixing{0.5, 0.5}});
    const double u = 1.5 * (0.2 - 1.0) + 0.5 * (0.6 - 1.0);
    CHECK(mixed.joint_pgf(0.2, 0.6) == doctest::Approx(std::pow(1.0 - u / 0.5, -0.5)).epsilon(1e-14));
}

TEST_CASE("local and weighted pgfs")
{
    CHECK(ContactModel(IndependentPoisson{1.0, 1.0}).local_pgf(0.0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(ContactModel(Constant{2, 1}).weighted_local_pgf(0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ContactModel(IndependentPoisson{1.0, 1.0}).weighted_local_pgf(0.5) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

    for (const auto& m : catalog()) {
        const auto mom = m.moments();
        CHECK(std::abs(m.weighted_local_pgf(1.0) - mom.mean_g) < 1e-10);
        CHECK(std::abs(m.local_pgf_derivative(1.0) - mom.mean_l) < 1e-10);
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            CHECK(m.local_pgf(t) == m.joint_pgf(1.0, t));
            // s1-partial at (1, t) against a central difference just inside [0, 1].
            const double d = 1e-5;
            const double fd = (m.joint_pgf(1.0, t) - m.joint_pgf(1.0 - 2 * d, t)) / (2 * d);
            CHECK(m.weighted_local_pgf(t) == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("joint pgf is monotone in each argument")
{
    for (const auto& m : catalog()) {
        for (int i = 0; i < 10; ++i) {
            for (int j = 0; j < 10; ++j) {
                const double a = i / 10.0;
                const double b = j / 10.0;
                CHECK(m.joint_pgf(a, b) <= m.joint_pgf(a + 0.1, b) + 1e-15);
                CHECK(m.joint_pgf(a, b) <= m.joint_pgf(a, b + 0.1) + 1e-15);
            }
        }
    }
}

TEST_CASE("moments")
{
    const auto c = ContactModel(Constant{1, 1}).moments();
    CHECK(c.mean_g == 1.0);
    CHECK(c.mean_l == 1.0);
    CHECK(c.var_g == 0.0);
    CHECK(c.var_l == 0.0);
    CHECK(c.cov_gl == 0.0);

    const auto e = ContactModel(MixedPoisson{1.0, 1.0, ExponentialMixing{1.0}}).moments();
    CHECK(e.var_g == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e.cov_gl == doctest::Approx(1.0).epsilon(1e-14));

    const auto t = ContactModel(JointTable{{{0, 1, 0.5}, {2, 0, 0.3}, {1, 2, 0.2}}}).moments();
    CHECK(t.mean_g == doctest::Approx(0.8));
    CHECK(t.mean_l == doctest::Approx(0.9));
    CHECK(t.var_g == doctest::Approx(0.3 * 4 + 0.2 - 0.64));
    CHECK(t.var_l == doctest::Approx(0.5 + 0.2 * 4 - 0.81));
    CHECK(t.cov_gl == doctest::Approx(0.2 * 2 - 0.8 * 0.9));
}

TEST_CASE("swap moments follow from the pgf substitution")
{
    const SwappedModel half(ContactModel(IndependentPoisson{1.0, 1.0}), 0.5);
    CHECK(half.moments().var_g == doctest::Approx(1.5).epsilon(1e-14));

    for (const auto& m : catalog()) {
        const auto b = m.moments();
        for (int k = 0; k <= 10; ++k) {
            const double p = k / 10.0;
            const auto s = SwappedModel(m, p).moments();
            const double q = 1.0 - p;
            CHECK(s.mean_g == doctest::Approx(b.mean_g + p * b.mean_l).epsilon(1e-12));
            CHECK(s.mean_l == doctest::Approx(q * b.mean_l).epsilon(1e-12));
            CHECK(s.mean_g + s.mean_l == doctest::Approx(b.mean_g + b.mean_l).epsilon(1e-12));
            CHECK(s.var_g == doctest::Approx(b.var_g + 2 * p * b.cov_gl + p * p * b.var_l + p * q * b.mean_l)
                                 .epsilon(1e-12));
            CHECK(s.var_l == doctest::Approx(q * q * b.var_l + p * q * b.mean_l).epsilon(1e-12));
            CHECK(std::abs(s.cov_gl - (q * b.cov_gl + p * q * b.var_l - p * q * b.mean_l)) < 1e-12);
        }
        CHECK(SwappedModel(m, 1.0).moments().mean_l == 0.0);
    }
}

TEST_CASE("swap identities")
{
    for (const auto& m : catalog()) {
        const SwappedModel none(m, 0.0);
        const SwappedModel composed = swap(swap(SwappedModel(m), 0.2), 0.5);
        const SwappedModel direct(m, 0.6);
        for (int i = 0; i <= 10; ++i) {
            for (int j = 0; j <= 10; ++j) {
                const double s1 = i / 10.0;
                const double s2 = j / 10.0;
                CHECK(std::abs(none.joint_pgf(s1, s2) - m.joint_pgf(s1, s2)) <= 1e-12);
                CHECK(std::abs(composed.joint_pgf(s1, s2) - direct.joint_pgf(s1, s2)) <= 1e-12);
                CHECK(std::abs(direct.joint_pgf(s1, s2) - m.joint_pgf(s1, 0.6 * s1 + 0.4 * s2)) <= 1e-15);
            }
            const double t = i / 10.0;
            const double d = 1e-5;
            const double fd = (direct.joint_pgf(1.0, t) - direct.joint_pgf(1.0 - 2 * d, t)) / (2 * d);
            CHECK(direct.weighted_local_pgf(t) == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("validation")
{
    CHECK_THROWS_AS(ContactModel(IndependentPoisson{-1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(ContactModel(IndependentBinomial{2, 1.5, 2, 0.5}), ConfigError);
    CHECK_THROWS_AS(ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{0.0, 1.0}}), ConfigError);
    CHECK_THROWS_AS(ContactModel(MixedPoisson{1.0, 1.0, ExponentialMixing{-2.0}}), ConfigError);
    CHECK_THROWS_AS(ContactModel(JointTable{}), ConfigError);
    CHECK_THROWS_AS(ContactModel(JointTable{{{0, 1, 0.5}, {1, 0, 0.4}}}), ConfigError);
    CHECK_THROWS_AS(SwappedModel(ContactModel(Constant{1, 1}), 1.2), ConfigError);
    CHECK_NOTHROW(ContactModel(JointTable{{{0, 0, 1.0}}}));
}

TEST_CASE("support queries")
{
    CHECK(ContactModel(Constant{2, 1}).max_local() == 1U);
    CHECK(ContactModel(IndependentBinomial{2, 0.5, 3, 0.5}).max_local() == 3U);
    CHECK_FALSE(ContactModel(IndependentPoisson{1.0, 1.0}).max_local().has_value());
    const auto atoms = ContactModel(IndependentBinomial{1, 0.25, 1, 0.5}).finite_support();
    REQUIRE(atoms.has_value());
    double total = 0.0;
    for (const auto& a : *atoms) {
        total += a.prob;
    }
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("log-convexity of the local pgf")
{
    CHECK(log_convexity_report(ContactModel(IndependentPoisson{1.0, 1.0}), 101).convex);
    CHECK_FALSE(log_convexity_report(ContactModel(Constant{3, 1}), 101).convex);
    CHECK(log_convexity_report(ContactModel(MixedPoisson{1.0, 1.0, ExponentialMixing{1.0}}), 101).convex);
    CHECK(log_convexity_report(ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}}), 101).convex);
    CHECK_FALSE(log_convexity_report(ContactModel(IndependentBinomial{2, 0.5, 2, 0.5}), 101).convex);
}

TEST_CASE("samplers")
{
    Rng rng(7);
    for (int k = 0; k < 100; ++k) {
        const auto d = ContactModel(Constant{1, 1}).sample(rng);
        CHECK(d.global == 1);
        CHECK(d.local == 1);
        const auto z = ContactModel(JointTable{{{0, 0, 1.0}}}).sample(rng);
        CHECK(z.global == 0);
        CHECK(z.local == 0);
    }

    SUBCASE("poisson sample mean")
    {
        const ContactModel m(IndependentPoisson{1.0, 1.0});
        const int n = 1000000;
        double sg = 0.0, sl = 0.0;
        for (int k = 0; k < n; ++k) {
            const auto d = m.sample(rng);
            sg += static_cast<double>(d.global);
            sl += static_cast<double>(d.local);
        }
        const double se = std::sqrt(1.0 / n);
        CHECK(std::abs(sg / n - 1.0) < 3 * se);
        CHECK(std::abs(sl / n - 1.0) < 3 * se);
    }

    SUBCASE("joint table pmf")
    {
        const std::vector<JointAtom> atoms = {{0, 1, 0.5}, {2, 0, 0.3}, {1, 2, 0.2}};
        const ContactModel m(JointTable{atoms});
        const int n = 1000000;
        std::map<std::pair<std::uint64_t, std::uint64_t>, int> counts;
        for (int k = 0; k < n; ++k) {
            const auto d = m.sample(rng);
            ++counts[{d.global, d.local}];
        }
        CHECK(counts.size() == atoms.size());
        for (const auto& a : atoms) {
            const double freq = counts[{a.g, a.l}] / static_cast<double>(n);
            CHECK(std::abs(freq - a.prob) < 4 * std::sqrt(a.prob * (1 - a.prob) / n));
        }
    }

    SUBCASE("mixed poisson and swapped moments")
    {
        const ContactModel m(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}});
        const SwappedModel s(m, 0.3);
        const auto mom = s.moments();
        const int n = 400000;
        double sg = 0.0, sl = 0.0, sgg = 0.0;
        for (int k = 0; k < n; ++k) {
            const auto d = s.sample(rng);
            sg += static_cast<double>(d.global);
            sl += static_cast<double>(d.local);
            sgg += static_cast<double>(d.global * d.global);
        }
        const double mg = sg / n;
        CHECK(std::abs(mg - mom.mean_g) < 4 * std::sqrt(mom.var_g / n));
        CHECK(std::abs(sl / n - mom.mean_l) < 4 * std::sqrt(mom.var_l / n));
        CHECK(sgg / n - mg * mg == doctest::Approx(mom.var_g).epsilon(0.03));
    }
}
