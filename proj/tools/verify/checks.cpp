#include "verify/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "hhepi/asymptotics.hpp"
#include "hhepi/simulator.hpp"
#include "hhepi/stats.hpp"
#include "verify/oracles.hpp"

namespace hhepi::verify {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fixed(double x, int digits = 4)
{
    std::ostringstream out;
    out.precision(digits);
    out << std::fixed << x;
    return out.str();
}

class Recorder
{
  public:
    Recorder(std::vector<CheckResult>& out, std::string group, double scale)
        : out_(out), group_(std::move(group)), scale_(scale)
    {
    }

    void near(const std::string& name, double expected, double got, double tolerance,
              std::string note = {})
    {
        const double tol = tolerance * scale_;
        add({group_, name, Relation::AbsWithin, expected, got, tol,
             std::abs(got - expected) <= tol, std::move(note)});
    }

    void relative(const std::string& name, double expected, double got, double tolerance,
                  std::string note = {})
    {
        const double tol = tolerance * scale_;
        add({group_, name, Relation::RelWithin, expected, got, tol,
             std::abs(got - expected) <= tol * std::abs(expected), std::move(note)});
    }

    void below(const std::string& name, double got, double bound, std::string note = {})
    {
        add({group_, name, Relation::Below, bound, got, 0.0, got < bound, std::move(note)});
    }

    void above(const std::string& name, double got, double bound, std::string note = {})
    {
        add({group_, name, Relation::Above, bound, got, 0.0, got > bound, std::move(note)});
    }

    void fail(const std::string& name, double expected, std::string note)
    {
        add({group_, name, Relation::AbsWithin, expected, std::nan(""), 0.0, false, std::move(note)});
    }

  private:
    void add(CheckResult r) { out_.push_back(std::move(r)); }

    std::vector<CheckResult>& out_;
    std::string group_;
    double scale_;
};

struct CatalogEntry
{
    std::string name;
    ContactModel model;
    double pi;
    double z;
    double sigma;
    bool log_convex;
};

const std::vector<CatalogEntry>& catalog()
{
    static const std::vector<CatalogEntry> entries = {
        {"constant(1,1)", ContactModel(Constant{1, 1}), 1.0, 0.7968, 0.7386, false},
        {"binomial(2,1/2;2,1/2)", ContactModel(IndependentBinomial{2, 0.5, 2, 0.5}), 0.8238, 0.6817,
         1.0854, false},
        {"poisson(1,1)", ContactModel(IndependentPoisson{1.0, 1.0}), 0.6181, 0.6181, 1.4201, true},
        {"mixed_poisson gamma(2,2)", ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{2.0, 2.0}}), 0.4391,
         0.5725, 1.8378, true},
        {"mixed_poisson exp(1)", ContactModel(MixedPoisson{1.0, 1.0, ExponentialMixing{1.0}}), 0.3247,
         0.5368, 2.2347, true},
        {"mixed_poisson gamma(1/2,1/2)", ContactModel(MixedPoisson{1.0, 1.0, GammaMixing{0.5, 0.5}}),
         0.2060, 0.4829, 2.9959, true},
    };
    return entries;
}

const HouseholdSpec pair_household{2, 0.0, SamplingMode::WithReplacement};

void asymptotic_values(Recorder& rec, const VerifyOptions&)
{
    const auto start = Clock::now();
    for (const auto& e : catalog()) {
        try {
            const auto s = summarize(e.model, pair_household, 1);
            rec.near(e.name + " pi", e.pi, s.pi, 5e-4);
            rec.near(e.name + " z", e.z, s.z, 5e-4);
            if (s.sigma2) {
                rec.near(e.name + " sigma", e.sigma, std::sqrt(*s.sigma2), 5e-4);
            } else {
                rec.fail(e.name + " sigma", e.sigma, "no variance: R_* <= 1");
            }
        } catch (const std::exception& ex) {
            rec.fail(e.name, e.z, ex.what());
        }
    }
    rec.below("runtime seconds", seconds_since(start), 5.0);
}

void counterexamples(Recorder& rec, const VerifyOptions&)
{
    const ContactModel model(Constant{2, 1});
    const SwappedModel swapped(model);
    rec.near("constant(2,1) z h=2 p=0", 0.980, final_size(swapped, {2, 0.0}).z, 1e-3);
    rec.near("constant(2,1) z h=3 p=0", 0.961, final_size(swapped, {3, 0.0}).z, 1e-3);
    rec.near("constant(2,1) z h=2 p=1", 0.941, final_size(swapped, {2, 1.0}).z, 1e-3);
}

void monotonicity_suite(Recorder& rec, const VerifyOptions& opt)
{
    const std::vector<std::size_t> hs = {2, 3, 4, 5, 6};
    std::vector<double> ps;
    for (int k = 0; k <= 10; ++k) {
        ps.push_back(k / 10.0);
    }
    auto flag = [&](const std::string& name, bool ok) { rec.above(name, ok ? 1.0 : 0.0, 0.5); };
    for (const auto& e : catalog()) {
        const auto result = sweep(SwappedModel(e.model), hs, ps, 1, SamplingMode::WithReplacement, opt.threads);
        flag(e.name + " pi nondecreasing in h", result.report.pi.in_h);
        flag(e.name + " pi nondecreasing in p", result.report.pi.in_p);
        if (e.log_convex) {
            flag(e.name + " z nondecreasing in h", result.report.z.in_h);
            flag(e.name + " z nondecreasing in p", result.report.z.in_p);
        }
        if (e.name == "constant(1,1)") {
            for (std::size_t hi = 1; hi < hs.size(); ++hi) {
                double drop = -1.0;
                for (std::size_t pi = 0; pi + 1 < ps.size(); ++pi) {
                    const auto& a = result.rows[hi * ps.size() + pi];
                    const auto& b = result.rows[hi * ps.size() + pi + 1];
                    drop = std::max(drop, a.z - b.z);
                }
                rec.above(e.name + " largest drop of z in p, h=" + std::to_string(hs[hi]), drop, 1e-9);
            }
        }
    }
}

void swap_slope_sign(Recorder& rec, const VerifyOptions&)
{
    const double z_star = z_star_threshold(1.0, 0.0).value;
    rec.near("z* for a single local contact", 2.0 / 3.0, z_star, 1e-12);

    // X_G ~ Bernoulli(1/2), X_L = 1: only the mean of X_G enters z.
    const ContactModel low(JointTable{{{0, 1, 0.5}, {1, 1, 0.5}}});
    rec.below("z_hom(1.5) below z*", z_hom(1.5), z_star);
    rec.above("mu_G=0.5: z(2,1) - z(2,0.99)",
              final_size_slope_near_one(low, 2, SamplingMode::WithReplacement, 0.01), 0.0);

    const ContactModel high(Constant{2, 1});
    rec.above("z_hom(3) above z*", z_hom(3.0), z_star);
    rec.below("mu_G=2: z(2,1) - z(2,0.99)",
              final_size_slope_near_one(high, 2, SamplingMode::WithReplacement, 0.01), 0.0);
}

void large_household_limit(Recorder& rec, const VerifyOptions&)
{
    const SwappedModel model(ContactModel(IndependentPoisson{1.0, 1.0}));
    const double reference = z_hom(2.0);
    const std::vector<std::size_t> hs = {2, 5, 10, 20, 40};
    std::vector<double> gaps;
    for (const auto h : hs) {
        gaps.push_back(std::abs(final_size(model, {h, 0.0}).z - reference));
    }
    for (std::size_t k = 1; k < hs.size(); ++k) {
        rec.below("gap h=" + std::to_string(hs[k]) + " below gap h=" + std::to_string(hs[k - 1]),
                  gaps[k], gaps[k - 1]);
    }
    rec.below("gap at h=40", gaps.back(), 0.01);
}

void variance(Recorder& rec, const VerifyOptions& opt)
{
    const auto start = Clock::now();
    std::uint64_t stream = 0;
    for (const auto& e : catalog()) {
        const SwappedModel model(e.model);
        CltVariance cv;
        try {
            cv = clt_variance(model, pair_household);
        } catch (const std::exception& ex) {
            rec.fail(e.name + " household vs pairwise form", 0.0, ex.what());
            continue;
        }
        rec.relative(e.name + " household vs pairwise form", cv.sigma2, cv.sigma2_alt, 1e-8);
        const auto mc = oracle::household_variance_mc(model, 2, SamplingMode::WithReplacement, cv.tau,
                                                      cv.b, 1000000, opt.seed + ++stream);
        rec.near(e.name + " vs household Monte Carlo", cv.sigma2, mc.value, 3.0 * mc.std_error,
                 "tolerance is 3 standard errors of the 10^6-sample estimate");
    }
    rec.below("runtime seconds", seconds_since(start), 30.0);
}

struct OracleCase
{
    std::string name;
    ContactModel model;
    std::vector<JointAtom> atoms;
};

std::vector<JointAtom> binomial_atoms(std::uint32_t n_g, double q_g, std::uint32_t n_l, double q_l)
{
    auto pmf = [](std::uint32_t n, double q, std::uint32_t k) {
        double c = 1.0;
        for (std::uint32_t j = 0; j < k; ++j) {
            c = c * (n - j) / (j + 1);
        }
        return c * std::pow(q, k) * std::pow(1.0 - q, n - k);
    };
    std::vector<JointAtom> atoms;
    for (std::uint32_t g = 0; g <= n_g; ++g) {
        for (std::uint32_t l = 0; l <= n_l; ++l) {
            atoms.push_back({g, l, pmf(n_g, q_g, g) * pmf(n_l, q_l, l)});
        }
    }
    return atoms;
}

void oracles(Recorder& rec, const VerifyOptions& opt)
{
    const std::vector<OracleCase> cases = {
        {"constant(1,1)", ContactModel(Constant{1, 1}), {{1, 1, 1.0}}},
        {"constant(0,2)", ContactModel(Constant{0, 2}), {{0, 2, 1.0}}},
        {"binomial(2,1/2;2,1/2)", ContactModel(IndependentBinomial{2, 0.5, 2, 0.5}),
         binomial_atoms(2, 0.5, 2, 0.5)},
        {"joint table", ContactModel(JointTable{{{0, 1, 0.5}, {2, 0, 0.3}, {1, 2, 0.2}}}),
         {{0, 1, 0.5}, {2, 0, 0.3}, {1, 2, 0.2}}},
    };
    const std::vector<double> swap_ps = {0.0, 0.4, 1.0};
    const std::vector<double> points = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (const auto& c : cases) {
        double pmf_err = 0.0;
        double pgf_err = 0.0;
        int configurations = 0;
        for (const auto mode : {SamplingMode::WithReplacement, SamplingMode::WithoutReplacement}) {
            for (std::size_t h = 1; h <= 4; ++h) {
                if (mode == SamplingMode::WithoutReplacement && *c.model.max_local() > h - 1) {
                    continue;
                }
                for (const double p : swap_ps) {
                    const SwappedModel model(c.model, p);
                    const oracle::SmallLaw law{c.atoms, p};
                    const auto lib = susceptibility_pmf(model, h, mode).probs;
                    const auto ref = oracle::susceptibility_pmf(law, h, mode);
                    for (std::size_t i = 0; i < h; ++i) {
                        pmf_err = std::max(pmf_err, std::abs(lib[i] - ref[i]));
                    }
                    const auto emanating = oracle::emanating_pmf(law, h, mode);
                    for (const double s : points) {
                        pgf_err = std::max(pgf_err, std::abs(emanating_pgf(model, h, mode, s) -
                                                             oracle::pgf(emanating, s)));
                    }
                    ++configurations;
                }
            }
        }
        const std::string note = std::to_string(configurations) + " (h, mode, p) configurations";
        rec.near(c.name + " susceptibility pmf, max abs error", 0.0, pmf_err, 1e-12, note);
        rec.near(c.name + " emanating pgf, max abs error", 0.0, pgf_err, 1e-12, note);
    }

    // Gontcharoff polynomials against exact rationals.
    std::vector<std::pair<std::string, std::vector<double>>> node_sets;
    const SwappedModel poisson(ContactModel(IndependentPoisson{1.0, 1.0}));
    const SwappedModel binomial(ContactModel(IndependentBinomial{2, 0.5, 2, 0.5}), 0.3);
    node_sets.emplace_back("poisson escape weights", escape_weights(poisson, 13, SamplingMode::WithReplacement, 0.7));
    node_sets.emplace_back("binomial escape weights",
                           escape_weights(binomial, 13, SamplingMode::WithoutReplacement, 0.4));
    Rng rng(opt.seed);
    std::vector<double> uniform(12);
    for (auto& u : uniform) {
        u = rng.uniform();
    }
    node_sets.emplace_back("uniform random nodes", uniform);
    node_sets.emplace_back("equal nodes", std::vector<double>(12, 0.5));
    for (auto& [name, nodes] : node_sets) {
        nodes.resize(12);
        double worst = 0.0;
        for (const double x : {1.0, 0.3}) {
            const auto lib = gont_polys(x, nodes, 12);
            const auto exact = oracle::gont_polys_exact(x, nodes, 12);
            for (std::size_t k = 0; k <= 12; ++k) {
                const double err = exact[k] == 0.0 ? std::abs(lib[k])
                                                   : std::abs(lib[k] - exact[k]) / std::abs(exact[k]);
                worst = std::max(worst, err);
            }
        }
        rec.near("gontcharoff G_0..G_12, " + name + ", max rel error", 0.0, worst, 1e-10);
    }
}

PopulationSpec poisson_population(std::uint64_t n, std::uint64_t seed)
{
    PopulationSpec spec;
    spec.n = n;
    spec.h = 2;
    spec.m = 1;
    spec.model = ContactModel(IndependentPoisson{1.0, 1.0});
    spec.seed = seed;
    return spec;
}

void simulation(Recorder& rec, const VerifyOptions& opt)
{
    const auto start = Clock::now();
    const auto spec = poisson_population(1000, opt.seed);
    const auto outcomes = run_batch(spec, 10000, 1);
    const auto s = classify_and_estimate(outcomes, spec.n, spec.population(), MajorCutoff::fraction(0.2));
    const double elapsed = seconds_since(start);
    if (s.z_hat) {
        rec.near("poisson(1,1) N=2000 z_hat", 0.6170, *s.z_hat, 0.01);
    } else {
        rec.fail("poisson(1,1) N=2000 z_hat", 0.6170, "no major outbreaks");
    }
    rec.near("poisson(1,1) N=2000 pi_hat", 0.6169, s.pi_hat, 0.02);
    rec.below("runtime seconds (single thread)", elapsed, 60.0);
}

double ks_for(std::uint64_t n, std::uint64_t majors, std::uint64_t seed, unsigned threads,
              const AsymptoticSummary& asym, BatchSummary* summary = nullptr)
{
    const auto spec = poisson_population(n, seed);
    const auto cutoff = MajorCutoff::fraction(0.2);
    const auto outcomes = simulate_until_majors(spec, cutoff, majors, 100 * majors, threads);
    if (summary) {
        *summary = classify_and_estimate(outcomes, spec.n, spec.population(), cutoff);
    }
    return ks_statistic(major_fractions(outcomes, spec.n, spec.population(), cutoff), asym.z,
                        *asym.sigma2, spec.population());
}

void ks_trend(Recorder& rec, const VerifyOptions& opt)
{
    const auto asym = summarize(ContactModel(IndependentPoisson{1.0, 1.0}), pair_household, 1);
    const double d250 = ks_for(125, 10000, opt.seed + 250, opt.threads, asym);
    const double d2000 = ks_for(1000, 10000, opt.seed + 2000, opt.threads, asym);
    rec.above("D at N=250 exceeds D at N=2000", d250, d2000, "D(N=2000) = " + fixed(d2000));
    rec.near("ln(D / 0.0414) at N=250", 0.0, std::log(d250 / 0.0414), std::log(3.0), "D = " + fixed(d250));
    rec.near("ln(D / 0.0154) at N=2000", 0.0, std::log(d2000 / 0.0154), std::log(3.0),
             "D = " + fixed(d2000));
}

void large_population(Recorder& rec, const VerifyOptions& opt)
{
    const auto asym = summarize(ContactModel(IndependentPoisson{1.0, 1.0}), pair_household, 1);
    const auto spec = poisson_population(5000, opt.seed + 10000);
    const auto cutoff = MajorCutoff::fraction(0.2);
    const auto outcomes = run_batch(spec, 100000, opt.threads);
    const auto s = classify_and_estimate(outcomes, spec.n, spec.population(), cutoff);
    if (!s.z_hat || !s.sigma_hat) {
        rec.fail("poisson(1,1) N=10000", 0.6179, "too few major outbreaks");
        return;
    }
    // Reference values are themselves 10^5-run estimates rounded to 4 dp, so
    // tolerances combine both sampling errors and the rounding.
    const double pi_se = std::sqrt(s.pi_hat * (1.0 - s.pi_hat) / static_cast<double>(s.n_total));
    const double z_se = (s.z_ci->second - s.z_ci->first) / (2.0 * 1.959963984540054);
    const double sigma_se = *s.sigma_hat / std::sqrt(2.0 * static_cast<double>(s.n_major - 1));
    rec.near("poisson(1,1) N=10000 pi_hat", 0.6179, s.pi_hat, 3.0 * std::sqrt(2.0) * pi_se + 5e-5);
    rec.near("poisson(1,1) N=10000 z_hat", 0.6179, *s.z_hat, 3.0 * std::sqrt(2.0) * z_se + 5e-5);
    rec.near("poisson(1,1) N=10000 sigma_hat", 1.4196, *s.sigma_hat, 3.0 * std::sqrt(2.0) * sigma_se + 5e-5);
    const double d = ks_statistic(major_fractions(outcomes, spec.n, spec.population(), cutoff), asym.z,
                                  *asym.sigma2, spec.population());
    rec.near("ln(D / 0.0076) at N=10000", 0.0, std::log(d / 0.0076), std::log(3.0), "D = " + fixed(d));
}

using GroupFn = std::function<void(Recorder&, const VerifyOptions&)>;

const std::vector<std::pair<GroupInfo, GroupFn>>& registry()
{
    static const std::vector<std::pair<GroupInfo, GroupFn>> table = {
        {{"asymptotic_values", "pi, z, sigma for the six catalog models at h=2, p=0"}, asymptotic_values},
        {{"counterexamples", "constant(2,1) final sizes that fall with h and with p"}, counterexamples},
        {{"monotonicity", "pi and z monotone over h=2..6, p=0..1; constant(1,1) z not monotone in p"},
         monotonicity_suite},
        {{"swap_slope_sign", "sign of z(2,1) - z(2,0.99) on either side of z*"}, swap_slope_sign},
        {{"large_h_limit", "poisson(1,1) z(h,0) approaches z_hom(2)"}, large_household_limit},
        {{"variance", "CLT variance: two closed forms and household Monte Carlo"}, variance},
        {{"oracles", "brute-force household enumeration and exact-rational Gontcharoff"}, oracles},
        {{"simulation", "poisson(1,1) N=2000 simulation matches reference estimates"}, simulation},
        {{"ks_trend", "KS distance to the normal limit shrinks from N=250 to N=2000"}, ks_trend},
        {{"large_population", "poisson(1,1) N=10000, 10^5 runs (--full only)"}, large_population},
    };
    return table;
}

}  // namespace

const std::vector<GroupInfo>& groups()
{
    static const std::vector<GroupInfo> infos = [] {
        std::vector<GroupInfo> out;
        for (const auto& [info, fn] : registry()) {
            out.push_back(info);
        }
        return out;
    }();
    return infos;
}

std::vector<CheckResult> run_checks(const VerifyOptions& options)
{
    for (const auto& name : options.only) {
        const auto& g = groups();
        if (std::none_of(g.begin(), g.end(), [&](const GroupInfo& i) { return i.name == name; })) {
            throw std::invalid_argument("unknown check group '" + name + "'");
        }
    }
    std::vector<CheckResult> results;
    for (const auto& [info, fn] : registry()) {
        const bool wanted = options.only.empty()
                                ? (info.name != "large_population" || options.full)
                                : options.only.count(info.name) > 0;
        if (!wanted) {
            continue;
        }
        Recorder rec(results, info.name, options.tolerance_scale);
        try {
            fn(rec, options);
        } catch (const std::exception& ex) {
            rec.fail("group aborted", 0.0, ex.what());
        }
    }
    return results;
}

bool all_pass(const std::vector<CheckResult>& results)
{
    return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.pass; });
}

nlohmann::json report_json(const std::vector<CheckResult>& results)
{
    auto relation = [](Relation r) {
        switch (r) {
        case Relation::AbsWithin:
            return "abs_within";
        case Relation::RelWithin:
            return "rel_within";
        case Relation::Below:
            return "below";
        case Relation::Above:
            return "above";
        }
        return "?";
    };
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& r : results) {
        nlohmann::json j = {{"group", r.group},
                            {"name", r.name},
                            {"relation", relation(r.relation)},
                            {"expected", r.expected},
                            {"got", std::isnan(r.got) ? nlohmann::json(nullptr) : nlohmann::json(r.got)},
                            {"tolerance", r.tolerance},
                            {"pass", r.pass}};
        if (!r.note.empty()) {
            j["note"] = r.note;
        }
        checks.push_back(j);
    }
    return {{"pass", all_pass(results)}, {"checks", checks}};
}

}  // namespace hhepi::verify
