#include "hhepi/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hhepi/parallel.hpp"

namespace hhepi {

namespace {

constexpr double fixed_point_tolerance = 1e-12;
constexpr std::size_t fixed_point_iterations = 100000;
constexpr double critical_band = 1e-9;
constexpr double scan_step = 1e-3;
constexpr double monotone_tolerance = 1e-9;

SwappedModel effective_model(const SwappedModel& model, const HouseholdSpec& spec)
{
    return swap(model, spec.p);
}

// Largest root in (0, 1] of a function that is positive just above zero and
// nonpositive at 1. Scans down from 1 so the trivial root at 0 is never
// picked, then bisects the bracketing cell.
double largest_root(const std::function<double(double)>& g)
{
    double hi = 1.0;
    if (g(hi) > 0.0) {
        return 1.0;
    }
    double lo = -1.0;
    const auto steps = static_cast<int>(std::lround(1.0 / scan_step));
    for (int k = steps - 1; k >= 1; --k) {
        const double z = k * scan_step;
        if (g(z) > 0.0) {
            lo = z;
            break;
        }
        hi = z;
    }
    if (lo < 0.0) {
        // Root below the first grid cell: halve towards zero.
        double z = scan_step;
        while (z > std::numeric_limits<double>::min() && !(g(z) > 0.0)) {
            hi = z;
            z *= 0.5;
        }
        if (!(g(z) > 0.0)) {
            throw NumericError("no positive bracket for the final-size root");
        }
        lo = z;
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (g(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double root = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
    if (std::abs(g(root)) >= 1e-12) {
        std::ostringstream msg;
        msg << "final-size root did not converge: residual " << g(root) << " at z = " << root;
        throw NumericError(msg.str());
    }
    return root;
}

}  // namespace

double r_star(const SwappedModel& model, const HouseholdSpec& spec)
{
    const auto eff = effective_model(model, spec);
    const auto pmf = susceptibility_pmf(eff, spec.h, spec.local_mode);
    return eff.moments().mean_g * pmf.mean();
}

OutbreakProbability outbreak_probability(const SwappedModel& model, const HouseholdSpec& spec,
                                         std::size_t m)
{
    if (m < 1) {
        throw ConfigError("need at least one initial infective");
    }
    const auto eff = effective_model(model, spec);
    check_household(eff, spec.h, spec.local_mode);
    OutbreakProbability out;
    // Subcritical or critical: extinction is certain unless every individual
    // has exactly one emanating contact (f_C(0) = 0 with mean <= 1).
    const double rs = eff.moments().mean_g * susceptibility_pmf(eff, spec.h, spec.local_mode).mean();
    if (rs <= 1.0 + critical_band && emanating_pgf(eff, spec.h, spec.local_mode, 0.0) > 0.0) {
        out.rho = 1.0;
        out.converged = true;
        return out;
    }
    double rho = 0.0;
    for (std::size_t k = 1; k <= fixed_point_iterations; ++k) {
        const double next = emanating_pgf(eff, spec.h, spec.local_mode, rho);
        const double step = std::abs(next - rho);
        rho = next;
        out.iterations = k;
        if (step < fixed_point_tolerance) {
            out.converged = true;
            break;
        }
    }
    out.rho = rho;
    out.pi = 1.0 - std::pow(rho, static_cast<double>(m));
    return out;
}

FinalSize final_size(const SwappedModel& model, const HouseholdSpec& spec)
{
    const auto eff = effective_model(model, spec);
    const auto pmf = susceptibility_pmf(eff, spec.h, spec.local_mode);
    const double mu_g = eff.moments().mean_g;
    const double rs = mu_g * pmf.mean();
    if (rs <= 1.0 + fixed_point_tolerance || std::abs(rs - 1.0) < critical_band) {
        return {};
    }
    const double z = largest_root([&](double x) { return 1.0 - pmf.pgf(std::exp(-mu_g * x)) - x; });
    return {z, mu_g * z};
}

CltVariance clt_variance(const SwappedModel& model, const HouseholdSpec& spec)
{
    const auto eff = effective_model(model, spec);
    const double rs = r_star(model, spec);
    if (rs <= 1.0 || std::abs(rs - 1.0) < critical_band) {
        throw std::domain_error("CLT variance is only defined for R_* > 1");
    }
    const auto fs = final_size(model, spec);
    const auto moments = eff.moments();
    const double mu = moments.mean_g;
    const double var_g = moments.var_g;
    const auto hm = household_moments(eff, spec.h, spec.local_mode, fs.tau);

    const double slope = hm.nu_r_prime;
    const double b = slope / (1.0 - mu * slope);
    const double lift = 1.0 + b * mu;
    const double hd = static_cast<double>(spec.h);
    const double nu = hm.nu_r;

    CltVariance out;
    out.b = b;
    out.tau = fs.tau;
    out.household = hm;
    out.sigma2 = (lift * lift * hm.var_r + b * b * hd * nu * (var_g - mu) +
                  2.0 * b * lift * (hm.cov_rg - mu * hm.var_r)) /
                 hd;

    // Pairwise form: split var(R) and cov(R,G) into the per-pair covariances
    // cov(chi_11, chi_12) and cov(chi_11, X_G of member 2).
    double pair_chi = 0.0;
    double pair_xg = 0.0;
    if (spec.h >= 2) {
        const double pairs = hd * (hd - 1.0);
        pair_chi = (hm.var_r - hd * nu * (1.0 - nu)) / pairs;
        pair_xg = (hm.cov_rg - mu * hm.var_r) / pairs;
    }
    out.sigma2_alt = lift * lift * nu * (1.0 - nu) + (hd - 1.0) * lift * lift * pair_chi +
                     b * b * nu * (var_g - mu) + 2.0 * (hd - 1.0) * b * lift * pair_xg;

    if (std::abs(out.sigma2 - out.sigma2_alt) > 1e-8 * std::max(1.0, std::abs(out.sigma2))) {
        std::ostringstream msg;
        msg << "variance forms disagree: " << out.sigma2 << " vs " << out.sigma2_alt;
        throw NumericError(msg.str());
    }
    return out;
}

AsymptoticSummary summarize(const ContactModel& model, const HouseholdSpec& spec, std::size_t m)
{
    return summarize(SwappedModel(model), spec, m);
}

AsymptoticSummary summarize(const SwappedModel& model, const HouseholdSpec& spec, std::size_t m)
{
    const auto eff = effective_model(model, spec);
    AsymptoticSummary out;
    out.m = m;
    out.h = spec.h;
    out.p = eff.p();
    const auto pmf = susceptibility_pmf(eff, spec.h, spec.local_mode);
    out.unstable = pmf.unstable;
    out.r_star = r_star(model, spec);
    const auto op = outbreak_probability(model, spec, m);
    out.rho = op.rho;
    out.pi = op.pi;
    out.converged = op.converged;
    const auto fs = final_size(model, spec);
    out.z = fs.z;
    out.tau = fs.tau;
    if (out.r_star > 1.0 && std::abs(out.r_star - 1.0) >= critical_band) {
        const auto cv = clt_variance(model, spec);
        out.sigma2 = cv.sigma2;
        out.unstable = out.unstable || cv.household.unstable;
    }
    return out;
}

double z_hom(double alpha)
{
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("z_hom needs alpha >= 0");
    }
    if (alpha <= 1.0) {
        return 0.0;
    }
    return largest_root([alpha](double z) { return 1.0 - std::exp(-alpha * z) - z; });
}

ZStarThreshold z_star_threshold(double mu_l, double sigma_l2)
{
    if (!(mu_l > 0.0)) {
        throw std::invalid_argument("z* threshold needs mu_L > 0");
    }
    return {1.0 - (mu_l - sigma_l2) / (3.0 * mu_l * mu_l), sigma_l2 >= mu_l};
}

double final_size_slope_near_one(const ContactModel& model, std::size_t h, SamplingMode mode,
                                 double step)
{
    if (!(step > 0.0 && step <= 1.0)) {
        throw std::invalid_argument("difference step must lie in (0, 1]");
    }
    const double at_one = final_size(model, {h, 1.0, mode}).z;
    const double below = final_size(model, {h, 1.0 - step, mode}).z;
    return at_one - below;
}

MonotonicityReport monotonicity(const std::vector<SweepRow>& rows, std::size_t n_h, std::size_t n_p,
                                double alpha)
{
    MonotonicityReport report;
    auto at = [&](std::size_t hi, std::size_t pi) -> const SweepRow& { return rows[hi * n_p + pi]; };
    auto nondecreasing = [](double a, double b) { return b >= a - monotone_tolerance; };

    for (std::size_t pi = 0; pi < n_p; ++pi) {
        for (std::size_t hi = 0; hi + 1 < n_h; ++hi) {
            const auto& a = at(hi, pi);
            const auto& b = at(hi + 1, pi);
            report.pi.in_h = report.pi.in_h && nondecreasing(a.pi, b.pi);
            report.z.in_h = report.z.in_h && nondecreasing(a.z, b.z);
            if (a.sigma && b.sigma) {
                report.sigma.in_h = report.sigma.in_h && nondecreasing(*a.sigma, *b.sigma);
            }
        }
    }
    for (std::size_t hi = 0; hi < n_h; ++hi) {
        for (std::size_t pi = 0; pi + 1 < n_p; ++pi) {
            const auto& a = at(hi, pi);
            const auto& b = at(hi, pi + 1);
            report.pi.in_p = report.pi.in_p && nondecreasing(a.pi, b.pi);
            report.z.in_p = report.z.in_p && nondecreasing(a.z, b.z);
            if (a.sigma && b.sigma) {
                report.sigma.in_p = report.sigma.in_p && nondecreasing(*a.sigma, *b.sigma);
            }
        }
    }
    if (n_h > 0) {
        const double reference = z_hom(alpha);
        report.h_max = at(n_h - 1, 0).h;
        for (std::size_t pi = 0; pi < n_p; ++pi) {
            report.z_hom_gap = std::max(report.z_hom_gap, std::abs(at(n_h - 1, pi).z - reference));
        }
    }
    return report;
}

SweepResult sweep(const SwappedModel& model, const std::vector<std::size_t>& h_values,
                  const std::vector<double>& p_grid, std::size_t m, SamplingMode mode,
                  unsigned threads)
{
    if (h_values.empty() || p_grid.empty()) {
        throw ConfigError("sweep grids must be nonempty");
    }
    auto hs = h_values;
    std::sort(hs.begin(), hs.end());
    hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
    auto ps = p_grid;
    std::sort(ps.begin(), ps.end());
    ps.erase(std::unique(ps.begin(), ps.end()), ps.end());

    SweepResult result;
    result.rows.resize(hs.size() * ps.size());
    parallel_for(result.rows.size(), threads, [&](std::size_t idx) {
        const std::size_t hi = idx / ps.size();
        const std::size_t pi = idx % ps.size();
        const HouseholdSpec spec{hs[hi], ps[pi], mode};
        const auto s = summarize(model, spec, m);
        SweepRow row;
        row.h = spec.h;
        row.p = spec.p;
        row.r_star = s.r_star;
        row.rho = s.rho;
        row.pi = s.pi;
        row.z = s.z;
        row.tau = s.tau;
        if (s.sigma2) {
            row.sigma = std::sqrt(*s.sigma2);
        }
        row.unstable = s.unstable || !s.converged;
        result.rows[idx] = row;
    });
    const auto mom = model.base().moments();
    result.report = monotonicity(result.rows, hs.size(), ps.size(), mom.mean_g + mom.mean_l);
    return result;
}

}  // namespace hhepi
