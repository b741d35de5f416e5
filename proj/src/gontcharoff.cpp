#include "hhepi/gontcharoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace hhepi {

namespace {

// The Gontcharoff recursion cancels catastrophically as the order grows
// (roughly 1e-6 absolute error by h = 40 in double), so every sum below
// runs in IEEE binary128.
using wide = __float128;

constexpr double clamp_tolerance = 1e-12;

struct FactorialTable
{
    std::array<wide, max_household_size + 2> fact{};
    std::array<wide, max_household_size + 2> inv_fact{};

    FactorialTable()
    {
        fact[0] = 1;
        inv_fact[0] = 1;
        for (std::size_t k = 1; k < fact.size(); ++k) {
            fact[k] = fact[k - 1] * static_cast<wide>(k);
            inv_fact[k] = 1 / fact[k];
        }
    }

    // n_[i] = n (n-1) ... (n-i+1)
    wide falling(std::size_t n, std::size_t i) const { return fact[n] * inv_fact[n - i]; }
};

const FactorialTable& factorials()
{
    static const FactorialTable table;
    return table;
}

wide ipow(wide base, std::size_t exponent)
{
    wide out = 1;
    while (exponent > 0) {
        if (exponent & 1U) {
            out *= base;
        }
        base *= base;
        exponent >>= 1U;
    }
    return out;
}

// G_0 .. G_n at x for nodes u_0 .. u_{n-1}, using the scaled form
//   G_k = x^k / k! - sum_{i<k} u_i^{k-i} / (k-i)! G_i.
std::vector<wide> gont_wide(wide x, std::span<const wide> u, std::size_t n)
{
    const auto& f = factorials();
    std::vector<wide> g(n + 1);
    std::vector<wide> upow(n);  // upow[i] = u_i^{k-i} at step k
    g[0] = 1;
    wide xpow = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        xpow *= x;
        upow[k - 1] = 1;
        wide acc = xpow * f.inv_fact[k];
        for (std::size_t i = 0; i < k; ++i) {
            upow[i] *= u[i];
            acc -= upow[i] * f.inv_fact[k - i] * g[i];
        }
        g[k] = acc;
    }
    return g;
}

std::vector<wide> widen(const std::vector<double>& v)
{
    return {v.begin(), v.end()};
}

// P(an infective misses a given set of k housemates | X_L = l) when its
// local contacts are drawn without replacement: (h-1-l)_[k] / (h-1)_[k].
double miss_ratio(std::size_t h, std::size_t l, std::size_t k)
{
    double ratio = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double top = static_cast<double>(h) - 1.0 - static_cast<double>(l) - static_cast<double>(j);
        if (top <= 0.0) {
            return 0.0;
        }
        ratio *= top / (static_cast<double>(h) - 1.0 - static_cast<double>(j));
    }
    return ratio;
}

double local_argument(std::size_t h, std::size_t k)
{
    if (k == 0) {
        return 1.0;
    }
    return 1.0 - static_cast<double>(k) / static_cast<double>(h - 1);
}

}  // namespace

std::vector<double> gont_polys(double x, std::span<const double> nodes, std::size_t n_max)
{
    if (n_max > nodes.size()) {
        std::ostringstream msg;
        msg << "G_" << n_max << " needs " << n_max << " nodes, got " << nodes.size();
        throw std::invalid_argument(msg.str());
    }
    if (n_max > max_household_size) {
        throw std::invalid_argument("Gontcharoff order exceeds the supported maximum of 50");
    }
    const std::vector<wide> u(nodes.begin(), nodes.end());
    const auto g = gont_wide(x, u, n_max);
    return {g.begin(), g.end()};
}

double SusceptibilityPmf::mean() const
{
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += static_cast<double>(i + 1) * probs[i];
    }
    return acc;
}

double SusceptibilityPmf::pgf(double s) const
{
    // Horner in s, then one extra factor for the i >= 1 support.
    double acc = 0.0;
    for (std::size_t i = probs.size(); i-- > 0;) {
        acc = acc * s + probs[i];
    }
    return acc * s;
}

double SusceptibilityPmf::exposure_slope(double t) const
{
    const double decay = std::exp(-t);
    double acc = 0.0;
    double power = 1.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        power *= decay;
        acc += static_cast<double>(i + 1) * probs[i] * power;
    }
    return acc;
}

void check_household(const SwappedModel& model, std::size_t h, SamplingMode mode)
{
    if (h < 1 || h > max_household_size) {
        std::ostringstream msg;
        msg << "household size " << h << " outside supported range [1, " << max_household_size << "]";
        throw ConfigError(msg.str());
    }
    if (mode == SamplingMode::WithoutReplacement) {
        const auto hi = model.max_local();
        if (!hi || *hi > h - 1) {
            std::ostringstream msg;
            msg << "local contacts without replacement need X_L <= h-1 = " << h - 1;
            throw ConfigError(msg.str());
        }
    }
}

std::vector<double> escape_weights(const SwappedModel& model, std::size_t h, SamplingMode mode,
                                   double s)
{
    check_household(model, h, mode);
    std::vector<double> q(h);
    if (mode == SamplingMode::WithReplacement) {
        for (std::size_t k = 0; k < h; ++k) {
            q[k] = model.joint_pgf(s, local_argument(h, k));
        }
        return q;
    }
    const auto atoms = *model.finite_support();
    for (std::size_t k = 0; k < h; ++k) {
        double acc = 0.0;
        for (const auto& a : atoms) {
            acc += a.prob * std::pow(s, a.g) * miss_ratio(h, a.l, k);
        }
        q[k] = acc;
    }
    return q;
}

std::vector<double> escape_weight_slopes(const SwappedModel& model, std::size_t h,
                                         SamplingMode mode)
{
    check_household(model, h, mode);
    std::vector<double> dq(h);
    if (mode == SamplingMode::WithReplacement) {
        for (std::size_t k = 0; k < h; ++k) {
            dq[k] = model.weighted_local_pgf(local_argument(h, k));
        }
        return dq;
    }
    const auto atoms = *model.finite_support();
    for (std::size_t k = 0; k < h; ++k) {
        double acc = 0.0;
        for (const auto& a : atoms) {
            acc += a.prob * a.g * miss_ratio(h, a.l, k);
        }
        dq[k] = acc;
    }
    return dq;
}

SusceptibilityPmf susceptibility_pmf(const SwappedModel& model, std::size_t h, SamplingMode mode)
{
    const auto& f = factorials();
    const auto q = widen(escape_weights(model, h, mode, 1.0));
    const std::span<const wide> shifted(q.data() + 1, h - 1);
    const auto g = gont_wide(1, shifted, h - 1);

    SusceptibilityPmf pmf;
    pmf.probs.resize(h);
    double total = 0.0;
    for (std::size_t i = 1; i <= h; ++i) {
        wide term = f.falling(h - 1, i - 1) * g[i - 1];
        if (i < h) {
            term *= ipow(q[i], h - i);
        }
        double value = static_cast<double>(term);
        if (value < 0.0) {
            if (value < -clamp_tolerance) {
                pmf.unstable = true;
            }
            value = 0.0;
        }
        pmf.probs[i - 1] = value;
        total += value;
    }
    if (std::abs(total - 1.0) > 1e-10 || !(total > 0.0)) {
        pmf.unstable = true;
    }
    if (total > 0.0) {
        for (auto& v : pmf.probs) {
            v /= total;
        }
    }
    return pmf;
}

double emanating_pgf(const SwappedModel& model, std::size_t h, SamplingMode mode, double s)
{
    const auto& f = factorials();
    const auto q = widen(escape_weights(model, h, mode, s));
    const auto g = gont_wide(1, q, h - 1);
    wide acc = 0;
    for (std::size_t i = 0; i < h; ++i) {
        acc += f.falling(h - 1, i) * ipow(q[i], h - i) * g[i];
    }
    const double value = static_cast<double>(acc);
    if (value < -clamp_tolerance || value > 1.0 + 1e-10) {
        std::ostringstream msg;
        msg << "emanating pgf evaluated to " << value << " at s = " << s;
        throw NumericError(msg.str());
    }
    return std::min(1.0, std::max(0.0, value));
}

HouseholdMoments household_moments(const SwappedModel& model, std::size_t h, SamplingMode mode,
                                   double t)
{
    if (!(t >= 0.0)) {
        throw std::invalid_argument("exposure t must be nonnegative");
    }
    const auto& f = factorials();
    const auto q = widen(escape_weights(model, h, mode, 1.0));
    const auto dq = widen(escape_weight_slopes(model, h, mode));
    const wide escape = std::exp(-t);

    // alpha_i = G_i(1 | E U), i = 0..h-1; beta_i = G_i(1 | E^2 U), i = 0..h-2.
    const std::span<const wide> shift1(q.data() + 1, h - 1);
    const auto alpha = gont_wide(1, shift1, h - 1);
    std::vector<wide> beta;
    if (h >= 2) {
        const std::span<const wide> shift2(q.data() + 2, h - 2);
        beta = gont_wide(1, shift2, h - 2);
    }

    // d alpha_n / d s2 at (1,1), from differentiating the defining identity
    // of alpha in s2; alpha_0 does not depend on s2.
    std::vector<wide> dalpha(h, 0);
    for (std::size_t n = 1; n < h; ++n) {
        wide acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += dq[i + 1] * ipow(q[i + 1], n - i - 1) * f.inv_fact[n - i - 1] * alpha[i];
        }
        for (std::size_t i = 1; i < n; ++i) {
            acc += ipow(q[i + 1], n - i) * f.inv_fact[n - i] * dalpha[i];
        }
        dalpha[n] = -acc;
    }

    wide mean_s = 0;
    wide fact2_s = 0;
    wide cross = 0;
    wide escape_pow = 1;
    for (std::size_t i = 1; i <= h; ++i) {
        escape_pow *= escape;
        const wide qpow = i < h ? ipow(q[i], h - i) : wide(1);
        const wide weight = f.falling(h, i) * qpow * escape_pow;
        mean_s += weight * alpha[i - 1];
        if (i >= 2) {
            fact2_s += weight * beta[i - 2];
        }
        cross += weight * dalpha[i - 1];
        if (i < h) {
            cross += f.falling(h, i + 1) * dq[i] * ipow(q[i], h - i - 1) * escape_pow * alpha[i - 1];
        }
    }

    HouseholdMoments out;
    out.h = h;
    out.t = t;
    out.mean_susceptible = static_cast<double>(mean_s);
    out.fact2_susceptible = static_cast<double>(fact2_s);
    out.cross_sg = static_cast<double>(cross);

    const double hd = static_cast<double>(h);
    out.nu_r = 1.0 - out.mean_susceptible / hd;
    if (out.nu_r < -clamp_tolerance || out.nu_r > 1.0 + clamp_tolerance) {
        out.unstable = true;
    }
    out.nu_r = std::min(1.0, std::max(0.0, out.nu_r));

    const auto pmf = susceptibility_pmf(model, h, mode);
    out.unstable = out.unstable || pmf.unstable;
    out.nu_r_prime = pmf.exposure_slope(t);

    const wide var_s = fact2_s + mean_s - mean_s * mean_s;
    out.var_r = static_cast<double>(var_s);
    if (out.var_r < 0.0) {
        if (out.var_r < -1e-9) {
            out.unstable = true;
        }
        out.var_r = 0.0;
    }
    const double mu_g = model.moments().mean_g;
    out.mean_global = hd * mu_g * out.nu_r;
    out.cov_rg = -static_cast<double>(cross - mean_s * static_cast<wide>(out.mean_global));
    return out;
}

}  // namespace hhepi
