#include "hhepi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace hhepi {

namespace {

constexpr double z975 = 1.959963984540054;

std::uint64_t household_threshold(std::uint64_t n_households)
{
    const double k = std::floor(std::log(static_cast<double>(n_households)));
    return static_cast<std::uint64_t>(std::max(1.0, k));
}

}  // namespace

MajorCutoff MajorCutoff::fraction(double z_cut)
{
    if (!(z_cut > 0.0 && z_cut < 1.0)) {
        throw ConfigError("major-outbreak fraction cutoff must lie in (0,1)");
    }
    return {Rule::Fraction, z_cut};
}

MajorCutoff MajorCutoff::households()
{
    return {Rule::Households, 0.0};
}

MajorCutoff MajorCutoff::parse(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string key = text.substr(0, colon);
    const std::string value = colon == std::string::npos ? "" : text.substr(colon + 1);
    if (key == "frac" || key == "fraction") {
        if (colon == std::string::npos) {
            return fraction(0.2);
        }
        std::size_t used = 0;
        double z = 0.0;
        try {
            z = std::stod(value, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != value.size() || used == 0) {
            throw ConfigError("bad cutoff fraction: " + value);
        }
        return fraction(z);
    }
    if (key == "households" && (value.empty() || value == "log")) {
        return households();
    }
    throw ConfigError("cutoff must be frac:<z> or households:log, got " + text);
}

std::string MajorCutoff::to_string() const
{
    if (rule == Rule::Households) {
        return "households:log";
    }
    std::ostringstream out;
    out << "frac:" << z_cut;
    return out.str();
}

bool MajorCutoff::is_major(const EpidemicOutcome& outcome, std::uint64_t n_households,
                           std::uint64_t population) const
{
    if (rule == Rule::Households) {
        return outcome.infected_households >= household_threshold(n_households);
    }
    return static_cast<double>(outcome.final_size) >= z_cut * static_cast<double>(population);
}

double stable_sum(std::span<const double> values)
{
    double sum = 0.0;
    double carry = 0.0;
    for (const double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    return sum + carry;
}

std::vector<double> major_fractions(std::span<const EpidemicOutcome> outcomes,
                                    std::uint64_t n_households, std::uint64_t population,
                                    const MajorCutoff& cutoff)
{
    std::vector<double> out;
    for (const auto& o : outcomes) {
        if (cutoff.is_major(o, n_households, population)) {
            out.push_back(static_cast<double>(o.final_size) / static_cast<double>(population));
        }
    }
    return out;
}

BatchSummary classify_and_estimate(std::span<const EpidemicOutcome> outcomes,
                                   std::uint64_t n_households, std::uint64_t population,
                                   const MajorCutoff& cutoff)
{
    if (outcomes.empty()) {
        throw std::invalid_argument("classify_and_estimate needs at least one outcome");
    }
    if (population == 0) {
        throw std::invalid_argument("population size must be positive");
    }
    const auto fractions = major_fractions(outcomes, n_households, population, cutoff);

    BatchSummary s;
    s.n_total = outcomes.size();
    s.n_major = fractions.size();
    const double n = static_cast<double>(s.n_total);
    s.pi_hat = static_cast<double>(s.n_major) / n;
    const double pi_half = z975 * std::sqrt(s.pi_hat * (1.0 - s.pi_hat) / n);
    s.pi_ci = {s.pi_hat - pi_half, s.pi_hat + pi_half};

    if (s.n_major == 0) {
        return s;
    }
    const double k = static_cast<double>(s.n_major);
    const double mean = stable_sum(fractions) / k;
    s.z_hat = mean;
    if (s.n_major < 2) {
        s.z_ci = Interval{mean, mean};
        return s;
    }
    std::vector<double> squares(fractions.size());
    std::transform(fractions.begin(), fractions.end(), squares.begin(), [mean](double x) {
        return (x - mean) * (x - mean);
    });
    const double sd = std::sqrt(stable_sum(squares) / (k - 1.0));
    const double z_half = z975 * sd / std::sqrt(k);
    s.z_ci = Interval{mean - z_half, mean + z_half};

    const double sigma = std::sqrt(static_cast<double>(population)) * sd;
    const auto dof = s.n_major - 1;
    const double q1 = chi2_quantile(0.025, dof);
    const double q2 = chi2_quantile(0.975, dof);
    s.sigma_hat = sigma;
    s.sigma_ci = Interval{sigma * std::sqrt((k - 1.0) / q2), sigma * std::sqrt((k - 1.0) / q1)};
    return s;
}

double ks_statistic(std::vector<double> samples, double z, double sigma2, std::uint64_t population)
{
    if (samples.empty()) {
        throw std::invalid_argument("KS statistic needs a nonempty sample");
    }
    if (!(sigma2 > 0.0) || population == 0) {
        throw std::invalid_argument("KS statistic needs sigma2 > 0 and N > 0");
    }
    std::sort(samples.begin(), samples.end());
    const double var = sigma2 / static_cast<double>(population);
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i], z, var);
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d = std::max({d, above, below});
    }
    return d;
}

double normal_cdf(double x, double mean, double var)
{
    if (!(var > 0.0)) {
        throw std::invalid_argument("normal_cdf needs var > 0");
    }
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

double normal_quantile(double q)
{
    if (!(q > 0.0 && q < 1.0)) {
        throw std::invalid_argument("normal_quantile needs q in (0,1)");
    }
    return boost::math::quantile(boost::math::normal_distribution<double>(), q);
}

double chi2_quantile(double q, std::uint64_t dof)
{
    if (!(q > 0.0 && q < 1.0) || dof < 1) {
        throw std::invalid_argument("chi2_quantile needs q in (0,1) and dof >= 1");
    }
    const double k = static_cast<double>(dof);
    const double c = 2.0 / (9.0 * k);
    const double t = 1.0 - c + normal_quantile(q) * std::sqrt(c);
    return k * t * t * t;
}

std::vector<EpidemicOutcome> simulate_until_majors(const PopulationSpec& spec,
                                                   const MajorCutoff& cutoff,
                                                   std::uint64_t target_majors,
                                                   std::uint64_t max_runs, unsigned threads)
{
    if (target_majors < 1 || max_runs < 1) {
        throw ConfigError("need a positive target of major runs and a positive run cap");
    }
    std::vector<EpidemicOutcome> all;
    std::uint64_t majors = 0;
    std::uint64_t chunk = std::max<std::uint64_t>(1024, target_majors);
    while (all.size() < max_runs) {
        const std::uint64_t first = all.size();
        const std::uint64_t count = std::min(chunk, max_runs - first);
        const auto batch = run_batch(spec, count, threads, first);
        for (const auto& o : batch) {
            all.push_back(o);
            if (cutoff.is_major(o, spec.n, spec.population()) && ++majors == target_majors) {
                return all;
            }
        }
        chunk = std::max<std::uint64_t>(1024, (target_majors - majors) * 2);
    }
    return all;
}

}  // namespace hhepi
