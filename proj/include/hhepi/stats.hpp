#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hhepi/simulator.hpp"

namespace hhepi {

/// Rule deciding which runs count as major outbreaks.
struct MajorCutoff
{
    enum class Rule
    {
        Fraction,    // Z/N >= z_cut
        Households,  // V >= floor(log n)
    };

    Rule rule = Rule::Fraction;
    double z_cut = 0.2;

    static MajorCutoff fraction(double z_cut);
    static MajorCutoff households();

    /// Parses "frac:0.2" or "households:log".
    static MajorCutoff parse(const std::string& text);
    std::string to_string() const;

    bool is_major(const EpidemicOutcome& outcome, std::uint64_t n_households,
                  std::uint64_t population) const;
};

using Interval = std::pair<double, double>;

struct BatchSummary
{
    std::uint64_t n_total = 0;
    std::uint64_t n_major = 0;
    double pi_hat = 0.0;
    Interval pi_ci{0.0, 0.0};
    /// Absent when there are no major runs.
    std::optional<double> z_hat;
    std::optional<Interval> z_ci;
    /// Absent with fewer than two major runs.
    std::optional<double> sigma_hat;
    std::optional<Interval> sigma_ci;
    std::optional<double> ks_d;

    bool no_major_outbreaks() const { return n_major == 0; }
};

/// Compensated (Neumaier) summation.
double stable_sum(std::span<const double> values);

/// Major-run statistics: Wald interval for pi, normal interval for the mean
/// final fraction, chi-square interval for sigma = sqrt(N) * sd.
BatchSummary classify_and_estimate(std::span<const EpidemicOutcome> outcomes,
                                   std::uint64_t n_households, std::uint64_t population,
                                   const MajorCutoff& cutoff);

/// Final fractions Z/N of the major runs, in run order.
std::vector<double> major_fractions(std::span<const EpidemicOutcome> outcomes,
                                    std::uint64_t n_households, std::uint64_t population,
                                    const MajorCutoff& cutoff);

/// sup_x |F_n(x) - Phi((x - z) / sqrt(sigma2 / N))|.
double ks_statistic(std::vector<double> samples, double z, double sigma2, std::uint64_t population);

double normal_cdf(double x, double mean = 0.0, double var = 1.0);
double normal_quantile(double q);
/// Wilson-Hilferty approximation.
double chi2_quantile(double q, std::uint64_t dof);

/// Runs batches from run index 0 upward until `target_majors` major runs have
/// been seen (or `max_runs` runs were made). The returned list stops at the
/// run that produced the last required major.
std::vector<EpidemicOutcome> simulate_until_majors(const PopulationSpec& spec,
                                                   const MajorCutoff& cutoff,
                                                   std::uint64_t target_majors,
                                                   std::uint64_t max_runs, unsigned threads = 1);

}  // namespace hhepi
