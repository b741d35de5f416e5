#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hhepi/contact_model.hpp"
#include "hhepi/gontcharoff.hpp"

namespace hhepi {

/// Structural parameters of one population regime: household size, swap
/// probability and how local contacts pick their targets.
struct HouseholdSpec
{
    std::size_t h = 1;
    double p = 0.0;
    SamplingMode local_mode = SamplingMode::WithReplacement;
};

/// Household reproduction number R_* = mu_G E[S] (post-swap).
double r_star(const SwappedModel& model, const HouseholdSpec& spec);

struct OutbreakProbability
{
    double rho = 1.0;  // extinction probability from one initial infective
    double pi = 0.0;   // 1 - rho^m
    std::size_t iterations = 0;
    bool converged = false;
};

/// Smallest fixed point of rho = f_C(rho) by functional iteration from 0.
OutbreakProbability outbreak_probability(const SwappedModel& model, const HouseholdSpec& spec,
                                         std::size_t m);

struct FinalSize
{
    double z = 0.0;
    double tau = 0.0;  // mu_G z, the global exposure per individual
};

/// Largest root of z = 1 - f_S(exp(-mu_G z)); zero unless R_* > 1.
FinalSize final_size(const SwappedModel& model, const HouseholdSpec& spec);

struct CltVariance
{
    double sigma2 = 0.0;      // household-level covariance form
    double sigma2_alt = 0.0;  // pairwise-indicator form
    double b = 0.0;           // nu_R'(tau) / (1 - mu_G nu_R'(tau))
    double tau = 0.0;
    HouseholdMoments household;
};

/// Scaled variance of the major-outbreak final fraction. Throws
/// std::domain_error unless R_* > 1; throws NumericError when the two
/// variance forms disagree by more than 1e-8 relative.
CltVariance clt_variance(const SwappedModel& model, const HouseholdSpec& spec);

struct AsymptoticSummary
{
    double r_star = 0.0;
    double rho = 1.0;
    double pi = 0.0;
    double z = 0.0;
    double tau = 0.0;
    std::optional<double> sigma2;
    std::size_t m = 1;
    std::size_t h = 1;
    double p = 0.0;
    bool converged = true;
    bool unstable = false;
};

AsymptoticSummary summarize(const ContactModel& model, const HouseholdSpec& spec, std::size_t m);
AsymptoticSummary summarize(const SwappedModel& model, const HouseholdSpec& spec, std::size_t m);

/// Final fraction of a homogeneously mixing epidemic: root of 1 - z = e^{-alpha z}.
double z_hom(double alpha);

struct ZStarThreshold
{
    double value = 0.0;
    /// sigma_L^2 >= mu_L: outside the regime where the threshold is meaningful.
    bool degenerate = false;
};

/// z*(mu_L, sigma_L^2) = 1 - (mu_L - sigma_L^2) / (3 mu_L^2). Throws for mu_L <= 0.
ZStarThreshold z_star_threshold(double mu_l, double sigma_l2);

/// One-sided difference z^{(h,1)} - z^{(h,1-step)}.
double final_size_slope_near_one(const ContactModel& model, std::size_t h, SamplingMode mode,
                                 double step = 0.01);

struct SweepRow
{
    std::size_t h = 1;
    double p = 0.0;
    double r_star = 0.0;
    double rho = 1.0;
    double pi = 0.0;
    double z = 0.0;
    double tau = 0.0;
    std::optional<double> sigma;
    bool unstable = false;
};

struct MonotoneFlags
{
    bool in_h = true;
    bool in_p = true;
};

struct MonotonicityReport
{
    MonotoneFlags pi;
    MonotoneFlags z;
    MonotoneFlags sigma;
    /// max over p of |z^{(h_max,p)} - z_hom(mu_G + mu_L)|
    double z_hom_gap = 0.0;
    std::size_t h_max = 0;
};

struct SweepResult
{
    std::vector<SweepRow> rows;  // h-major, p-minor order
    MonotonicityReport report;
};

/// Fill the (h, p) grid; rows are computed on up to `threads` workers and
/// assembled in grid order.
SweepResult sweep(const SwappedModel& model, const std::vector<std::size_t>& h_values,
                  const std::vector<double>& p_grid, std::size_t m, SamplingMode mode,
                  unsigned threads = 1);

/// Monotonicity flags for an already computed grid (tolerance 1e-9).
MonotonicityReport monotonicity(const std::vector<SweepRow>& rows, std::size_t n_h, std::size_t n_p,
                                double alpha);

}  // namespace hhepi
