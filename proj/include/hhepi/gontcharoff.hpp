#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "hhepi/contact_model.hpp"

namespace hhepi {

/// How an infective's contacts select their targets within a group.
enum class SamplingMode
{
    WithReplacement,
    WithoutReplacement,
};

/// Largest household size the recursions accept.
inline constexpr std::size_t max_household_size = 50;

/// Raised when a recursion produces values outside their admissible range by
/// more than rounding can explain.
class NumericError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// G_0(x|U), ..., G_{n_max}(x|U), from the triangular identity
///   sum_{i=0}^{n} n_[i] u_i^{n-i} G_i(x|U) = x^n.
/// G_n depends on u_0 .. u_{n-1}, so n_max may not exceed nodes.size().
/// Accumulation is carried out in binary128.
std::vector<double> gont_polys(double x, std::span<const double> nodes, std::size_t n_max);

/// Distribution of the susceptibility-set size S in [1, h].
struct SusceptibilityPmf
{
    /// probs[i-1] = P(S = i)
    std::vector<double> probs;
    /// Set when a negative entry exceeded the clamping tolerance.
    bool unstable = false;

    std::size_t h() const { return probs.size(); }
    double mean() const;
    /// f_S(s) = sum_i P(S=i) s^i
    double pgf(double s) const;
    /// sum_i i P(S=i) e^{-i t}, the derivative of 1 - f_S(e^{-t}) in t.
    double exposure_slope(double t) const;
};

/// Escape weights q_0(s), ..., q_{h-1}(s): E[s^X_G 1{an infective misses a
/// given set of k housemates}].
std::vector<double> escape_weights(const SwappedModel& model, std::size_t h, SamplingMode mode,
                                   double s);
/// q_k'(1) = E[X_G 1{misses k housemates}], k = 0..h-1.
std::vector<double> escape_weight_slopes(const SwappedModel& model, std::size_t h,
                                         SamplingMode mode);

/// Throws ConfigError for h outside [1, max_household_size] or local
/// contacts that cannot be made without replacement.
void check_household(const SwappedModel& model, std::size_t h, SamplingMode mode);

SusceptibilityPmf susceptibility_pmf(const SwappedModel& model, std::size_t h, SamplingMode mode);

/// f_C(s): pgf of the number of global contacts emanating from a household
/// epidemic started by one infective.
double emanating_pgf(const SwappedModel& model, std::size_t h, SamplingMode mode, double s);

/// Moments of a household in which every member independently escapes
/// external infection with probability e^{-t}. S~ counts the members never
/// infected, G~ the global contacts made by those infected, R = h - S~.
struct HouseholdMoments
{
    std::size_t h = 0;
    double t = 0.0;
    double mean_susceptible = 0.0;   // E[S~]
    double fact2_susceptible = 0.0;  // E[S~ (S~ - 1)]
    double cross_sg = 0.0;           // E[S~ G~]
    double mean_global = 0.0;        // E[G~] = h mu_G nu_R
    double nu_r = 0.0;               // E[R]/h
    double nu_r_prime = 0.0;         // d nu_R / dt
    double var_r = 0.0;
    double cov_rg = 0.0;
    bool unstable = false;
};

HouseholdMoments household_moments(const SwappedModel& model, std::size_t h, SamplingMode mode,
                                   double t);

}  // namespace hhepi
