#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "hhepi/rng.hpp"

namespace hhepi {

/// Thrown when a model, population or experiment is configured with
/// parameters outside their domain.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Contact laws for (X_G, X_L): global and local infectious contacts made by
// one infective.
// ---------------------------------------------------------------------------

struct Constant
{
    std::uint32_t g = 0;
    std::uint32_t l = 0;
};

struct IndependentPoisson
{
    double lambda_g = 0.0;
    double lambda_l = 0.0;
};

struct IndependentBinomial
{
    std::uint32_t n_g = 0;
    double q_g = 0.0;
    std::uint32_t n_l = 0;
    double q_l = 0.0;
};

/// Gamma mixing law, shape/rate parameterisation (mean shape/rate).
struct GammaMixing
{
    double shape = 1.0;
    double rate = 1.0;
};

struct ExponentialMixing
{
    double rate = 1.0;
};

struct PointMassMixing
{
    double value = 1.0;
};

using MixingLaw = std::variant<GammaMixing, ExponentialMixing, PointMassMixing>;

/// X_G | I ~ Po(beta_g I), X_L | I ~ Po(beta_l I), conditionally independent.
struct MixedPoisson
{
    double beta_g = 0.0;
    double beta_l = 0.0;
    MixingLaw mixing = PointMassMixing{1.0};
};

struct JointAtom
{
    std::uint32_t g = 0;
    std::uint32_t l = 0;
    double prob = 0.0;
};

struct JointTable
{
    std::vector<JointAtom> atoms;
};

using ContactKind =
    std::variant<Constant, IndependentPoisson, IndependentBinomial, MixedPoisson, JointTable>;

struct ContactMoments
{
    double mean_g = 0.0;
    double mean_l = 0.0;
    double var_g = 0.0;
    double var_l = 0.0;
    double cov_gl = 0.0;
};

struct ContactDraw
{
    std::uint64_t global = 0;
    std::uint64_t local = 0;
};

struct LogConvexityReport
{
    bool convex = false;
    double min_second_diff = 0.0;
};

/// Immutable bivariate contact law. Every query has a closed form (finite sum
/// for tables); nothing is approximated by series truncation or differencing.
class ContactModel
{
  public:
    ContactModel(ContactKind kind);

    const ContactKind& kind() const { return kind_; }
    std::string name() const;

    /// E[s1^X_G s2^X_L] for s1, s2 in [0,1].
    double joint_pgf(double s1, double s2) const;
    /// f_{X_L}(t).
    double local_pgf(double t) const { return joint_pgf(1.0, t); }
    /// E[X_G t^X_L], the s1-partial of the joint pgf at (1, t).
    double weighted_local_pgf(double t) const;
    /// E[X_L t^(X_L - 1)], the derivative of f_{X_L}.
    double local_pgf_derivative(double t) const;

    ContactMoments moments() const;

    /// Largest value X_L can take, if the support is finite.
    std::optional<std::uint64_t> max_local() const;
    /// Full joint pmf when the support is finite.
    std::optional<std::vector<JointAtom>> finite_support() const;

    ContactDraw sample(Rng& rng) const;

  private:
    ContactKind kind_;
};

/// (X_G^(p), X_L^(p)): each local contact of `base` independently becomes a
/// global contact with probability p. Evaluated through the pgf substitution
/// f'(s1, s2) = f(s1, p s1 + (1-p) s2).
class SwappedModel
{
  public:
    SwappedModel(ContactModel base, double p = 0.0);

    const ContactModel& base() const { return base_; }
    double p() const { return p_; }

    double joint_pgf(double s1, double s2) const;
    double local_pgf(double t) const { return joint_pgf(1.0, t); }
    double weighted_local_pgf(double t) const;
    ContactMoments moments() const;

    std::optional<std::uint64_t> max_local() const { return base_.max_local(); }
    std::optional<std::vector<JointAtom>> finite_support() const;

    /// Draw from the base law and thin the local contacts with independent
    /// Bernoulli(p) coins.
    ContactDraw sample(Rng& rng) const;

  private:
    ContactModel base_;
    double p_;
};

/// Swap composition: swapping with p1 then p2 equals swapping with
/// 1 - (1-p1)(1-p2).
SwappedModel swap(const SwappedModel& model, double p);

/// Second central differences of log f_{X_L} on a uniform grid over
/// [1e-6, 1]; convex iff all are >= -1e-9.
LogConvexityReport log_convexity_report(const ContactModel& model, std::size_t grid_size);

}  // namespace hhepi
