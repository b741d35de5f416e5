#pragma once

// Independent reference computations used to cross-check the library. None of
// these go through the Gontcharoff recursions.

#include <cstdint>
#include <span>
#include <vector>

#include "hhepi/contact_model.hpp"
#include "hhepi/gontcharoff.hpp"

namespace hhepi::oracle {

/// A finite contact law given atom by atom, plus the swap probability.
struct SmallLaw
{
    std::vector<JointAtom> atoms;
    double p = 0.0;
};

/// P(S = i), i = 1..h, by enumerating every contact realisation in one
/// household. Practical for h <= 4 and a handful of contacts.
std::vector<double> susceptibility_pmf(const SmallLaw& law, std::size_t h, SamplingMode mode);

/// P(C = c), c = 0.., for the global contacts made by a household epidemic
/// started by one member, by the same enumeration.
std::vector<double> emanating_pmf(const SmallLaw& law, std::size_t h, SamplingMode mode);

/// sum_c pmf[c] s^c
double pgf(std::span<const double> pmf, double s);

/// G_0 .. G_{n_max} at x, evaluated in exact rational arithmetic from the
/// defining triangular identity; the nodes are taken as exact binary values.
std::vector<double> gont_polys_exact(double x, std::span<const double> nodes, std::size_t n_max);

struct VarianceEstimate
{
    double value = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo estimate of (1/h) var(R + b (G - Y)) for one household whose
/// members each receive Po(tau) global contacts: Y is the number received, R
/// the number infected after local spread and G the global contacts they make.
VarianceEstimate household_variance_mc(const SwappedModel& model, std::size_t h, SamplingMode mode,
                                       double tau, double b, std::uint64_t samples,
                                       std::uint64_t seed);

}  // namespace hhepi::oracle
