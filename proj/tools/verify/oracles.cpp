#include "verify/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <utility>

#include <boost/multiprecision/cpp_int.hpp>

#include "hhepi/rng.hpp"
#include "hhepi/stats.hpp"

namespace hhepi::oracle {

namespace {

using Mask = std::uint32_t;

// What one member does: which housemates it contacts and how many global
// contacts it makes.
struct MemberOutcome
{
    Mask targets = 0;
    std::uint64_t global = 0;
    double prob = 0.0;
};

class MemberEnumerator
{
  public:
    MemberEnumerator(const SmallLaw& law, std::size_t h, SamplingMode mode, std::size_t self)
        : law_(law), h_(h), mode_(mode), self_(self)
    {
    }

    std::vector<MemberOutcome> run()
    {
        for (const auto& atom : law_.atoms) {
            if (atom.prob > 0.0) {
                expand(atom.l, 0, atom.g, atom.prob);
            }
        }
        std::vector<MemberOutcome> out;
        for (const auto& [key, prob] : merged_) {
            out.push_back({key.first, key.second, prob});
        }
        return out;
    }

  private:
    void expand(std::uint64_t remaining, Mask mask, std::uint64_t global, double prob)
    {
        if (remaining == 0) {
            merged_[{mask, global}] += prob;
            return;
        }
        const double p = law_.p;
        if (p > 0.0) {
            expand(remaining - 1, mask, global + 1, prob * p);
        }
        if (p >= 1.0) {
            return;
        }
        const double keep = prob * (1.0 - p);
        if (h_ == 1) {
            expand(remaining - 1, mask, global, keep);
            return;
        }
        std::vector<std::size_t> choices;
        for (std::size_t j = 0; j < h_; ++j) {
            if (j == self_) {
                continue;
            }
            if (mode_ == SamplingMode::WithoutReplacement && (mask >> j & 1U)) {
                continue;
            }
            choices.push_back(j);
        }
        if (choices.empty()) {
            throw std::invalid_argument("more distinct local contacts than housemates");
        }
        const double each = keep / static_cast<double>(choices.size());
        for (const auto j : choices) {
            expand(remaining - 1, mask | Mask{1} << j, global, each);
        }
    }

    const SmallLaw& law_;
    std::size_t h_;
    SamplingMode mode_;
    std::size_t self_;
    std::map<std::pair<Mask, std::uint64_t>, double> merged_;
};

struct HouseholdLaws
{
    std::vector<double> susceptible;  // index i-1 -> P(S = i)
    std::vector<double> emanating;    // index c -> P(C = c)
};

HouseholdLaws enumerate_household(const SmallLaw& law, std::size_t h, SamplingMode mode)
{
    if (h < 1 || h > 8) {
        throw std::invalid_argument("brute-force enumeration supports 1 <= h <= 8");
    }
    std::vector<std::vector<MemberOutcome>> members;
    for (std::size_t j = 0; j < h; ++j) {
        members.push_back(MemberEnumerator(law, h, mode, j).run());
    }

    HouseholdLaws out;
    out.susceptible.assign(h, 0.0);
    std::vector<Mask> adj(h);
    std::vector<std::uint64_t> global(h);

    auto leaf = [&](double prob) {
        // Members with a local chain into member 0.
        Mask reach_in = 1;
        for (bool grew = true; grew;) {
            grew = false;
            for (std::size_t j = 0; j < h; ++j) {
                if (!(reach_in >> j & 1U) && (adj[j] & reach_in)) {
                    reach_in |= Mask{1} << j;
                    grew = true;
                }
            }
        }
        // Members infected when member 0 is the primary case.
        Mask reach_out = 1;
        for (bool grew = true; grew;) {
            grew = false;
            for (std::size_t j = 0; j < h; ++j) {
                if ((reach_out >> j & 1U) && (adj[j] & ~reach_out)) {
                    reach_out |= adj[j];
                    grew = true;
                }
            }
        }
        std::uint64_t c = 0;
        for (std::size_t j = 0; j < h; ++j) {
            if (reach_out >> j & 1U) {
                c += global[j];
            }
        }
        out.susceptible[static_cast<std::size_t>(std::popcount(reach_in)) - 1] += prob;
        if (out.emanating.size() <= c) {
            out.emanating.resize(c + 1, 0.0);
        }
        out.emanating[c] += prob;
    };

    auto recurse = [&](auto&& self, std::size_t j, double prob) -> void {
        if (j == h) {
            leaf(prob);
            return;
        }
        for (const auto& o : members[j]) {
            adj[j] = o.targets;
            global[j] = o.global;
            self(self, j + 1, prob * o.prob);
        }
    };
    recurse(recurse, 0, 1.0);
    return out;
}

template<class T>
T power(const T& base, std::size_t exponent)
{
    T out = 1;
    for (std::size_t k = 0; k < exponent; ++k) {
        out *= base;
    }
    return out;
}

}  // namespace

std::vector<double> susceptibility_pmf(const SmallLaw& law, std::size_t h, SamplingMode mode)
{
    return enumerate_household(law, h, mode).susceptible;
}

std::vector<double> emanating_pmf(const SmallLaw& law, std::size_t h, SamplingMode mode)
{
    return enumerate_household(law, h, mode).emanating;
}

double pgf(std::span<const double> pmf, double s)
{
    double acc = 0.0;
    for (std::size_t c = pmf.size(); c-- > 0;) {
        acc = acc * s + pmf[c];
    }
    return acc;
}

std::vector<double> gont_polys_exact(double x, std::span<const double> nodes, std::size_t n_max)
{
    using boost::multiprecision::cpp_rational;
    if (n_max > nodes.size()) {
        throw std::invalid_argument("not enough nodes");
    }
    const cpp_rational rx(x);
    std::vector<cpp_rational> u;
    for (const double v : nodes) {
        u.emplace_back(v);
    }
    // x^n = sum_{i=0}^{n} n_[i] u_i^{n-i} G_i, solved for G_n (n_[n] = n!).
    std::vector<cpp_rational> g;
    g.emplace_back(1);
    for (std::size_t n = 1; n <= n_max; ++n) {
        cpp_rational rest = power(rx, n);
        cpp_rational falling = 1;
        for (std::size_t i = 0; i < n; ++i) {
            rest -= falling * power(u[i], n - i) * g[i];
            falling *= static_cast<long long>(n - i);
        }
        g.push_back(rest / falling);
    }
    std::vector<double> out;
    for (const auto& v : g) {
        out.push_back(static_cast<double>(v));
    }
    return out;
}

VarianceEstimate household_variance_mc(const SwappedModel& model, std::size_t h, SamplingMode mode,
                                       double tau, double b, std::uint64_t samples,
                                       std::uint64_t seed)
{
    if (samples < 2 || h < 1) {
        throw std::invalid_argument("need at least two samples and h >= 1");
    }
    const double p = model.p();
    Rng rng(seed);
    std::vector<double> values(samples);
    std::vector<std::uint8_t> infected(h);
    std::vector<std::size_t> queue;
    std::vector<std::size_t> others;
    for (std::uint64_t k = 0; k < samples; ++k) {
        std::fill(infected.begin(), infected.end(), std::uint8_t{0});
        queue.clear();
        std::uint64_t received = 0;
        for (std::size_t j = 0; j < h; ++j) {
            std::uint64_t zeta = 0;
            if (tau > 0.0) {
                zeta = std::poisson_distribution<std::uint64_t>(tau)(rng);
            }
            received += zeta;
            if (zeta > 0) {
                infected[j] = 1;
                queue.push_back(j);
            }
        }
        std::uint64_t made = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const std::size_t who = queue[head];
            const auto draw = model.base().sample(rng);
            std::uint64_t local = 0;
            made += draw.global;
            for (std::uint64_t c = 0; c < draw.local; ++c) {
                if (p > 0.0 && rng.uniform() < p) {
                    ++made;
                } else {
                    ++local;
                }
            }
            if (h == 1) {
                continue;
            }
            if (mode == SamplingMode::WithoutReplacement && local > h - 1) {
                throw std::invalid_argument("more distinct local contacts than housemates");
            }
            others.clear();
            for (std::size_t j = 0; j < h; ++j) {
                if (j != who) {
                    others.push_back(j);
                }
            }
            for (std::uint64_t c = 0; c < local; ++c) {
                std::size_t target = 0;
                if (mode == SamplingMode::WithReplacement) {
                    target = others[rng.below(others.size())];
                } else {
                    const std::size_t pick = c + rng.below(others.size() - c);
                    std::swap(others[c], others[pick]);
                    target = others[c];
                }
                if (!infected[target]) {
                    infected[target] = 1;
                    queue.push_back(target);
                }
            }
        }
        values[k] = static_cast<double>(queue.size()) +
                    b * (static_cast<double>(made) - static_cast<double>(received));
    }

    const double n = static_cast<double>(samples);
    const double mean = stable_sum(values) / n;
    std::vector<double> sq(samples);
    std::vector<double> quad(samples);
    for (std::uint64_t k = 0; k < samples; ++k) {
        const double d = values[k] - mean;
        sq[k] = d * d;
        quad[k] = sq[k] * sq[k];
    }
    const double m2 = stable_sum(sq) / n;
    const double m4 = stable_sum(quad) / n;
    const double hd = static_cast<double>(h);
    VarianceEstimate out;
    out.value = m2 * n / (n - 1.0) / hd;
    out.std_error = std::sqrt(std::max(0.0, m4 - m2 * m2) / n) / hd;
    return out;
}

}  // namespace hhepi::oracle
