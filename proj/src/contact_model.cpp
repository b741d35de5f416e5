#include "hhepi/contact_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace hhepi {

namespace {

template<class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template<class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_prob(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }
bool is_rate(double x) { return std::isfinite(x) && x >= 0.0; }

// Mixing law I: mgf M(u) = E[exp(u I)] for u <= 0, its derivative, and
// the first two moments.
struct MixingView
{
    const MixingLaw& law;

    bool gamma_shape_rate(double& shape, double& rate) const
    {
        if (auto* g = std::get_if<GammaMixing>(&law)) {
            shape = g->shape;
            rate = g->rate;
            return true;
        }
        if (auto* e = std::get_if<ExponentialMixing>(&law)) {
            shape = 1.0;
            rate = e->rate;
            return true;
        }
        return false;
    }

    double mgf(double u) const
    {
        double shape, rate;
        if (gamma_shape_rate(shape, rate)) {
            return std::pow(1.0 - u / rate, -shape);
        }
        return std::exp(u * std::get<PointMassMixing>(law).value);
    }

    double mgf_derivative(double u) const
    {
        double shape, rate;
        if (gamma_shape_rate(shape, rate)) {
            return (shape / rate) * std::pow(1.0 - u / rate, -shape - 1.0);
        }
        const double v = std::get<PointMassMixing>(law).value;
        return v * std::exp(u * v);
    }

    double mean() const
    {
        double shape, rate;
        if (gamma_shape_rate(shape, rate)) {
            return shape / rate;
        }
        return std::get<PointMassMixing>(law).value;
    }

    double variance() const
    {
        double shape, rate;
        if (gamma_shape_rate(shape, rate)) {
            return shape / (rate * rate);
        }
        return 0.0;
    }

    double sample(Rng& rng) const
    {
        double shape, rate;
        if (gamma_shape_rate(shape, rate)) {
            return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
        }
        return std::get<PointMassMixing>(law).value;
    }
};

std::uint64_t sample_poisson(double mean, Rng& rng)
{
    if (mean <= 0.0) {
        return 0;
    }
    return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

std::uint64_t sample_binomial(std::uint32_t n, double q, Rng& rng)
{
    if (n == 0 || q <= 0.0) {
        return 0;
    }
    if (q >= 1.0) {
        return n;
    }
    return std::binomial_distribution<std::uint64_t>(n, q)(rng);
}

double binomial_pmf(std::uint32_t n, std::uint32_t k, double q)
{
    const double log_choose =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    if (q <= 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    if (q >= 1.0) {
        return k == n ? 1.0 : 0.0;
    }
    return std::exp(log_choose + k * std::log(q) + (n - k) * std::log1p(-q));
}

void validate(const ContactKind& kind)
{
    std::visit(
        Overloaded{
            [](const Constant&) {},
            [](const IndependentPoisson& m) {
                if (!is_rate(m.lambda_g) || !is_rate(m.lambda_l)) {
                    throw ConfigError("poisson rates must be finite and nonnegative");
                }
            },
            [](const IndependentBinomial& m) {
                if (!is_prob(m.q_g) || !is_prob(m.q_l)) {
                    throw ConfigError("binomial success probabilities must lie in [0,1]");
                }
            },
            [](const MixedPoisson& m) {
                if (!is_rate(m.beta_g) || !is_rate(m.beta_l)) {
                    throw ConfigError("mixed-poisson rates must be finite and nonnegative");
                }
                std::visit(Overloaded{
                               [](const GammaMixing& g) {
                                   if (!(g.shape > 0.0) || !(g.rate > 0.0) ||
                                       !std::isfinite(g.shape) || !std::isfinite(g.rate)) {
                                       throw ConfigError("gamma mixing needs shape > 0 and rate > 0");
                                   }
                               },
                               [](const ExponentialMixing& e) {
                                   if (!(e.rate > 0.0) || !std::isfinite(e.rate)) {
                                       throw ConfigError("exponential mixing needs rate > 0");
                                   }
                               },
                               [](const PointMassMixing& pm) {
                                   if (!is_rate(pm.value)) {
                                       throw ConfigError("point-mass mixing value must be >= 0");
                                   }
                               },
                           },
                           m.mixing);
            },
            [](const JointTable& t) {
                if (t.atoms.empty()) {
                    throw ConfigError("joint table must have at least one entry");
                }
                double total = 0.0;
                for (const auto& a : t.atoms) {
                    if (!is_prob(a.prob)) {
                        throw ConfigError("joint table probabilities must lie in [0,1]");
                    }
                    total += a.prob;
                }
                if (std::abs(total - 1.0) > 1e-12) {
                    std::ostringstream msg;
                    msg << "joint table probabilities sum to " << total << ", expected 1";
                    throw ConfigError(msg.str());
                }
            },
        },
        kind);
}

}  // namespace

ContactModel::ContactModel(ContactKind kind) : kind_(std::move(kind))
{
    validate(kind_);
}

std::string ContactModel::name() const
{
    std::ostringstream out;
    std::visit(Overloaded{
                   [&](const Constant& m) { out << "Constant(" << m.g << "," << m.l << ")"; },
                   [&](const IndependentPoisson& m) {
                       out << "Poisson(" << m.lambda_g << "," << m.lambda_l << ")";
                   },
                   [&](const IndependentBinomial& m) {
                       out << "Binomial(" << m.n_g << "," << m.q_g << ";" << m.n_l << "," << m.q_l
                           << ")";
                   },
                   [&](const MixedPoisson& m) {
                       out << "MixedPoisson(" << m.beta_g << "," << m.beta_l << ",";
                       std::visit(Overloaded{
                                      [&](const GammaMixing& g) {
                                          out << "Gamma(" << g.shape << "," << g.rate << ")";
                                      },
                                      [&](const ExponentialMixing& e) { out << "Exp(" << e.rate << ")"; },
                                      [&](const PointMassMixing& p) { out << "Point(" << p.value << ")"; },
                                  },
                                  m.mixing);
                       out << ")";
                   },
                   [&](const JointTable& t) { out << "JointTable[" << t.atoms.size() << "]"; },
               },
               kind_);
    return out.str();
}

double ContactModel::joint_pgf(double s1, double s2) const
{
    return std::visit(
        Overloaded{
            [&](const Constant& m) { return std::pow(s1, m.g) * std::pow(s2, m.l); },
            [&](const IndependentPoisson& m) {
                return std::exp(m.lambda_g * (s1 - 1.0) + m.lambda_l * (s2 - 1.0));
            },
            [&](const IndependentBinomial& m) {
                return std::pow(1.0 - m.q_g + m.q_g * s1, m.n_g) *
                       std::pow(1.0 - m.q_l + m.q_l * s2, m.n_l);
            },
            [&](const MixedPoisson& m) {
                return MixingView{m.mixing}.mgf(m.beta_g * (s1 - 1.0) + m.beta_l * (s2 - 1.0));
            },
            [&](const JointTable& t) {
                double sum = 0.0;
                for (const auto& a : t.atoms) {
                    sum += a.prob * std::pow(s1, a.g) * std::pow(s2, a.l);
                }
                return sum;
            },
        },
        kind_);
}

double ContactModel::weighted_local_pgf(double t) const
{
    return std::visit(
        Overloaded{
            [&](const Constant& m) { return m.g * std::pow(t, m.l); },
            [&](const IndependentPoisson& m) { return m.lambda_g * std::exp(m.lambda_l * (t - 1.0)); },
            [&](const IndependentBinomial& m) {
                return m.n_g * m.q_g * std::pow(1.0 - m.q_l + m.q_l * t, m.n_l);
            },
            [&](const MixedPoisson& m) {
                return m.beta_g * MixingView{m.mixing}.mgf_derivative(m.beta_l * (t - 1.0));
            },
            [&](const JointTable& tab) {
                double sum = 0.0;
                for (const auto& a : tab.atoms) {
                    sum += a.prob * a.g * std::pow(t, a.l);
                }
                return sum;
            },
        },
        kind_);
}

double ContactModel::local_pgf_derivative(double t) const
{
    return std::visit(
        Overloaded{
            [&](const Constant& m) { return m.l == 0 ? 0.0 : m.l * std::pow(t, m.l - 1); },
            [&](const IndependentPoisson& m) { return m.lambda_l * std::exp(m.lambda_l * (t - 1.0)); },
            [&](const IndependentBinomial& m) {
                return m.n_l == 0 ? 0.0 : m.n_l * m.q_l * std::pow(1.0 - m.q_l + m.q_l * t, m.n_l - 1);
            },
            [&](const MixedPoisson& m) {
                return m.beta_l * MixingView{m.mixing}.mgf_derivative(m.beta_l * (t - 1.0));
            },
            [&](const JointTable& tab) {
                double sum = 0.0;
                for (const auto& a : tab.atoms) {
                    if (a.l > 0) {
                        sum += a.prob * a.l * std::pow(t, a.l - 1);
                    }
                }
                return sum;
            },
        },
        kind_);
}

ContactMoments ContactModel::moments() const
{
    return std::visit(
        Overloaded{
            [](const Constant& m) {
                return ContactMoments{double(m.g), double(m.l), 0.0, 0.0, 0.0};
            },
            [](const IndependentPoisson& m) {
                return ContactMoments{m.lambda_g, m.lambda_l, m.lambda_g, m.lambda_l, 0.0};
            },
            [](const IndependentBinomial& m) {
                return ContactMoments{m.n_g * m.q_g, m.n_l * m.q_l, m.n_g * m.q_g * (1.0 - m.q_g),
                                      m.n_l * m.q_l * (1.0 - m.q_l), 0.0};
            },
            [](const MixedPoisson& m) {
                const MixingView mix{m.mixing};
                const double ei = mix.mean();
                const double vi = mix.variance();
                // Law of total variance: E[var | I] + var(E | I).
                return ContactMoments{m.beta_g * ei, m.beta_l * ei, m.beta_g * ei + m.beta_g * m.beta_g * vi,
                                      m.beta_l * ei + m.beta_l * m.beta_l * vi, m.beta_g * m.beta_l * vi};
            },
            [](const JointTable& t) {
                double eg = 0, el = 0, egg = 0, ell = 0, egl = 0;
                for (const auto& a : t.atoms) {
                    eg += a.prob * a.g;
                    el += a.prob * a.l;
                    egg += a.prob * double(a.g) * a.g;
                    ell += a.prob * double(a.l) * a.l;
                    egl += a.prob * double(a.g) * a.l;
                }
                return ContactMoments{eg, el, egg - eg * eg, ell - el * el, egl - eg * el};
            },
        },
        kind_);
}

std::optional<std::uint64_t> ContactModel::max_local() const
{
    return std::visit(
        Overloaded{
            [](const Constant& m) -> std::optional<std::uint64_t> { return m.l; },
            [](const IndependentPoisson& m) -> std::optional<std::uint64_t> {
                if (m.lambda_l == 0.0) {
                    return 0;
                }
                return std::nullopt;
            },
            [](const IndependentBinomial& m) -> std::optional<std::uint64_t> {
                return m.q_l == 0.0 ? 0 : m.n_l;
            },
            [](const MixedPoisson& m) -> std::optional<std::uint64_t> {
                if (m.beta_l == 0.0) {
                    return 0;
                }
                return std::nullopt;
            },
            [](const JointTable& t) -> std::optional<std::uint64_t> {
                std::uint64_t hi = 0;
                for (const auto& a : t.atoms) {
                    if (a.prob > 0.0) {
                        hi = std::max<std::uint64_t>(hi, a.l);
                    }
                }
                return hi;
            },
        },
        kind_);
}

std::optional<std::vector<JointAtom>> ContactModel::finite_support() const
{
    using Result = std::optional<std::vector<JointAtom>>;
    return std::visit(
        Overloaded{
            [](const Constant& m) -> Result { return std::vector<JointAtom>{{m.g, m.l, 1.0}}; },
            [](const IndependentPoisson& m) -> Result {
                if (m.lambda_g == 0.0 && m.lambda_l == 0.0) {
                    return std::vector<JointAtom>{{0, 0, 1.0}};
                }
                return std::nullopt;
            },
            [](const IndependentBinomial& m) -> Result {
                std::vector<JointAtom> atoms;
                for (std::uint32_t g = 0; g <= m.n_g; ++g) {
                    for (std::uint32_t l = 0; l <= m.n_l; ++l) {
                        const double pr = binomial_pmf(m.n_g, g, m.q_g) * binomial_pmf(m.n_l, l, m.q_l);
                        if (pr > 0.0) {
                            atoms.push_back({g, l, pr});
                        }
                    }
                }
                return atoms;
            },
            [](const MixedPoisson& m) -> Result {
                if (m.beta_g == 0.0 && m.beta_l == 0.0) {
                    return std::vector<JointAtom>{{0, 0, 1.0}};
                }
                return std::nullopt;
            },
            [](const JointTable& t) -> Result { return t.atoms; },
        },
        kind_);
}

ContactDraw ContactModel::sample(Rng& rng) const
{
    return std::visit(
        Overloaded{
            [](const Constant& m) { return ContactDraw{m.g, m.l}; },
            [&](const IndependentPoisson& m) {
                const auto g = sample_poisson(m.lambda_g, rng);
                return ContactDraw{g, sample_poisson(m.lambda_l, rng)};
            },
            [&](const IndependentBinomial& m) {
                const auto g = sample_binomial(m.n_g, m.q_g, rng);
                return ContactDraw{g, sample_binomial(m.n_l, m.q_l, rng)};
            },
            [&](const MixedPoisson& m) {
                const double intensity = MixingView{m.mixing}.sample(rng);
                const auto g = sample_poisson(m.beta_g * intensity, rng);
                return ContactDraw{g, sample_poisson(m.beta_l * intensity, rng)};
            },
            [&](const JointTable& t) {
                const double u = rng.uniform();
                double acc = 0.0;
                for (const auto& a : t.atoms) {
                    acc += a.prob;
                    if (u < acc) {
                        return ContactDraw{a.g, a.l};
                    }
                }
                // u landed in the rounding gap above the cumulative sum.
                for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it) {
                    if (it->prob > 0.0) {
                        return ContactDraw{it->g, it->l};
                    }
                }
                return ContactDraw{t.atoms.back().g, t.atoms.back().l};
            },
        },
        kind_);
}

// ---------------------------------------------------------------------------

SwappedModel::SwappedModel(ContactModel base, double p) : base_(std::move(base)), p_(p)
{
    if (!is_prob(p)) {
        throw ConfigError("swap probability p must lie in [0,1]");
    }
}

double SwappedModel::joint_pgf(double s1, double s2) const
{
    return base_.joint_pgf(s1, p_ * s1 + (1.0 - p_) * s2);
}

double SwappedModel::weighted_local_pgf(double t) const
{
    const double w = p_ + (1.0 - p_) * t;
    return base_.weighted_local_pgf(w) + p_ * base_.local_pgf_derivative(w);
}

ContactMoments SwappedModel::moments() const
{
    const auto m = base_.moments();
    const double p = p_;
    const double q = 1.0 - p;
    ContactMoments out;
    out.mean_g = m.mean_g + p * m.mean_l;
    out.mean_l = q * m.mean_l;
    out.var_g = m.var_g + 2.0 * p * m.cov_gl + p * p * m.var_l + p * q * m.mean_l;
    out.var_l = q * q * m.var_l + p * q * m.mean_l;
    out.cov_gl = q * m.cov_gl + p * q * m.var_l - p * q * m.mean_l;
    return out;
}

std::optional<std::vector<JointAtom>> SwappedModel::finite_support() const
{
    auto atoms = base_.finite_support();
    if (!atoms || p_ == 0.0) {
        return atoms;
    }
    std::vector<JointAtom> out;
    for (const auto& a : *atoms) {
        for (std::uint32_t y = 0; y <= a.l; ++y) {
            const double pr = a.prob * binomial_pmf(a.l, y, p_);
            if (pr > 0.0) {
                out.push_back({a.g + y, a.l - y, pr});
            }
        }
    }
    return out;
}

ContactDraw SwappedModel::sample(Rng& rng) const
{
    auto draw = base_.sample(rng);
    if (p_ > 0.0) {
        std::uint64_t moved = 0;
        for (std::uint64_t i = 0; i < draw.local; ++i) {
            if (rng.uniform() < p_) {
                ++moved;
            }
        }
        draw.global += moved;
        draw.local -= moved;
    }
    return draw;
}

SwappedModel swap(const SwappedModel& model, double p)
{
    if (!is_prob(p)) {
        throw ConfigError("swap probability p must lie in [0,1]");
    }
    return SwappedModel(model.base(), 1.0 - (1.0 - model.p()) * (1.0 - p));
}

LogConvexityReport log_convexity_report(const ContactModel& model, std::size_t grid_size)
{
    if (grid_size < 3) {
        throw ConfigError("log-convexity grid needs at least 3 points");
    }
    constexpr double lo = 1e-6;
    const double step = (1.0 - lo) / static_cast<double>(grid_size - 1);
    std::vector<double> logs(grid_size);
    for (std::size_t k = 0; k < grid_size; ++k) {
        const double s = k + 1 == grid_size ? 1.0 : lo + step * static_cast<double>(k);
        logs[k] = std::log(model.local_pgf(s));
    }
    double min_diff = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < grid_size; ++k) {
        double d = logs[k - 1] - 2.0 * logs[k] + logs[k + 1];
        if (std::isnan(d)) {
            d = -std::numeric_limits<double>::infinity();
        }
        min_diff = std::min(min_diff, d);
    }
    return {min_diff >= -1e-9, min_diff};
}

}  // namespace hhepi
