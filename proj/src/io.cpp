#include "hhepi/io.hpp"

#include <charconv>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <set>

namespace hhepi {

namespace {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
    if (!j.is_object()) {
        throw ConfigError(what + " must be a JSON object");
    }
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!keys.count(key)) {
            throw ConfigError("unknown key '" + key + "' in " + what);
        }
    }
}

double number(const json& j, const char* key, const std::string& what)
{
    if (!j.contains(key)) {
        throw ConfigError(what + " needs '" + key + "'");
    }
    const auto& v = j.at(key);
    if (!v.is_number()) {
        throw ConfigError(what + ": '" + key + "' must be a number");
    }
    return v.get<double>();
}

std::uint32_t count(const json& j, const char* key, const std::string& what)
{
    const double v = number(j, key, what);
    if (!(v >= 0.0) || v != std::floor(v) || v > 4294967295.0) {
        throw ConfigError(what + ": '" + key + "' must be a nonnegative integer");
    }
    return static_cast<std::uint32_t>(v);
}

MixingLaw parse_mixing(const json& j)
{
    if (!j.is_object() || j.size() != 1) {
        throw ConfigError("mixing must be one of {\"gamma\":{...}}, {\"exponential\":{...}}, {\"point\":{...}}");
    }
    const auto it = j.begin();
    const std::string name = it.key();
    const json& body = it.value();
    if (name == "gamma") {
        require_keys(body, {"shape", "rate"}, "gamma mixing");
        return GammaMixing{number(body, "shape", "gamma mixing"), number(body, "rate", "gamma mixing")};
    }
    if (name == "exponential") {
        require_keys(body, {"rate"}, "exponential mixing");
        return ExponentialMixing{number(body, "rate", "exponential mixing")};
    }
    if (name == "point") {
        require_keys(body, {"value"}, "point mixing");
        return PointMassMixing{number(body, "value", "point mixing")};
    }
    throw ConfigError("unknown mixing law '" + name + "'");
}

json mixing_to_json(const MixingLaw& law)
{
    return std::visit(
        [](const auto& m) -> json {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, GammaMixing>) {
                return {{"gamma", {{"shape", m.shape}, {"rate", m.rate}}}};
            } else if constexpr (std::is_same_v<T, ExponentialMixing>) {
                return {{"exponential", {{"rate", m.rate}}}};
            } else {
                return {{"point", {{"value", m.value}}}};
            }
        },
        law);
}

json optional_number(const std::optional<double>& x)
{
    return x ? json(*x) : json(nullptr);
}

json optional_interval(const std::optional<Interval>& x)
{
    return x ? json::array({x->first, x->second}) : json(nullptr);
}

}  // namespace

ModelSpec parse_model(const json& j)
{
    if (!j.is_object()) {
        throw ConfigError("model spec must be a JSON object");
    }
    if (!j.contains("type") || !j.at("type").is_string()) {
        throw ConfigError("model spec needs a string 'type'");
    }
    const auto type = j.at("type").get<std::string>();
    ModelSpec out;
    if (j.contains("swap_p")) {
        out.swap_p = number(j, "swap_p", "model");
        if (!(out.swap_p >= 0.0 && out.swap_p <= 1.0)) {
            throw ConfigError("swap_p must lie in [0,1]");
        }
    }
    if (type == "poisson") {
        require_keys(j, {"type", "swap_p", "lambda_g", "lambda_l"}, "poisson model");
        out.model = ContactModel(
            IndependentPoisson{number(j, "lambda_g", "poisson"), number(j, "lambda_l", "poisson")});
    } else if (type == "binomial") {
        require_keys(j, {"type", "swap_p", "n_g", "q_g", "n_l", "q_l"}, "binomial model");
        out.model = ContactModel(IndependentBinomial{count(j, "n_g", "binomial"), number(j, "q_g", "binomial"),
                                                     count(j, "n_l", "binomial"), number(j, "q_l", "binomial")});
    } else if (type == "constant") {
        require_keys(j, {"type", "swap_p", "g", "l"}, "constant model");
        out.model = ContactModel(Constant{count(j, "g", "constant"), count(j, "l", "constant")});
    } else if (type == "mixed_poisson") {
        require_keys(j, {"type", "swap_p", "beta_g", "beta_l", "mixing"}, "mixed_poisson model");
        if (!j.contains("mixing")) {
            throw ConfigError("mixed_poisson needs 'mixing'");
        }
        out.model = ContactModel(MixedPoisson{number(j, "beta_g", "mixed_poisson"),
                                              number(j, "beta_l", "mixed_poisson"),
                                              parse_mixing(j.at("mixing"))});
    } else if (type == "joint_table") {
        require_keys(j, {"type", "swap_p", "pmf"}, "joint_table model");
        if (!j.contains("pmf") || !j.at("pmf").is_array()) {
            throw ConfigError("joint_table needs a 'pmf' array of [g, l, prob]");
        }
        JointTable table;
        for (const auto& row : j.at("pmf")) {
            if (!row.is_array() || row.size() != 3 || !row[0].is_number_integer() ||
                !row[1].is_number_integer() || !row[2].is_number() || row[0].get<long long>() < 0 ||
                row[1].get<long long>() < 0) {
                throw ConfigError("joint_table rows must be [g, l, prob] with integer g, l >= 0");
            }
            table.atoms.push_back({row[0].get<std::uint32_t>(), row[1].get<std::uint32_t>(),
                                   row[2].get<double>()});
        }
        out.model = ContactModel(std::move(table));
    } else {
        throw ConfigError("unknown model type '" + type + "'");
    }
    return out;
}

ModelSpec parse_model_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("model JSON does not parse: ") + e.what());
    }
    return parse_model(j);
}

json model_to_json(const ModelSpec& spec)
{
    json j = std::visit(
        [](const auto& k) -> json {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, Constant>) {
                return {{"type", "constant"}, {"g", k.g}, {"l", k.l}};
            } else if constexpr (std::is_same_v<T, IndependentPoisson>) {
                return {{"type", "poisson"}, {"lambda_g", k.lambda_g}, {"lambda_l", k.lambda_l}};
            } else if constexpr (std::is_same_v<T, IndependentBinomial>) {
                return {{"type", "binomial"}, {"n_g", k.n_g}, {"q_g", k.q_g}, {"n_l", k.n_l}, {"q_l", k.q_l}};
            } else if constexpr (std::is_same_v<T, MixedPoisson>) {
                return {{"type", "mixed_poisson"},
                        {"beta_g", k.beta_g},
                        {"beta_l", k.beta_l},
                        {"mixing", mixing_to_json(k.mixing)}};
            } else {
                json pmf = json::array();
                for (const auto& a : k.atoms) {
                    pmf.push_back({a.g, a.l, a.prob});
                }
                return {{"type", "joint_table"}, {"pmf", pmf}};
            }
        },
        spec.model.kind());
    if (spec.swap_p != 0.0) {
        j["swap_p"] = spec.swap_p;
    }
    return j;
}

std::string format_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

json to_json(const AsymptoticSummary& s)
{
    json j = {{"h", s.h},         {"p", s.p},       {"m", s.m},     {"r_star", s.r_star},
              {"rho", s.rho},     {"pi", s.pi},     {"z", s.z},     {"tau", s.tau},
              {"converged", s.converged}, {"unstable", s.unstable}};
    j["sigma2"] = optional_number(s.sigma2);
    j["sigma"] = s.sigma2 ? json(std::sqrt(*s.sigma2)) : json(nullptr);
    return j;
}

json to_json(const MonotonicityReport& r)
{
    auto flags = [](const MonotoneFlags& f) { return json{{"in_h", f.in_h}, {"in_p", f.in_p}}; };
    return {{"pi", flags(r.pi)},
            {"z", flags(r.z)},
            {"sigma", flags(r.sigma)},
            {"h_max", r.h_max},
            {"z_hom_gap", r.z_hom_gap}};
}

json to_json(const BatchSummary& s)
{
    json j = {{"n_total", s.n_total},
              {"n_major", s.n_major},
              {"pi_hat", s.pi_hat},
              {"pi_ci", {s.pi_ci.first, s.pi_ci.second}}};
    j["z_hat"] = optional_number(s.z_hat);
    j["z_ci"] = optional_interval(s.z_ci);
    j["sigma_hat"] = optional_number(s.sigma_hat);
    j["sigma_ci"] = optional_interval(s.sigma_ci);
    j["ks_D"] = optional_number(s.ks_d);
    if (s.no_major_outbreaks()) {
        j["status"] = "no-major-outbreaks";
    }
    return j;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows)
{
    out << "h,p,r_star,rho,pi,z,tau,sigma\n";
    for (const auto& r : rows) {
        out << r.h << ',' << format_double(r.p) << ',' << format_double(r.r_star) << ','
            << format_double(r.rho) << ',' << format_double(r.pi) << ',' << format_double(r.z) << ','
            << format_double(r.tau) << ',' << (r.sigma ? format_double(*r.sigma) : "") << '\n';
    }
}

void write_runs_csv(std::ostream& out, std::span<const EpidemicOutcome> outcomes, std::uint64_t first_run)
{
    out << "run,Z,V,global_contacts\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& o = outcomes[i];
        out << first_run + i << ',' << o.final_size << ',' << o.infected_households << ','
            << o.global_contacts << '\n';
    }
}

}  // namespace hhepi
