// hhe: household epidemic asymptotics, sweeps, simulation and self-checks.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric instability,
// 4 failed verification.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cli_args.hpp"
#include "hhepi/asymptotics.hpp"
#include "hhepi/io.hpp"
#include "hhepi/parallel.hpp"
#include "hhepi/simulator.hpp"
#include "hhepi/stats.hpp"
#include "verify/checks.hpp"

namespace {

using namespace hhepi;
using nlohmann::json;

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_verify = 4;

// Model selection: a kind name plus per-kind flags, a JSON literal, or a file.
struct ModelOptions
{
    std::string model;
    std::string model_file;
    std::optional<double> swap_p;
    std::optional<double> lambda_g, lambda_l;
    std::optional<double> g, l;
    std::optional<double> n_g, q_g, n_l, q_l;
    std::optional<double> beta_g, beta_l;
    std::string mixing;
    std::optional<double> shape, rate, value;

    void add_to(CLI::App& app)
    {
        app.add_option("--model", model,
                       "poisson | binomial | constant | mixed_poisson | joint_table, or a JSON model spec");
        app.add_option("--model-file", model_file, "JSON file holding the model spec");
        app.add_option("--swap-p", swap_p, "swap probability stored with the model; composes with --p")
            ->check(CLI::Range(0.0, 1.0));
        app.add_option("--lambda-g", lambda_g, "poisson: mean global contacts");
        app.add_option("--lambda-l", lambda_l, "poisson: mean local contacts");
        app.add_option("--g", g, "constant: global contacts");
        app.add_option("--l", l, "constant: local contacts");
        app.add_option("--n-g", n_g, "binomial: global trials");
        app.add_option("--q-g", q_g, "binomial: global success probability");
        app.add_option("--n-l", n_l, "binomial: local trials");
        app.add_option("--q-l", q_l, "binomial: local success probability");
        app.add_option("--beta-g", beta_g, "mixed_poisson: global rate");
        app.add_option("--beta-l", beta_l, "mixed_poisson: local rate");
        app.add_option("--mixing", mixing, "mixed_poisson: gamma | exponential | point");
        app.add_option("--shape", shape, "gamma mixing shape");
        app.add_option("--rate", rate, "gamma or exponential mixing rate");
        app.add_option("--value", value, "point-mass mixing value");
    }

    ModelSpec build() const
    {
        json spec;
        if (!model_file.empty()) {
            if (!model.empty()) {
                throw ConfigError("give --model or --model-file, not both");
            }
            std::ifstream in(model_file);
            if (!in) {
                throw ConfigError("cannot read model file " + model_file);
            }
            std::stringstream buf;
            buf << in.rdbuf();
            reject_kind_flags("a model file");
            return with_swap(parse_model_text(buf.str()));
        }
        if (model.empty()) {
            throw ConfigError("a model is required (--model or --model-file)");
        }
        if (model.front() == '{') {
            reject_kind_flags("a JSON model");
            return with_swap(parse_model_text(model));
        }
        spec["type"] = model;
        if (model == "poisson") {
            only({"lambda-g", "lambda-l"});
            spec["lambda_g"] = lambda_g.value_or(1.0);
            spec["lambda_l"] = lambda_l.value_or(1.0);
        } else if (model == "constant") {
            only({"g", "l"});
            spec["g"] = g.value_or(1.0);
            spec["l"] = l.value_or(1.0);
        } else if (model == "binomial") {
            only({"n-g", "q-g", "n-l", "q-l"});
            spec["n_g"] = n_g.value_or(2.0);
            spec["q_g"] = q_g.value_or(0.5);
            spec["n_l"] = n_l.value_or(2.0);
            spec["q_l"] = q_l.value_or(0.5);
        } else if (model == "mixed_poisson") {
            only({"beta-g", "beta-l", "mixing", "shape", "rate", "value"});
            spec["beta_g"] = beta_g.value_or(1.0);
            spec["beta_l"] = beta_l.value_or(1.0);
            const std::string law = mixing.empty() ? "gamma" : mixing;
            if (law == "gamma") {
                if (value) {
                    throw ConfigError("--value applies to point mixing only");
                }
                spec["mixing"] = {{"gamma", {{"shape", shape.value_or(1.0)}, {"rate", rate.value_or(1.0)}}}};
            } else if (law == "exponential") {
                if (shape || value) {
                    throw ConfigError("exponential mixing takes --rate only");
                }
                spec["mixing"] = {{"exponential", {{"rate", rate.value_or(1.0)}}}};
            } else if (law == "point") {
                if (shape || rate) {
                    throw ConfigError("point mixing takes --value only");
                }
                spec["mixing"] = {{"point", {{"value", value.value_or(1.0)}}}};
            } else {
                throw ConfigError("unknown mixing law '" + law + "'");
            }
        } else if (model == "joint_table") {
            throw ConfigError("joint_table needs a JSON spec via --model '{...}' or --model-file");
        } else {
            throw ConfigError("unknown model '" + model + "'");
        }
        return with_swap(parse_model(spec));
    }

  private:
    struct Flag
    {
        const char* name;
        bool set;
    };

    std::vector<Flag> kind_flags() const
    {
        return {{"lambda-g", lambda_g.has_value()}, {"lambda-l", lambda_l.has_value()},
                {"g", g.has_value()},               {"l", l.has_value()},
                {"n-g", n_g.has_value()},           {"q-g", q_g.has_value()},
                {"n-l", n_l.has_value()},           {"q-l", q_l.has_value()},
                {"beta-g", beta_g.has_value()},     {"beta-l", beta_l.has_value()},
                {"mixing", !mixing.empty()},        {"shape", shape.has_value()},
                {"rate", rate.has_value()},         {"value", value.has_value()}};
    }

    void only(std::initializer_list<std::string> allowed) const
    {
        for (const auto& f : kind_flags()) {
            if (f.set && std::find(allowed.begin(), allowed.end(), f.name) == allowed.end()) {
                throw ConfigError(std::string("--") + f.name + " does not apply to model " + model);
            }
        }
    }

    void reject_kind_flags(const std::string& source) const
    {
        for (const auto& f : kind_flags()) {
            if (f.set) {
                throw ConfigError(std::string("--") + f.name + " cannot be combined with " + source);
            }
        }
    }

    ModelSpec with_swap(ModelSpec spec) const
    {
        if (swap_p) {
            spec.swap_p = *swap_p;
        }
        return spec;
    }
};

struct CommonOptions
{
    std::string local_mode = "with";
    std::string out;
    unsigned threads = 0;
};

// Writes to the --out file when given, else to stdout.
class Sink
{
  public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) {
                throw ConfigError("cannot open output file " + path);
            }
        }
    }

    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

int cmd_asymptotics(const ModelOptions& mo, const std::string& h_text, const std::string& p_text,
                    std::size_t m, const CommonOptions& co)
{
    const auto spec = mo.build();
    const auto hs = cli::parse_h_values(h_text);
    const auto ps = cli::parse_p_values(p_text);
    if (hs.size() != 1 || ps.size() != 1) {
        throw ConfigError("asymptotics takes one h and one p; use sweep for grids");
    }
    if (m < 1) {
        throw ConfigError("--m must be at least 1");
    }
    const HouseholdSpec household{hs.front(), ps.front(), cli::parse_mode(co.local_mode)};
    const auto summary = summarize(spec.swapped(), household, m);
    json j = to_json(summary);
    j["model"] = model_to_json(spec);
    j["local_mode"] = co.local_mode;
    Sink sink(co.out);
    sink.stream() << j.dump(2) << '\n';
    return summary.unstable || !summary.converged ? exit_numeric : exit_ok;
}

int cmd_sweep(const ModelOptions& mo, const std::string& h_text, const std::string& p_text,
              std::size_t m, const CommonOptions& co)
{
    const auto spec = mo.build();
    const auto hs = cli::parse_h_values(h_text);
    const auto ps = cli::parse_p_values(p_text);
    if (m < 1) {
        throw ConfigError("--m must be at least 1");
    }
    const auto result =
        sweep(spec.swapped(), hs, ps, m, cli::parse_mode(co.local_mode), resolve_threads(co.threads));
    Sink sink(co.out);
    write_sweep_csv(sink.stream(), result.rows);
    json report = to_json(result.report);
    bool unstable = false;
    for (const auto& r : result.rows) {
        unstable = unstable || r.unstable;
    }
    report["unstable"] = unstable;
    (co.out.empty() ? std::cerr : std::cout) << report.dump(2) << '\n';
    return unstable ? exit_numeric : exit_ok;
}

struct SimulateOptions
{
    std::uint64_t households = 1000;
    std::string h = "2";
    std::string p = "0";
    std::uint64_t m = 1;
    std::uint64_t runs = 10000;
    std::uint64_t seed = 1;
    std::string cutoff = "frac:0.2";
    std::string global_mode = "with";
    std::uint64_t until_majors = 0;
    bool ks = false;
};

int cmd_simulate(const ModelOptions& mo, const SimulateOptions& so, const CommonOptions& co)
{
    const auto model = mo.build();
    const auto hs = cli::parse_h_values(so.h);
    const auto ps = cli::parse_p_values(so.p);
    if (hs.size() != 1 || ps.size() != 1) {
        throw ConfigError("simulate takes one h and one p");
    }
    PopulationSpec spec;
    spec.n = so.households;
    spec.h = static_cast<std::uint32_t>(hs.front());
    spec.m = so.m;
    // The model's own swap and --p compose like two successive swaps.
    spec.p = 1.0 - (1.0 - model.swap_p) * (1.0 - ps.front());
    spec.model = model.model;
    spec.local_mode = cli::parse_mode(co.local_mode);
    spec.global_mode = cli::parse_mode(so.global_mode);
    spec.seed = so.seed;
    validate(spec);
    const auto cutoff = MajorCutoff::parse(so.cutoff);
    if (so.runs < 1) {
        throw ConfigError("--runs must be at least 1");
    }
    const unsigned threads = resolve_threads(co.threads);

    const auto outcomes = so.until_majors > 0
                              ? simulate_until_majors(spec, cutoff, so.until_majors, so.runs, threads)
                              : run_batch(spec, so.runs, threads);
    auto summary = classify_and_estimate(outcomes, spec.n, spec.population(), cutoff);

    bool unstable = false;
    if (so.ks && summary.n_major > 0) {
        const HouseholdSpec household{spec.h, ps.front(), spec.local_mode};
        const auto asym = summarize(model.swapped(), household, spec.m);
        unstable = asym.unstable;
        if (!asym.sigma2) {
            throw ConfigError("KS needs R_* > 1 for the normal limit");
        }
        summary.ks_d = ks_statistic(major_fractions(outcomes, spec.n, spec.population(), cutoff), asym.z,
                                    *asym.sigma2, spec.population());
    }

    if (!co.out.empty()) {
        Sink sink(co.out);
        write_runs_csv(sink.stream(), outcomes);
    }
    json j = to_json(summary);
    j["config"] = {{"model", model_to_json(model)},
                   {"n", spec.n},
                   {"h", spec.h},
                   {"m", spec.m},
                   {"p", ps.front()},
                   {"seed", spec.seed},
                   {"cutoff", cutoff.to_string()},
                   {"local_mode", co.local_mode},
                   {"global_mode", so.global_mode}};
    std::cout << j.dump(2) << '\n';
    return unstable ? exit_numeric : exit_ok;
}

int cmd_verify(const std::vector<std::string>& only, bool full, double scale, unsigned threads,
               const std::string& out)
{
    verify::VerifyOptions opt;
    for (const auto& item : only) {
        std::stringstream in(item);
        std::string name;
        while (std::getline(in, name, ',')) {
            if (!name.empty()) {
                opt.only.insert(name);
            }
        }
    }
    opt.full = full;
    opt.tolerance_scale = scale;
    opt.threads = resolve_threads(threads);
    std::vector<verify::CheckResult> results;
    try {
        results = verify::run_checks(opt);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    for (const auto& r : results) {
        std::cerr << (r.pass ? "PASS " : "FAIL ") << r.group << ": " << r.name << "  got " << r.got
                  << "  expected " << r.expected;
        if (r.tolerance > 0.0) {
            std::cerr << " +/- " << r.tolerance;
        }
        if (!r.note.empty()) {
            std::cerr << "  (" << r.note << ")";
        }
        std::cerr << '\n';
    }
    Sink sink(out);
    sink.stream() << verify::report_json(results).dump(2) << '\n';
    return verify::all_pass(results) ? exit_ok : exit_verify;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Household epidemic asymptotics and simulation"};
    app.require_subcommand(1);
    // --h is the household size, so help is --help only.
    app.set_help_flag("--help", "print this help and exit");

    ModelOptions model_opts;
    CommonOptions common;
    std::string h_text = "2";
    std::string p_text = "0";
    std::size_t m = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--local-mode", common.local_mode, "local targets: with | without replacement")
            ->capture_default_str();
        sub->add_option("--threads", common.threads, "worker threads (0: $HHE_THREADS or all cores)");
        sub->add_option("--out", common.out, "output file");
    };

    auto* asym = app.add_subcommand("asymptotics", "pi, z, sigma and R_* for one (h, p)");
    asym->set_help_flag("--help", "print this help and exit");
    model_opts.add_to(*asym);
    asym->add_option("--h", h_text, "household size")->capture_default_str();
    asym->add_option("--p", p_text, "swap probability")->capture_default_str();
    asym->add_option("--m", m, "initial infectives")->capture_default_str();
    add_common(asym);

    auto* sw = app.add_subcommand("sweep", "CSV grid over household sizes and swap probabilities");
    sw->set_help_flag("--help", "print this help and exit");
    model_opts.add_to(*sw);
    sw->add_option("--h", h_text, "sizes: 4, 2..6 or 2,3,5")->capture_default_str();
    sw->add_option("--p", p_text, "probabilities: 0.3, 0:0.05:1 or 0,0.5,1")->capture_default_str();
    sw->add_option("--m", m, "initial infectives")->capture_default_str();
    add_common(sw);

    SimulateOptions sim_opts;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo final sizes with summary statistics");
    sim->set_help_flag("--help", "print this help and exit");
    model_opts.add_to(*sim);
    sim->add_option("--households", sim_opts.households, "number of households n")->capture_default_str();
    sim->add_option("--h", sim_opts.h, "household size")->capture_default_str();
    sim->add_option("--p", sim_opts.p, "swap probability")->capture_default_str();
    sim->add_option("--m", sim_opts.m, "initial infectives")->capture_default_str();
    sim->add_option("--runs", sim_opts.runs, "runs (cap on runs with --until-majors)")->capture_default_str();
    sim->add_option("--seed", sim_opts.seed, "64-bit seed")->capture_default_str();
    sim->add_option("--cutoff", sim_opts.cutoff, "frac:<z> or households:log")->capture_default_str();
    sim->add_option("--global-mode", sim_opts.global_mode, "global targets: with | without replacement")
        ->capture_default_str();
    sim->add_option("--until-majors", sim_opts.until_majors, "keep simulating until this many major runs");
    sim->add_flag("--ks", sim_opts.ks, "KS distance of major fractions to the normal limit");
    add_common(sim);

    std::vector<std::string> only;
    bool full = false;
    double scale = 1.0;
    unsigned verify_threads = 0;
    std::string verify_out;
    auto* ver = app.add_subcommand("verify", "run the acceptance checks");
    ver->set_help_flag("--help", "print this help and exit");
    std::string group_help = "check groups to run (comma separated):";
    for (const auto& g : verify::groups()) {
        group_help += " " + g.name;
    }
    ver->add_option("--only", only, group_help);
    ver->add_flag("--full", full, "include the large-population simulation");
    ver->add_option("--tolerance-scale", scale, "multiply every numeric tolerance")->capture_default_str();
    ver->add_option("--threads", verify_threads, "worker threads (0: $HHE_THREADS or all cores)");
    ver->add_option("--out", verify_out, "write the JSON report here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (*asym) {
            return cmd_asymptotics(model_opts, h_text, p_text, m, common);
        }
        if (*sw) {
            return cmd_sweep(model_opts, h_text, p_text, m, common);
        }
        if (*sim) {
            return cmd_simulate(model_opts, sim_opts, common);
        }
        return cmd_verify(only, full, scale, verify_threads, verify_out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
}
