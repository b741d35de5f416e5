#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "hhepi/asymptotics.hpp"
#include "hhepi/contact_model.hpp"
#include "hhepi/simulator.hpp"
#include "hhepi/stats.hpp"

namespace hhepi {

/// A contact law together with the optional top-level "swap_p".
struct ModelSpec
{
    ContactModel model = ContactModel(Constant{});
    double swap_p = 0.0;

    SwappedModel swapped() const { return SwappedModel(model, swap_p); }
};

/// Reads {"type": "poisson" | "binomial" | "constant" | "mixed_poisson" |
/// "joint_table", ...}. Unknown types or keys raise ConfigError.
ModelSpec parse_model(const nlohmann::json& j);
ModelSpec parse_model_text(const std::string& text);
nlohmann::json model_to_json(const ModelSpec& spec);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

nlohmann::json to_json(const AsymptoticSummary& s);
nlohmann::json to_json(const MonotonicityReport& r);
nlohmann::json to_json(const BatchSummary& s);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_runs_csv(std::ostream& out, std::span<const EpidemicOutcome> outcomes,
                    std::uint64_t first_run = 0);

}  // namespace hhepi
