#pragma once

#include <cstdint>
#include <vector>

#include "hhepi/contact_model.hpp"
#include "hhepi/gontcharoff.hpp"
#include "hhepi/rng.hpp"

namespace hhepi {

/// A finite population of n households of size h, the contact law, the
/// swap probability and the seed that fixes every run.
struct PopulationSpec
{
    std::uint64_t n = 1;
    std::uint32_t h = 1;
    std::uint64_t m = 1;
    double p = 0.0;
    ContactModel model = ContactModel(Constant{});
    SamplingMode local_mode = SamplingMode::WithReplacement;
    /// Global contacts with replacement may hit anyone, the infective included.
    SamplingMode global_mode = SamplingMode::WithReplacement;
    std::uint64_t seed = 0;

    std::uint64_t population() const { return n * h; }
};

/// Throws ConfigError when the spec cannot be simulated.
void validate(const PopulationSpec& spec);

struct EpidemicOutcome
{
    std::uint64_t final_size = 0;           // Z
    std::uint64_t infected_households = 0;  // V
    std::uint64_t global_contacts = 0;

    bool operator==(const EpidemicOutcome&) const = default;
};

/// Runs single epidemics with reusable scratch space. Each run draws from its
/// own substream of (seed, run_index), so runs can be replayed in any order.
class EpidemicRunner
{
  public:
    explicit EpidemicRunner(PopulationSpec spec);

    EpidemicOutcome run(std::uint64_t run_index);

    const PopulationSpec& spec() const { return spec_; }
    /// Number of local target draws made so far (zero whenever h = 1).
    std::uint64_t local_draws() const { return local_draws_; }

  private:
    void seed_initial(Rng& rng);
    void infect(std::uint64_t who);
    void contact_housemates(std::uint64_t who, std::uint64_t count, Rng& rng);
    void contact_population(std::uint64_t who, std::uint64_t count, Rng& rng);

    PopulationSpec spec_;
    std::uint64_t population_;
    std::vector<std::uint8_t> infected_;
    std::vector<std::uint8_t> household_hit_;
    std::vector<std::uint64_t> queue_;
    std::vector<std::uint64_t> picks_;
    std::vector<std::uint32_t> housemates_;
    std::uint64_t households_hit_ = 0;
    std::uint64_t local_draws_ = 0;
};

EpidemicOutcome run_epidemic(const PopulationSpec& spec, std::uint64_t run_index);

/// Runs [first, first + n_runs); outcome i of the result is run first + i.
/// Identical for any thread count.
std::vector<EpidemicOutcome> run_batch(const PopulationSpec& spec, std::uint64_t n_runs,
                                       unsigned threads = 1, std::uint64_t first = 0);

}  // namespace hhepi
