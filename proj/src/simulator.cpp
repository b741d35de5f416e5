#include "hhepi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hhepi/parallel.hpp"

namespace hhepi {

void validate(const PopulationSpec& spec)
{
    if (spec.n < 1 || spec.h < 1) {
        throw ConfigError("population needs n >= 1 households of size h >= 1");
    }
    const std::uint64_t total = spec.population();
    if (total / spec.h != spec.n) {
        throw ConfigError("population size overflows");
    }
    if (spec.m < 1 || spec.m > total) {
        std::ostringstream msg;
        msg << "initial infectives m = " << spec.m << " must lie in [1, " << total << "]";
        throw ConfigError(msg.str());
    }
    if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
        throw ConfigError("swap probability p must lie in [0,1]");
    }
    if (spec.local_mode == SamplingMode::WithoutReplacement) {
        const auto hi = spec.model.max_local();
        if (!hi || *hi > spec.h - 1) {
            std::ostringstream msg;
            msg << "local contacts without replacement need X_L <= h-1 = " << spec.h - 1;
            throw ConfigError(msg.str());
        }
    }
}

EpidemicRunner::EpidemicRunner(PopulationSpec spec) : spec_(std::move(spec))
{
    validate(spec_);
    population_ = spec_.population();
    infected_.assign(population_, 0);
    household_hit_.assign(spec_.n, 0);
    queue_.reserve(population_);
    housemates_.reserve(spec_.h);
}

void EpidemicRunner::infect(std::uint64_t who)
{
    if (infected_[who]) {
        return;
    }
    infected_[who] = 1;
    queue_.push_back(who);
    const std::uint64_t house = who / spec_.h;
    if (!household_hit_[house]) {
        household_hit_[house] = 1;
        ++households_hit_;
    }
}

void EpidemicRunner::seed_initial(Rng& rng)
{
    if (2 * spec_.m <= population_) {
        while (queue_.size() < spec_.m) {
            infect(rng.below(population_));
        }
        return;
    }
    picks_.resize(population_);
    std::iota(picks_.begin(), picks_.end(), std::uint64_t{0});
    for (std::uint64_t k = 0; k < spec_.m; ++k) {
        const std::uint64_t j = k + rng.below(population_ - k);
        std::swap(picks_[k], picks_[j]);
        infect(picks_[k]);
    }
}

void EpidemicRunner::contact_housemates(std::uint64_t who, std::uint64_t count, Rng& rng)
{
    const std::uint64_t others = spec_.h - 1;
    const std::uint64_t offset = who % spec_.h;
    const std::uint64_t base = who - offset;
    if (spec_.local_mode == SamplingMode::WithReplacement) {
        for (std::uint64_t k = 0; k < count; ++k) {
            ++local_draws_;
            const std::uint64_t j = rng.below(others);
            infect(base + (j < offset ? j : j + 1));
        }
        return;
    }
    housemates_.clear();
    for (std::uint32_t j = 0; j < spec_.h; ++j) {
        if (j != offset) {
            housemates_.push_back(j);
        }
    }
    for (std::uint64_t k = 0; k < count; ++k) {
        ++local_draws_;
        const std::uint64_t j = k + rng.below(others - k);
        std::swap(housemates_[k], housemates_[j]);
        infect(base + housemates_[k]);
    }
}

void EpidemicRunner::contact_population(std::uint64_t who, std::uint64_t count, Rng& rng)
{
    if (spec_.global_mode == SamplingMode::WithReplacement) {
        for (std::uint64_t k = 0; k < count; ++k) {
            infect(rng.below(population_));
        }
        return;
    }
    // Distinct targets other than the infective itself.
    const std::uint64_t others = population_ - 1;
    const std::uint64_t wanted = std::min(count, others);
    if (wanted == 0) {
        return;
    }
    auto other = [who](std::uint64_t j) { return j < who ? j : j + 1; };
    if (2 * wanted <= others) {
        picks_.clear();
        while (picks_.size() < wanted) {
            const std::uint64_t j = rng.below(others);
            if (std::find(picks_.begin(), picks_.end(), j) == picks_.end()) {
                picks_.push_back(j);
            }
        }
        for (const auto j : picks_) {
            infect(other(j));
        }
        return;
    }
    picks_.resize(others);
    std::iota(picks_.begin(), picks_.end(), std::uint64_t{0});
    for (std::uint64_t k = 0; k < wanted; ++k) {
        const std::uint64_t j = k + rng.below(others - k);
        std::swap(picks_[k], picks_[j]);
        infect(other(picks_[k]));
    }
}

EpidemicOutcome EpidemicRunner::run(std::uint64_t run_index)
{
    Rng rng = Rng::substream(spec_.seed, run_index);
    std::fill(infected_.begin(), infected_.end(), std::uint8_t{0});
    std::fill(household_hit_.begin(), household_hit_.end(), std::uint8_t{0});
    queue_.clear();
    households_hit_ = 0;

    seed_initial(rng);

    const double p = spec_.p;
    std::uint64_t global_total = 0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
        const std::uint64_t who = queue_[head];
        const auto draw = spec_.model.sample(rng);
        std::uint64_t moved = 0;
        if (p > 0.0) {
            for (std::uint64_t k = 0; k < draw.local; ++k) {
                if (rng.uniform() < p) {
                    ++moved;
                }
            }
        }
        const std::uint64_t local = draw.local - moved;
        const std::uint64_t global = draw.global + moved;
        global_total += global;
        // With h = 1 there is no housemate to contact; local contacts are dropped.
        if (spec_.h > 1 && local > 0) {
            contact_housemates(who, local, rng);
        }
        contact_population(who, global, rng);
    }
    return {queue_.size(), households_hit_, global_total};
}

EpidemicOutcome run_epidemic(const PopulationSpec& spec, std::uint64_t run_index)
{
    return EpidemicRunner(spec).run(run_index);
}

std::vector<EpidemicOutcome> run_batch(const PopulationSpec& spec, std::uint64_t n_runs,
                                       unsigned threads, std::uint64_t first)
{
    if (n_runs < 1) {
        throw ConfigError("a batch needs at least one run");
    }
    validate(spec);
    constexpr std::uint64_t block = 256;
    std::vector<EpidemicOutcome> out(n_runs);
    const std::uint64_t blocks = (n_runs + block - 1) / block;
    parallel_for(blocks, threads, [&](std::size_t b) {
        EpidemicRunner runner(spec);
        const std::uint64_t lo = b * block;
        const std::uint64_t hi = std::min(n_runs, lo + block);
        for (std::uint64_t i = lo; i < hi; ++i) {
            out[i] = runner.run(first + i);
        }
    });
    return out;
}

}  // namespace hhepi
