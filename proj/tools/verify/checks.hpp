#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace hhepi::verify {

/// How `got` is compared with `expected`.
enum class Relation
{
    AbsWithin,  // |got - expected| <= tolerance
    RelWithin,  // |got - expected| <= tolerance * |expected|
    Below,      // got < expected
    Above,      // got > expected
};

struct CheckResult
{
    std::string group;
    std::string name;
    Relation relation = Relation::AbsWithin;
    double expected = 0.0;
    double got = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string note;
};

struct VerifyOptions
{
    /// Groups to run; empty means every default group.
    std::set<std::string> only;
    /// Adds the large-population simulation group.
    bool full = false;
    /// Multiplies every numeric tolerance (not the runtime budgets).
    double tolerance_scale = 1.0;
    /// Worker threads for sweeps and the KS batches; the simulation
    /// runtime check always runs single-threaded.
    unsigned threads = 1;
    std::uint64_t seed = 20240611;
};

struct GroupInfo
{
    std::string name;
    std::string title;
};

/// Every acceptance group in run order, the --full group last.
const std::vector<GroupInfo>& groups();

/// Throws std::invalid_argument for unknown group names.
std::vector<CheckResult> run_checks(const VerifyOptions& options);

bool all_pass(const std::vector<CheckResult>& results);
nlohmann::json report_json(const std::vector<CheckResult>& results);

}  // namespace hhepi::verify
