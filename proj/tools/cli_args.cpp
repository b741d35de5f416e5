#include "cli_args.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "hhepi/contact_model.hpp"

namespace hhepi::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) {
        parts.push_back(item);
    }
    if (!text.empty() && text.back() == sep) {
        parts.emplace_back();
    }
    return parts;
}

std::size_t to_size(const std::string& s)
{
    std::size_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("not a household size: '" + s + "'");
    }
    return v;
}

double to_double(const std::string& s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ConfigError("not a number: '" + s + "'");
    }
    return v;
}

double to_prob(const std::string& s)
{
    const double v = to_double(s);
    if (v < 0.0 || v > 1.0) {
        throw ConfigError("swap probability outside [0,1]: " + s);
    }
    return v;
}

}  // namespace

std::vector<std::size_t> parse_h_values(const std::string& text)
{
    std::vector<std::size_t> out;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const auto lo = to_size(text.substr(0, dots));
        const auto hi = to_size(text.substr(dots + 2));
        if (lo > hi) {
            throw ConfigError("empty household-size range: " + text);
        }
        for (auto h = lo; h <= hi; ++h) {
            out.push_back(h);
        }
    } else {
        for (const auto& part : split(text, ',')) {
            out.push_back(to_size(part));
        }
    }
    if (out.empty()) {
        throw ConfigError("no household sizes given");
    }
    for (const auto h : out) {
        if (h < 1 || h > max_household_size) {
            throw ConfigError("household size " + std::to_string(h) + " outside [1, 50]");
        }
    }
    return out;
}

std::vector<double> parse_p_values(const std::string& text)
{
    std::vector<double> out;
    const auto fields = split(text, ':');
    if (fields.size() == 3) {
        const double start = to_prob(fields[0]);
        const double step = to_double(fields[1]);
        const double stop = to_prob(fields[2]);
        if (!(step > 0.0) || start > stop) {
            throw ConfigError("p grid needs start <= stop and step > 0: " + text);
        }
        const auto steps = static_cast<long>(std::floor((stop - start) / step + 1e-9));
        if (steps > 100000) {
            throw ConfigError("p grid has too many points: " + text);
        }
        for (long k = 0; k <= steps; ++k) {
            // Snap to 12 decimals so 0:0.05:1 yields 0.15, not 0.15000000000000002.
            const double v = std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12;
            out.push_back(std::min(stop, v));
        }
    } else if (fields.size() == 1) {
        for (const auto& part : split(text, ',')) {
            out.push_back(to_prob(part));
        }
    } else {
        throw ConfigError("p must be a value, a list or start:step:stop, got " + text);
    }
    if (out.empty()) {
        throw ConfigError("no swap probabilities given");
    }
    return out;
}

SamplingMode parse_mode(const std::string& text)
{
    if (text == "with" || text == "with-replacement") {
        return SamplingMode::WithReplacement;
    }
    if (text == "without" || text == "without-replacement") {
        return SamplingMode::WithoutReplacement;
    }
    throw ConfigError("sampling mode must be 'with' or 'without', got " + text);
}

}  // namespace hhepi::cli
