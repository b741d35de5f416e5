#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hhepi/gontcharoff.hpp"

namespace hhepi::cli {

/// "4", "2..6" or "2,3,5".
std::vector<std::size_t> parse_h_values(const std::string& text);

/// "0.3", "0:0.05:1" (start:step:stop, stop included when hit) or "0,0.5,1".
std::vector<double> parse_p_values(const std::string& text);

/// "with" / "without" (also "with-replacement" / "without-replacement").
SamplingMode parse_mode(const std::string& text);

}  // namespace hhepi::cli
