#pragma once

#include <string>
#include <vector>

#include "noonsim/config.hpp"

namespace noonsim {

struct Check {
    std::string name;
    bool ok = false;
    std::string detail;
};

// Fast self-consistency checks for one configuration: truncation adequacy,
// step-3 resonance, reduced-model exactness, operator algebra and pulse robustness.
std::vector<Check> validation_suite(const Config& cfg);

}  // namespace noonsim
