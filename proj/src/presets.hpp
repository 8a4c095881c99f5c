#pragma once

#include <string>
#include <vector>

#include "decohist/runner.hpp"

namespace decohist::detail {

struct RunContext {
    Json params;
    std::uint64_t seed = 1;
    int threads = 1;
};

using PresetFn = ResultTable (*)(const RunContext&);

struct PresetEntry {
    PresetInfo info;
    PresetFn fn;
};

const std::vector<PresetEntry>& preset_registry();

}  // namespace decohist::detail
