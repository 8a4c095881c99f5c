#pragma once

#include <cstdint>

namespace decohist {

struct PackingBound {
    long dim = 0;
    double epsilon = 0.0;
    double geometric_exact = 1.0;
    double geometric_approx = 1.0;
    double probabilistic = 1.0;
};

PackingBound lower_bounds(long dim, double epsilon);

struct PackingResult {
    long achieved = 0;
    double max_overlap = 0.0;  // re-verified over all kept pairs
};

PackingResult greedy_pack(long dim, double epsilon, long budget, std::uint64_t seed);

}  // namespace decohist
