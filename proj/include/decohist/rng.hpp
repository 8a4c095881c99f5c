#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace decohist {

std::uint64_t splitmix64(std::uint64_t x);

// Subsystem seed derived from a master seed and a label, so new labels never
// shift existing streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal(double sigma = 1.0) {
        std::normal_distribution<double> dist(0.0, sigma);
        return dist(engine_);
    }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    // Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }
    std::uint64_t bits() { return engine_(); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace decohist
