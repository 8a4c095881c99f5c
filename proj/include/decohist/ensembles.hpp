#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "decohist/rng.hpp"
#include "decohist/types.hpp"

namespace decohist {

class StateVector {
public:
    StateVector() = default;
    StateVector(CVector coefficients, bool normalized);

    const CVector& coefficients() const { return c_; }
    bool normalized() const { return normalized_; }
    Eigen::Index dim() const { return c_.size(); }
    double squared_norm() const { return c_.squaredNorm(); }
    StateVector normalized_copy() const;

private:
    CVector c_;
    bool normalized_ = false;
};

enum class Provenance { Haar, Gaussian, Permutation, Sign, Mub };
const char* to_string(Provenance p);

// Members are stored as the columns of one matrix.
struct StateFamily {
    CMatrix states;
    Provenance provenance = Provenance::Haar;
    std::uint64_t seed = 0;

    Eigen::Index dim() const { return states.rows(); }
    Eigen::Index count() const { return states.cols(); }
    StateVector member(Eigen::Index i) const { return StateVector(states.col(i), true); }
};

struct GramMatrix {
    CMatrix entries;
    Eigen::Index size() const { return entries.rows(); }
};

struct WeightVector {
    RVector weights;
    static WeightVector uniform(Eigen::Index n);
};

class DigitStream {
public:
    enum class Source { BbpPi, File, Prng };

    static DigitStream pi();
    // Bits read as ASCII '0'/'1' characters, everything else ignored.
    static DigitStream from_file(const std::string& path);
    static DigitStream prng(std::uint64_t seed);

    Source source() const { return source_; }
    std::uint64_t cursor() const { return cursor_; }
    void seek(std::uint64_t cursor) { cursor_ = cursor; }
    // Remaining bits, or UINT64_MAX for unbounded sources.
    std::uint64_t available() const;

    int bit_at(std::uint64_t index) const;
    // n bits starting at the cursor; advances the cursor.
    std::vector<std::uint8_t> take(std::uint64_t n);

private:
    Source source_ = Source::BbpPi;
    std::uint64_t cursor_ = 0;
    std::uint64_t seed_ = 0;
    std::shared_ptr<std::vector<std::uint8_t>> file_bits_;
};

// Hex digit of the fractional part of pi at position n (0 = first after the point).
int pi_hex_digit(std::uint64_t n);
// Fractional binary digits of pi [first, first+count), bulk evaluation.
std::vector<std::uint8_t> pi_bits(std::uint64_t first, std::uint64_t count);

StateVector gaussian_vector(Eigen::Index dim, Rng& rng);
StateVector haar_state(Eigen::Index dim, Rng& rng);
CMatrix gaussian_columns(Eigen::Index dim, Eigen::Index count, Rng& rng);

StateFamily haar_family(Eigen::Index dim, Eigen::Index count, std::uint64_t seed);
StateFamily permutation_family(Eigen::Index dim, Eigen::Index count, std::uint64_t seed);
StateFamily sign_family(Eigen::Index dim, Eigen::Index count, DigitStream& stream);
StateFamily mub_family(Eigen::Index prime_dim, Eigen::Index count, std::uint64_t seed);

// State j of basis k for prime p: k = p is the computational basis, otherwise
// the quadratic-phase basis ω^{k x² + j x}/√p.
CVector mub_state(Eigen::Index p, Eigen::Index basis, Eigen::Index j);
bool is_prime(std::uint64_t n);

WeightVector dirichlet_weights(Eigen::Index n, Rng& rng);

GramMatrix gram_matrix(const StateFamily& family);
GramMatrix gram_matrix(const CMatrix& columns);
GramMatrix wishart_sample(Eigen::Index n, Eigen::Index d, Rng& rng);

}  // namespace decohist
