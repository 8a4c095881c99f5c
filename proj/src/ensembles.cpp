#include "decohist/ensembles.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>

#include <gmp.h>
#include <mpfr.h>

namespace decohist {

namespace {

constexpr double kNormTol = 1e-10;

void check_dim(Eigen::Index dim) {
    require(dim >= 1, ErrorKind::InvalidDimension, "dimension must be at least 1");
}

}  // namespace

StateVector::StateVector(CVector coefficients, bool normalized)
    : c_(std::move(coefficients)), normalized_(normalized) {
    check_dim(c_.size());
    if (normalized_) {
        require(std::abs(c_.squaredNorm() - 1.0) <= kNormTol, ErrorKind::InvalidInput,
                "state flagged normalized but squared norm is " + std::to_string(c_.squaredNorm()));
    }
}

StateVector StateVector::normalized_copy() const {
    double n = c_.norm();
    require(n > 0.0, ErrorKind::InvalidInput, "cannot normalize the zero vector");
    return StateVector(c_ / n, true);
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Haar: return "haar";
        case Provenance::Gaussian: return "gaussian";
        case Provenance::Permutation: return "permutation";
        case Provenance::Sign: return "sign";
        case Provenance::Mub: return "mub";
    }
    return "unknown";
}

WeightVector WeightVector::uniform(Eigen::Index n) {
    return WeightVector{RVector::Constant(n, 1.0 / static_cast<double>(n))};
}

// ---- digit streams -------------------------------------------------------

namespace {

std::uint64_t powmod16(std::uint64_t e, std::uint64_t m) {
    if (m == 1) return 0;
    unsigned __int128 r = 1, b = 16 % m;
    while (e) {
        if (e & 1) r = (r * b) % m;
        b = (b * b) % m;
        e >>= 1;
    }
    return static_cast<std::uint64_t>(r);
}

// Fractional part of Σ_k 16^{n-k}/(8k+j).
double bbp_series(std::uint64_t n, std::uint64_t j) {
    double s = 0.0;
    for (std::uint64_t k = 0; k <= n; ++k) {
        std::uint64_t den = 8 * k + j;
        s += static_cast<double>(powmod16(n - k, den)) / static_cast<double>(den);
        s -= std::floor(s);
    }
    double p = 1.0 / 16.0;
    for (std::uint64_t k = n + 1; p > 1e-20; ++k, p /= 16.0) s += p / static_cast<double>(8 * k + j);
    return s - std::floor(s);
}

struct PiCache {
    std::mutex mu;
    std::vector<std::uint8_t> bits;
};

PiCache& pi_cache() {
    static PiCache c;
    return c;
}

}  // namespace

int pi_hex_digit(std::uint64_t n) {
    double x = 4.0 * bbp_series(n, 1) - 2.0 * bbp_series(n, 4) - bbp_series(n, 5) - bbp_series(n, 6);
    x -= std::floor(x);
    return static_cast<int>(std::floor(16.0 * x));
}

std::vector<std::uint8_t> pi_bits(std::uint64_t first, std::uint64_t count) {
    PiCache& cache = pi_cache();
    std::lock_guard<std::mutex> lock(cache.mu);
    const std::uint64_t need = first + count;
    if (cache.bits.size() < need) {
        std::uint64_t total = std::max<std::uint64_t>(need, 2 * cache.bits.size());
        mpfr_t pi;
        mpfr_init2(pi, static_cast<mpfr_prec_t>(total + 128));
        mpfr_const_pi(pi, MPFR_RNDZ);
        mpfr_sub_ui(pi, pi, 3, MPFR_RNDZ);
        mpfr_mul_2ui(pi, pi, total, MPFR_RNDZ);
        mpz_t z;
        mpz_init(z);
        mpfr_get_z(z, pi, MPFR_RNDZ);
        cache.bits.assign(total, 0);
        for (std::uint64_t i = 0; i < total; ++i)
            cache.bits[i] = static_cast<std::uint8_t>(mpz_tstbit(z, total - 1 - i));
        mpz_clear(z);
        mpfr_clear(pi);
    }
    return std::vector<std::uint8_t>(cache.bits.begin() + static_cast<std::ptrdiff_t>(first),
                                     cache.bits.begin() + static_cast<std::ptrdiff_t>(need));
}

DigitStream DigitStream::pi() { return DigitStream{}; }

DigitStream DigitStream::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::InvalidInput, "cannot open digit file " + path);
    DigitStream s;
    s.source_ = Source::File;
    s.file_bits_ = std::make_shared<std::vector<std::uint8_t>>();
    char c;
    while (in.get(c))
        if (c == '0' || c == '1') s.file_bits_->push_back(static_cast<std::uint8_t>(c - '0'));
    return s;
}

DigitStream DigitStream::prng(std::uint64_t seed) {
    DigitStream s;
    s.source_ = Source::Prng;
    s.seed_ = seed;
    return s;
}

std::uint64_t DigitStream::available() const {
    if (source_ == Source::File) {
        std::uint64_t n = file_bits_->size();
        return cursor_ >= n ? 0 : n - cursor_;
    }
    return UINT64_MAX;
}

int DigitStream::bit_at(std::uint64_t index) const {
    switch (source_) {
        case Source::BbpPi: return (pi_hex_digit(index / 4) >> (3 - index % 4)) & 1;
        case Source::File:
            require(index < file_bits_->size(), ErrorKind::StreamUnderflow, "digit file exhausted");
            return (*file_bits_)[index];
        case Source::Prng: return static_cast<int>((splitmix64(seed_ + index / 64) >> (index % 64)) & 1);
    }
    return 0;
}

std::vector<std::uint8_t> DigitStream::take(std::uint64_t n) {
    require(available() >= n, ErrorKind::StreamUnderflow,
            "stream has " + std::to_string(available()) + " bits, " + std::to_string(n) + " requested");
    std::vector<std::uint8_t> out;
    if (source_ == Source::BbpPi) {
        out = pi_bits(cursor_, n);
    } else {
        out.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) out[i] = static_cast<std::uint8_t>(bit_at(cursor_ + i));
    }
    cursor_ += n;
    return out;
}

// ---- state families ------------------------------------------------------

StateVector gaussian_vector(Eigen::Index dim, Rng& rng) {
    check_dim(dim);
    const double sigma = std::sqrt(1.0 / (2.0 * static_cast<double>(dim)));
    CVector c(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        double re = rng.normal(sigma);
        double im = rng.normal(sigma);
        c[i] = cplx(re, im);
    }
    return StateVector(std::move(c), false);
}

StateVector haar_state(Eigen::Index dim, Rng& rng) {
    for (;;) {
        StateVector g = gaussian_vector(dim, rng);
        double n = g.coefficients().norm();
        if (n > 0.0) return StateVector(g.coefficients() / n, true);
    }
}

CMatrix gaussian_columns(Eigen::Index dim, Eigen::Index count, Rng& rng) {
    check_dim(dim);
    CMatrix x(dim, count);
    for (Eigen::Index j = 0; j < count; ++j) x.col(j) = gaussian_vector(dim, rng).coefficients();
    return x;
}

StateFamily haar_family(Eigen::Index dim, Eigen::Index count, std::uint64_t seed) {
    check_dim(dim);
    require(count >= 1, ErrorKind::Invalid, "family needs at least one member");
    Rng rng(seed);
    StateFamily f{CMatrix(dim, count), Provenance::Haar, seed};
    for (Eigen::Index j = 0; j < count; ++j) f.states.col(j) = haar_state(dim, rng).coefficients();
    return f;
}

StateFamily permutation_family(Eigen::Index dim, Eigen::Index count, std::uint64_t seed) {
    check_dim(dim);
    require(count >= 1, ErrorKind::Invalid, "family needs at least one member");
    Rng rng(seed);
    StateFamily f{CMatrix(dim, count), Provenance::Permutation, seed};
    CVector seed_state = haar_state(dim, rng).coefficients();
    f.states.col(0) = seed_state;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(dim));
    for (Eigen::Index j = 1; j < count; ++j) {
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        for (Eigen::Index k = dim - 1; k > 0; --k) {
            auto r = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(k + 1)));
            std::swap(perm[static_cast<std::size_t>(k)], perm[static_cast<std::size_t>(r)]);
        }
        for (Eigen::Index x = 0; x < dim; ++x) f.states(x, j) = seed_state[perm[static_cast<std::size_t>(x)]];
    }
    return f;
}

StateFamily sign_family(Eigen::Index dim, Eigen::Index count, DigitStream& stream) {
    check_dim(dim);
    require(count >= 1, ErrorKind::Invalid, "family needs at least one member");
    const std::uint64_t start = stream.cursor();
    const auto bits = stream.take(static_cast<std::uint64_t>(dim) * static_cast<std::uint64_t>(count));
    const double a = 1.0 / std::sqrt(static_cast<double>(dim));
    StateFamily f{CMatrix(dim, count), Provenance::Sign, start};
    for (Eigen::Index j = 0; j < count; ++j)
        for (Eigen::Index x = 0; x < dim; ++x)
            f.states(x, j) = bits[static_cast<std::size_t>(j * dim + x)] ? -a : a;
    return f;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t k = 2; k * k <= n; ++k)
        if (n % k == 0) return false;
    return true;
}

CVector mub_state(Eigen::Index p, Eigen::Index basis, Eigen::Index j) {
    CVector v = CVector::Zero(p);
    if (basis == p) {
        v[j] = 1.0;
        return v;
    }
    const double a = 1.0 / std::sqrt(static_cast<double>(p));
    const auto k = static_cast<std::uint64_t>(basis), jj = static_cast<std::uint64_t>(j);
    for (Eigen::Index x = 0; x < p; ++x) {
        const auto ux = static_cast<std::uint64_t>(x);
        double phase;
        if (p == 2) {
            phase = 2.0 * M_PI * static_cast<double>((k * ux * ux + 2 * jj * ux) % 4) / 4.0;
        } else {
            const auto up = static_cast<std::uint64_t>(p);
            phase = 2.0 * M_PI * static_cast<double>((k * (ux * ux % up) + jj * ux) % up) / static_cast<double>(p);
        }
        v[x] = a * cplx(std::cos(phase), std::sin(phase));
    }
    return v;
}

StateFamily mub_family(Eigen::Index prime_dim, Eigen::Index count, std::uint64_t seed) {
    require(prime_dim >= 2 && is_prime(static_cast<std::uint64_t>(prime_dim)), ErrorKind::InvalidDimension,
            std::to_string(prime_dim) + " is not prime");
    const Eigen::Index total = prime_dim * (prime_dim + 1);
    require(count >= 1, ErrorKind::Invalid, "family needs at least one member");
    require(count <= total, ErrorKind::ExhaustedDesign,
            "requested " + std::to_string(count) + " states, design has " + std::to_string(total));
    Rng rng(seed);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(total));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    StateFamily f{CMatrix(prime_dim, count), Provenance::Mub, seed};
    for (Eigen::Index j = 0; j < count; ++j) {
        auto r = j + static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(total - j)));
        std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(r)]);
        Eigen::Index m = idx[static_cast<std::size_t>(j)];
        f.states.col(j) = mub_state(prime_dim, m / prime_dim, m % prime_dim);
    }
    return f;
}

WeightVector dirichlet_weights(Eigen::Index n, Rng& rng) {
    return WeightVector{haar_state(n, rng).coefficients().cwiseAbs2()};
}

GramMatrix gram_matrix(const CMatrix& x) {
    require(x.cols() >= 1, ErrorKind::Invalid, "empty family");
    GramMatrix g;
    if (x.imag().cwiseAbs().maxCoeff() == 0.0) {
        RMatrix xr = x.real();
        RMatrix gr(x.cols(), x.cols());
        gr.setZero();
        gr.selfadjointView<Eigen::Lower>().rankUpdate(xr.transpose());
        g.entries = gr.selfadjointView<Eigen::Lower>().toDenseMatrix().cast<cplx>();
        return g;
    }
    g.entries = x.adjoint() * x;
    CMatrix h = 0.5 * (g.entries + g.entries.adjoint());
    g.entries = std::move(h);
    return g;
}

GramMatrix gram_matrix(const StateFamily& family) { return gram_matrix(family.states); }

GramMatrix wishart_sample(Eigen::Index n, Eigen::Index d, Rng& rng) {
    require(n >= 1 && d >= 1, ErrorKind::InvalidDimension, "wishart sizes must be positive");
    return gram_matrix(gaussian_columns(d, n, rng));
}

}  // namespace decohist
