#include "decohist/linalg.hpp"
#include "decohist/rng.hpp"
#include "decohist/types.hpp"

#include <lapacke.h>

namespace decohist {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidDimension: return "invalid-dimension";
        case ErrorKind::Invalid: return "invalid";
        case ErrorKind::InvalidInput: return "invalid-input";
        case ErrorKind::InvalidFamily: return "invalid-family";
        case ErrorKind::StreamUnderflow: return "stream-underflow";
        case ErrorKind::ExhaustedDesign: return "exhausted-design";
        case ErrorKind::UnsupportedRegime: return "unsupported-regime";
        case ErrorKind::NumericFailure: return "numeric-failure";
        case ErrorKind::DegenerateSpectrum: return "degenerate-spectrum";
        case ErrorKind::RankDeficient: return "rank-deficient";
        case ErrorKind::SpanViolation: return "span-violation";
        case ErrorKind::NullHistory: return "null-history";
        case ErrorKind::InvalidBranch: return "invalid-branch";
        case ErrorKind::TooLarge: return "too-large";
        case ErrorKind::InvalidConfig: return "invalid-config";
        case ErrorKind::InvalidResult: return "invalid-result";
        case ErrorKind::UndefinedSnr: return "undefined-snr";
    }
    return "unknown";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
    // FNV-1a over the label, then mixed with the master seed.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return splitmix64(master ^ splitmix64(h));
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index) {
    return splitmix64(derive_seed(master, label) + splitmix64(index + 1));
}

bool is_real(const CMatrix& a, double tol) {
    return a.imag().cwiseAbs().maxCoeff() <= tol;
}

double max_abs(const CMatrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

SymmetricEigen eigh_real(const RMatrix& a) {
    require(a.rows() == a.cols(), ErrorKind::InvalidDimension, "eigh_real: matrix not square");
    SymmetricEigen out;
    const lapack_int n = static_cast<lapack_int>(a.rows());
    out.vectors = a;
    out.values.resize(n);
    if (n == 0) return out;
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.vectors.data(), n, out.values.data());
    require(info == 0, ErrorKind::NumericFailure, "dsyevd info=" + std::to_string(info));
    return out;
}

HermitianEigen eigh(const CMatrix& a) {
    require(a.rows() == a.cols(), ErrorKind::InvalidDimension, "eigh: matrix not square");
    HermitianEigen out;
    if (is_real(a)) {
        SymmetricEigen r = eigh_real(a.real());
        out.values = std::move(r.values);
        out.vectors = r.vectors.cast<cplx>();
        return out;
    }
    const lapack_int n = static_cast<lapack_int>(a.rows());
    out.vectors = a;
    out.values.resize(n);
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                                     reinterpret_cast<lapack_complex_double*>(out.vectors.data()), n,
                                     out.values.data());
    require(info == 0, ErrorKind::NumericFailure, "zheevd info=" + std::to_string(info));
    return out;
}

RVector eigvalsh(const CMatrix& a) {
    require(a.rows() == a.cols(), ErrorKind::InvalidDimension, "eigvalsh: matrix not square");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    RVector w(n);
    if (n == 0) return w;
    if (is_real(a)) {
        RMatrix r = a.real();
        lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, r.data(), n, w.data());
        require(info == 0, ErrorKind::NumericFailure, "dsyevd info=" + std::to_string(info));
        return w;
    }
    CMatrix c = a;
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                     reinterpret_cast<lapack_complex_double*>(c.data()), n, w.data());
    require(info == 0, ErrorKind::NumericFailure, "zheevd info=" + std::to_string(info));
    return w;
}

}  // namespace decohist
