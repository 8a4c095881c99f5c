#pragma once

#include "decohist/types.hpp"

namespace decohist {

struct HermitianEigen {
    RVector values;   // ascending
    CMatrix vectors;  // columns
};

struct SymmetricEigen {
    RVector values;
    RMatrix vectors;
};

// LAPACK divide and conquer. Falls back to the real solver when the input has
// no imaginary part.
HermitianEigen eigh(const CMatrix& a);
SymmetricEigen eigh_real(const RMatrix& a);
RVector eigvalsh(const CMatrix& a);

bool is_real(const CMatrix& a, double tol = 0.0);

// f applied to the spectrum: V f(Λ) V†.
template <class F>
CMatrix spectral_apply(const HermitianEigen& e, F f) {
    RVector fv = e.values.unaryExpr(f);
    return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

double max_abs(const CMatrix& a);

// Kahan-Neumaier accumulator for order-insensitive means.
class Accumulator {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
        ++n_;
    }
    double sum() const { return sum_ + comp_; }
    double mean() const { return n_ ? sum() / static_cast<double>(n_) : 0.0; }
    std::size_t count() const { return n_; }

private:
    double sum_ = 0.0, comp_ = 0.0;
    std::size_t n_ = 0;
};

}  // namespace decohist
