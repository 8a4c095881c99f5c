#include "decohist/rmt.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace decohist {

MpLaw::MpLaw(double gamma) : gamma_(gamma) {
    require(gamma > 0.0, ErrorKind::InvalidInput, "gamma must be positive");
    require(gamma <= 1.0, ErrorKind::UnsupportedRegime, "gamma > 1 carries a point mass at zero");
    const double s = std::sqrt(gamma);
    lm_ = (1.0 - s) * (1.0 - s);
    lp_ = (1.0 + s) * (1.0 + s);
}

double mp_density(double lambda, const MpLaw& law) {
    const double lm = law.lambda_minus(), lp = law.lambda_plus();
    if (lambda <= lm || lambda >= lp || lambda <= 0.0) return 0.0;
    return std::sqrt((lp - lambda) * (lambda - lm)) / (2.0 * M_PI * law.gamma() * lambda);
}

double mp_expectation(const std::function<double(double)>& f, const MpLaw& law, double tol) {
    const double lm = law.lambda_minus(), w = law.lambda_plus() - law.lambda_minus();
    const double pref = w * w / (M_PI * law.gamma());
    // λ = λ− + w sin²θ turns the square-root edges into sin²θ cos²θ.
    auto integrand = [&](double theta) {
        const double s = std::sin(theta), c = std::cos(theta);
        const double s2 = s * s;
        const double lambda = lm + w * s2;
        if (!(lambda > 0.0)) return 0.0;
        const double ratio = (lm == 0.0) ? 1.0 / w : s2 / lambda;
        return f(lambda) * pref * ratio * c * c;
    };
    boost::math::quadrature::tanh_sinh<double> integrator(15);
    double error = 0.0, l1 = 0.0;
    const double value = integrator.integrate(integrand, 0.0, M_PI / 2.0, tol, &error, &l1);
    require(std::isfinite(value) && error <= 10.0 * tol * std::max(1.0, l1), ErrorKind::NumericFailure,
            "quadrature did not converge, error estimate " + std::to_string(error));
    return value;
}

double mu_sqrt(double gamma) {
    return mp_expectation([](double l) { return std::sqrt(l); }, MpLaw(gamma));
}

double mu_ln(double gamma) {
    return mp_expectation([](double l) { return std::log(l); }, MpLaw(gamma));
}

SpectralFit mp_fit(const RVector& eigenvalues, const MpFitOptions& opts) {
    const Eigen::Index n = eigenvalues.size();
    require(n >= 2, ErrorKind::InvalidInput, "need at least two eigenvalues");
    RVector ev = eigenvalues.cwiseMax(0.0);
    const double top = ev.maxCoeff(), bottom = ev.minCoeff();
    require(top - bottom > 1e-12 * std::max(1.0, top), ErrorKind::DegenerateSpectrum,
            "all eigenvalues are equal");

    const int bins = opts.bins;
    const double width = top / bins;
    RVector hist = RVector::Zero(bins);
    for (Eigen::Index i = 0; i < n; ++i) {
        int b = std::min(bins - 1, static_cast<int>(ev[i] / width));
        hist[b] += 1.0;
    }
    hist /= static_cast<double>(n) * width;

    SpectralFit best;
    best.residual = std::numeric_limits<double>::infinity();
    const double nn = static_cast<double>(n);
    const double lo = std::log(opts.grid_lo_factor * nn), hi = std::log(opts.grid_hi_factor * nn);
    for (int k = 0; k < opts.grid_points; ++k) {
        const double d_eff = std::exp(lo + (hi - lo) * k / (opts.grid_points - 1));
        const double gamma = nn / d_eff;
        if (gamma > 1.0) continue;
        MpLaw law(gamma);
        double r = 0.0;
        for (int b = 0; b < bins; ++b) {
            const double diff = hist[b] - mp_density((b + 0.5) * width, law);
            r += diff * diff;
        }
        if (r < best.residual) best = SpectralFit{d_eff, gamma, r};
    }
    require(std::isfinite(best.residual), ErrorKind::NumericFailure, "no admissible fit candidate");
    return best;
}

std::vector<double> bridge_process(const CMatrix& u, const StateVector& probe) {
    require(std::abs(probe.squared_norm() - 1.0) <= 1e-8, ErrorKind::InvalidInput, "probe must have unit norm");
    require(u.rows() == probe.dim(), ErrorKind::InvalidDimension, "probe dimension mismatch");
    const CVector d = u.adjoint() * probe.coefficients();
    const Eigen::Index n = d.size();
    const double inv = 1.0 / static_cast<double>(n), scale = std::sqrt(static_cast<double>(n) / 2.0);
    std::vector<double> path(static_cast<std::size_t>(n) + 1, 0.0);
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        acc += std::norm(d[k]) - inv;
        path[static_cast<std::size_t>(k) + 1] = scale * acc;
    }
    return path;
}

}  // namespace decohist
