#include "decohist/discrimination.hpp"

#include <cmath>

#include "decohist/rmt.hpp"

namespace decohist {

namespace {

constexpr double kInvertTol = 1e-10;
constexpr double kFloor = 1e-12;
constexpr double kPsdTol = 1e-8;

void check_weights(const GramMatrix& g, const WeightVector& q) {
    require(q.weights.size() == g.size(), ErrorKind::InvalidInput, "weight vector length differs from N");
}

HermitianEigen psd_eigen(const GramMatrix& g) {
    require(g.size() >= 1, ErrorKind::InvalidInput, "empty Gram matrix");
    HermitianEigen e = eigh(g.entries);
    require(e.values[0] >= -kPsdTol, ErrorKind::InvalidInput,
            "Gram matrix not positive semidefinite, min eigenvalue " + std::to_string(e.values[0]));
    return e;
}

}  // namespace

SqrtMeasurement sqrt_measurement(const GramMatrix& g) {
    HermitianEigen e = psd_eigen(g);
    require(e.values[0] > kInvertTol, ErrorKind::RankDeficient,
            "Gram matrix singular, min eigenvalue " + std::to_string(e.values[0]));
    SqrtMeasurement m;
    m.sqrt_gram = spectral_apply(e, [](double l) { return std::sqrt(std::max(l, 0.0)); });
    m.record_coefficients = spectral_apply(e, [](double l) { return l > kFloor ? 1.0 / std::sqrt(l) : 0.0; });
    m.eigenvalues = std::move(e.values);
    return m;
}

CMatrix sqrt_gram(const GramMatrix& g) {
    HermitianEigen e = psd_eigen(g);
    return spectral_apply(e, [](double l) { return std::sqrt(std::max(l, 0.0)); });
}

double average_success_from_sqrt(const CMatrix& sqrt_g, const WeightVector& q) {
    double p = 0.0;
    for (Eigen::Index j = 0; j < sqrt_g.rows(); ++j) p += q.weights[j] * std::norm(sqrt_g(j, j));
    return p;
}

double average_success(const GramMatrix& g, const WeightVector& q) {
    check_weights(g, q);
    HermitianEigen e = psd_eigen(g);
    // Only the diagonal of √G is needed: Σ_k |V_jk|² √λ_k.
    RVector s = e.values.unaryExpr([](double l) { return std::sqrt(std::max(l, 0.0)); });
    RVector diag = e.vectors.cwiseAbs2() * s;
    return q.weights.dot(diag.cwiseAbs2());
}

UnambiguousBounds unambiguous_bounds_from_spectrum(const RVector& ev) {
    UnambiguousBounds b;
    const double lo = ev.minCoeff();
    b.p_un = lo > kFloor ? lo : 0.0;
    if (lo <= kFloor) {
        b.det_root = 0.0;
    } else {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) acc += std::log(ev[i]);
        b.det_root = std::exp(acc / static_cast<double>(ev.size()));
    }
    return b;
}

UnambiguousBounds unambiguous_bounds(const GramMatrix& g) {
    require(g.size() >= 1, ErrorKind::InvalidInput, "empty Gram matrix");
    return unambiguous_bounds_from_spectrum(eigvalsh(g.entries));
}

double slp_gap_bound(double f, double p_s, double t) {
    const double one_minus = std::max(0.0, 1.0 - f);
    return 2.0 * std::sqrt(2.0 * one_minus * p_s * t) + 2.0 * one_minus * t;
}

StateVector global_state(const StateFamily& states, const WeightVector& q) {
    require(q.weights.size() == states.count(), ErrorKind::InvalidInput, "weight vector length differs from N");
    CVector psi = states.states * q.weights.cwiseSqrt().cast<cplx>();
    return StateVector(psi, false).normalized_copy();
}

SlpSolution slp_solve(const GramMatrix& g, const StateFamily& states, const StateVector& psi, const WeightVector& q) {
    check_weights(g, q);
    require(states.count() == g.size() && psi.dim() == states.dim(), ErrorKind::InvalidDimension,
            "inconsistent sizes");
    const Eigen::Index n = g.size();
    const SqrtMeasurement m = sqrt_measurement(g);
    const CMatrix& x = states.states;
    const CMatrix s = x * m.record_coefficients;
    const CVector& target = psi.coefficients();

    const CVector proj = s * (s.adjoint() * target);
    require((target - proj).norm() <= 1e-6, ErrorKind::SpanViolation,
            "target state has residual " + std::to_string((target - proj).norm()) + " outside the span");

    CVector phi = s.rowwise().sum() / std::sqrt(static_cast<double>(n));
    const cplx ov = phi.dot(target);
    const double f = std::min(1.0, std::abs(ov));
    if (std::abs(ov) > 0.0) phi *= ov / std::abs(ov);

    SlpSolution out;
    out.fidelity = f;
    out.rotation.u1 = phi;
    out.rotation.angle = std::acos(f);
    const double sn = std::sqrt(std::max(0.0, 1.0 - f * f));
    if (sn > 1e-14) out.rotation.u2 = (target - f * phi) / sn;
    else out.rotation.u2 = CVector::Zero(phi.size());

    // r_j = s_j + (u1, u2)(V_K − 1)(a_j, b_j)ᵀ with a_j = ⟨u1|s_j⟩, b_j = ⟨u2|s_j⟩.
    const CVector a = s.adjoint() * out.rotation.u1;
    const CVector b = s.adjoint() * out.rotation.u2;
    const CVector xa = x.adjoint() * out.rotation.u1;
    const CVector xb = x.adjoint() * out.rotation.u2;
    double p_s = 0.0, q_s = 0.0, t = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx aj = std::conj(a[j]), bj = std::conj(b[j]);
        const cplx c1 = (f - 1.0) * aj - sn * bj;
        const cplx c2 = sn * aj + (f - 1.0) * bj;
        const cplx base = m.sqrt_gram(j, j);
        const cplx rec = base + xa[j] * c1 + xb[j] * c2;
        p_s += q.weights[j] * std::norm(base);
        q_s += q.weights[j] * std::norm(rec);
        t += q.weights[j] * (std::norm(aj) + std::norm(bj));
    }
    out.success_qsd = p_s;
    out.success_slp = q_s;
    out.overlap_t = t;
    out.gap_bound = slp_gap_bound(f, p_s, t);
    return out;
}

JointTable joint_table_from_sqrt(const CMatrix& sqrt_g, const WeightVector& q) {
    const Eigen::Index n = sqrt_g.rows();
    JointTable t;
    t.q.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) t.q(i, j) = std::norm(sqrt_g(j, i)) * q.weights[i];
    t.row = t.q.rowwise().sum();
    t.col = t.q.colwise().sum().transpose();
    return t;
}

JointTable joint_table(const GramMatrix& g, const WeightVector& q) {
    check_weights(g, q);
    return joint_table_from_sqrt(sqrt_gram(g), q);
}

JointTable joint_table_from_conditional(const RMatrix& conditional, const RVector& row) {
    JointTable t;
    t.q = row.asDiagonal() * conditional;
    t.row = t.q.rowwise().sum();
    t.col = t.q.colwise().sum().transpose();
    return t;
}

double mutual_information(const JointTable& t) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < t.q.cols(); ++j)
        for (Eigen::Index i = 0; i < t.q.rows(); ++i) {
            const double v = t.q(i, j);
            if (v > 0.0) acc += v * (std::log(v) - std::log(t.row[i] * t.col[j]));
        }
    return acc;
}

double binary_entropy(double p) {
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
    return h;
}

double harmonic_number(long n) {
    if (n <= 0) return 0.0;
    if (n <= 100000) {
        double h = 0.0;
        for (long k = n; k >= 1; --k) h += 1.0 / static_cast<double>(k);
        return h;
    }
    const double x = static_cast<double>(n), x2 = x * x;
    return std::log(x) + 0.57721566490153286061 + 1.0 / (2.0 * x) - 1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2);
}

namespace {
void check_mf_args(double p_s, long n) {
    require(n >= 2, ErrorKind::Invalid, "N must be at least 2");
    require(p_s >= 0.0 && p_s <= 1.0, ErrorKind::Invalid, "success probability outside [0,1]");
}
}  // namespace

double mi_mean_field(double p_s, long n) {
    check_mf_args(p_s, n);
    const double nn = static_cast<double>(n);
    return std::log(nn) - binary_entropy(p_s) - (1.0 - p_s) * std::log(nn - 1.0);
}

double mi_fluct(double p_s, long n) {
    check_mf_args(p_s, n);
    return std::log(static_cast<double>(n)) - binary_entropy(p_s) - (1.0 - p_s) * (harmonic_number(n - 1) - 1.0);
}

RMatrix large_n_table(double p_s, long d, long n) {
    require(d >= 3, ErrorKind::Invalid, "large-N table needs d >= 3");
    require(n > d, ErrorKind::Invalid, "N <= d: use the standard mean-field path");
    RMatrix mu = RMatrix::Zero(n, d);
    const double off = (1.0 - p_s) / static_cast<double>(d - 2);
    for (long i = 0; i < d - 1; ++i)
        for (long j = 0; j < d - 1; ++j) mu(i, j) = i == j ? p_s : off;
    mu.bottomRows(n - d + 1).setConstant(1.0 / static_cast<double>(d));
    return mu;
}

double large_n_mean_field_mi(double p_s, long d, long n) {
    require(d >= 3, ErrorKind::Invalid, "large-N table needs d >= 3");
    require(n > d, ErrorKind::Invalid, "N <= d: use the standard mean-field path");
    const double dd = static_cast<double>(d), nn = static_cast<double>(n);
    const double spread = nn - dd + 1.0;
    const double c_tuned = (1.0 + spread / dd) / nn;  // q'_j, j < d
    const double c_last = spread / (dd * nn);
    auto term = [](double mass, double ratio) { return mass > 0.0 ? mass * std::log(ratio) : 0.0; };
    const double off = (1.0 - p_s) / (dd - 2.0);
    const double tuned_row = term(p_s / nn, p_s / c_tuned) + (dd - 2.0) * term(off / nn, off / c_tuned);
    const double spread_row =
        (dd - 1.0) * term(1.0 / (dd * nn), 1.0 / (dd * c_tuned)) + term(1.0 / (dd * nn), 1.0 / (dd * c_last));
    return (dd - 1.0) * tuned_row + spread * spread_row;
}

double mean_field_mi_curve(long d, long n) {
    if (n <= d) {
        const double p = std::pow(mu_sqrt(static_cast<double>(n) / static_cast<double>(d)), 2);
        return mi_mean_field(p, n);
    }
    return large_n_mean_field_mi(std::pow(mu_sqrt(1.0), 2), d, n);
}

MiMaxEstimate mi_max_estimate(double k, double c) {
    require(k >= 2.0, ErrorKind::Invalid, "K must be at least 2");
    require(c > 0.0 && c < 1.0, ErrorKind::Invalid, "c must lie in (0,1)");
    MiMaxEstimate e;
    e.beta = 2.0 * std::log(2.0) / c;
    const double kl = k + std::log2(e.beta);
    e.i_max = (1.0 - 1.0 / kl) * (k - std::log2(c * kl));
    e.n_star = std::exp2(k) / (c * kl);
    return e;
}

}  // namespace decohist
