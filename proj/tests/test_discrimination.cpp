#include <doctest.h>

#include "decohist/discrimination.hpp"
#include "decohist/ensembles.hpp"
#include "decohist/rmt.hpp"
#include "oracles.hpp"

using namespace decohist;

namespace {

GramMatrix two_state(double c) {
    CMatrix g(2, 2);
    g << 1.0, c, c, 1.0;
    return GramMatrix{g};
}

// √G through Eigen's own solver, independent of the LAPACK path.
CMatrix sqrt_via_eigen(const CMatrix& g) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

double explicit_mi(const RMatrix& q) {
    const RVector r = q.rowwise().sum(), c = q.colwise().sum().transpose();
    double s = 0.0;
    for (long i = 0; i < q.rows(); ++i)
        for (long j = 0; j < q.cols(); ++j)
            if (q(i, j) > 0) s += q(i, j) * std::log(q(i, j) / (r[i] * c[j]));
    return s;
}

}  // namespace

TEST_CASE("square-root measurement basics") {
    SqrtMeasurement id = sqrt_measurement(GramMatrix{CMatrix::Identity(5, 5)});
    CHECK(max_abs(id.record_coefficients - CMatrix::Identity(5, 5)) < 1e-14);
    CHECK(max_abs(id.sqrt_gram - CMatrix::Identity(5, 5)) < 1e-14);

    // Analytic 2×2: √G_jj = (√1.6 + √0.4)/2.
    SqrtMeasurement m = sqrt_measurement(two_state(0.6));
    const double want = std::pow((std::sqrt(1.6) + std::sqrt(0.4)) / 2.0, 2);
    CHECK(std::abs(want - 0.9) < 1e-15);
    CHECK(std::abs(std::norm(m.sqrt_gram(0, 0)) - want) < 1e-14);
    CHECK(std::abs(average_success(two_state(0.6), WeightVector::uniform(2)) - 0.9) < 1e-14);
    CHECK(average_success(GramMatrix{CMatrix::Ones(1, 1)}, WeightVector::uniform(1)) == doctest::Approx(1.0));
}

TEST_CASE("square-root measurement on Haar families") {
    StateFamily f = haar_family(500, 250, 17);
    GramMatrix g = gram_matrix(f);
    SqrtMeasurement m = sqrt_measurement(g);
    CHECK(max_abs(m.sqrt_gram * m.sqrt_gram - g.entries) < 1e-8);
    CHECK(max_abs(m.sqrt_gram - sqrt_via_eigen(g.entries)) < 1e-8);
    const CMatrix records = f.states * m.record_coefficients;
    CHECK(max_abs(records.adjoint() * records - CMatrix::Identity(250, 250)) < 1e-8);

    const double target = std::pow(oracle::mp_integral([](double x) { return std::sqrt(x); }, 0.5), 2);
    double mean = 0.0;
    for (long j = 0; j < 250; ++j) mean += std::norm(m.sqrt_gram(j, j)) / 250.0;
    CHECK(std::abs(mean - target) < 0.02);
    CHECK(std::abs(average_success(g, WeightVector::uniform(250)) - mean) < 1e-10);

    const UnambiguousBounds b = unambiguous_bounds(g);
    CHECK(b.p_un <= b.det_root);
    CHECK(b.det_root <= 1.0);
    CHECK(mean >= b.det_root - 0.05);
    const double ln_target = std::exp(oracle::mp_integral([](double x) { return std::log(x); }, 0.5));
    CHECK(std::abs(b.det_root - ln_target) < 0.03);
}

TEST_CASE("unambiguous bounds") {
    UnambiguousBounds id = unambiguous_bounds(GramMatrix{CMatrix::Identity(4, 4)});
    CHECK(id.p_un == doctest::Approx(1.0));
    CHECK(id.det_root == doctest::Approx(1.0));

    StateFamily f = haar_family(6, 4, 2);
    f.states.col(3) = f.states.col(1);
    GramMatrix g = gram_matrix(f);
    CHECK(unambiguous_bounds(g).p_un == 0.0);
    try {
        sqrt_measurement(g);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::RankDeficient);
    }
}

TEST_CASE("self-location gap bound") {
    const double direct = 2.0 * std::sqrt(2.0 * 0.1 * 0.8 * 0.02) + 2.0 * 0.1 * 0.02;
    CHECK(std::abs(slp_gap_bound(0.9, 0.8, 0.02) - direct) < 1e-15);
    CHECK(std::abs(direct - 0.1171) < 1e-4);
}

TEST_CASE("self-location with the target equal to the record superposition") {
    StateFamily f = haar_family(40, 12, 5);
    GramMatrix g = gram_matrix(f);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g.entries);
    const CMatrix gi = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                       es.eigenvectors().adjoint();
    const CVector phi = (f.states * gi).rowwise().sum() / std::sqrt(12.0);
    SlpSolution s = slp_solve(g, f, StateVector(phi, true), WeightVector::uniform(12));
    CHECK(std::abs(s.fidelity - 1.0) < 1e-10);
    CHECK(std::abs(s.success_slp - s.success_qsd) < 1e-9);
    CHECK(s.gap_bound < 1e-4);
}

TEST_CASE("self-location on Haar families") {
    const long d = 400;
    for (long n : {100L, 200L}) {
        StateFamily f = haar_family(d, n, 31 + std::uint64_t(n));
        GramMatrix g = gram_matrix(f);
        const WeightVector q = WeightVector::uniform(n);
        SlpSolution s = slp_solve(g, f, global_state(f, q), q);
        const double mu = oracle::mp_integral([](double x) { return std::sqrt(x); }, double(n) / double(d));
        CHECK(std::abs(s.fidelity - mu) < 0.03);
        CHECK(s.success_slp <= s.success_qsd + 1e-8);
        CHECK(s.success_qsd - s.success_slp <= s.gap_bound + 1e-8);
        CHECK(s.success_slp >= 0.0);
        CHECK(s.success_slp <= 1.0);
        CHECK(std::abs(std::cos(s.rotation.angle) - s.fidelity) < 1e-12);
        CHECK(std::abs(s.rotation.u1.norm() - 1.0) < 1e-10);
        CHECK(std::abs(s.rotation.u2.norm() - 1.0) < 1e-10);
        CHECK(std::abs(s.rotation.u1.dot(s.rotation.u2)) < 1e-10);
    }
    StateFamily f = haar_family(50, 10, 1);
    Rng rng(3);
    try {
        slp_solve(gram_matrix(f), f, haar_state(50, rng), WeightVector::uniform(10));
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::SpanViolation);
    }
}

TEST_CASE("joint tables") {
    JointTable id = joint_table(GramMatrix{CMatrix::Identity(4, 4)}, WeightVector::uniform(4));
    CHECK((id.q - RMatrix::Identity(4, 4) / 4.0).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(std::abs(mutual_information(id) - std::log(4.0)) < 1e-14);

    JointTable t = joint_table(two_state(0.6), WeightVector::uniform(2));
    CHECK(std::abs(t.q(0, 0) - 0.45) < 1e-14);
    CHECK(std::abs(t.q(1, 1) - 0.45) < 1e-14);
    CHECK(std::abs(t.q(0, 1) - 0.05) < 1e-14);

    StateFamily f = haar_family(60, 30, 4);
    JointTable h = joint_table(gram_matrix(f), WeightVector::uniform(30));
    CHECK(std::abs(h.q.sum() - 1.0) < 1e-10);
    CHECK((h.col.array() - 1.0 / 30.0).abs().maxCoeff() < 1e-12);
    CHECK(std::abs(mutual_information(h) - explicit_mi(h.q)) < 1e-12);

    RVector a(3), b(4);
    a << 0.2, 0.3, 0.5;
    b << 0.1, 0.2, 0.3, 0.4;
    JointTable prod;
    prod.q = a * b.transpose();
    prod.row = a;
    prod.col = b;
    CHECK(std::abs(mutual_information(prod)) < 1e-15);
}

TEST_CASE("mutual information on Haar ensembles") {
    const long d = 500, n = 250;
    GramMatrix g = gram_matrix(haar_family(d, n, 77));
    const WeightVector q = WeightVector::uniform(n);
    const double i = mutual_information(joint_table(g, q));
    const double p = average_success(g, q);
    CHECK(std::abs(i - mi_fluct(p, n)) / std::log(double(n)) < 0.02);
    CHECK(i >= mi_mean_field(p, n) - 0.02 * std::log(double(n)));
}

TEST_CASE("mean-field and fluctuation formulas") {
    CHECK(mi_mean_field(1.0, 50) == doctest::Approx(std::log(50.0)));
    const double direct = std::log(1000.0) + 0.72 * std::log(0.72) + 0.28 * std::log(0.28) - 0.28 * std::log(999.0);
    CHECK(std::abs(mi_mean_field(0.72, 1000) - direct) < 1e-12);
    CHECK(std::abs(direct - 4.383) < 0.005);
    CHECK(std::abs(mi_mean_field(0.9, 1000000) / (0.9 * std::log(1e6)) - 1.0) < 0.05);
    CHECK_THROWS_AS(mi_mean_field(0.5, 1), Error);

    for (double p : {0.3, 0.72})
        CHECK(std::abs(mi_fluct(p, 2) - (std::log(2.0) + p * std::log(p) + (1 - p) * std::log(1 - p))) < 1e-14);
    CHECK(mi_fluct(1.0, 77) == doctest::Approx(std::log(77.0)));
    const double gamma_e = 0.5772156649015329;
    CHECK(std::abs(mi_fluct(0.72, 100000) - mi_mean_field(0.72, 100000) - 0.28 * (1.0 - gamma_e)) < 1e-3);

    double h = 0.0;
    for (long k = 1; k <= 200000; ++k) h += 1.0 / double(k);
    CHECK(std::abs(harmonic_number(200000) - h) < 1e-10);
    CHECK(harmonic_number(1) == 1.0);
}

TEST_CASE("large-N table") {
    RMatrix mu = large_n_table(0.7, 8, 20);
    CHECK((mu.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(mu.topRows(7).col(7).cwiseAbs().maxCoeff() == 0.0);
    CHECK(mu(0, 0) == 0.7);
    CHECK(std::abs(mu(0, 1) - 0.3 / 6.0) < 1e-15);
    CHECK(std::abs(mu(12, 7) - 1.0 / 8.0) < 1e-15);
    const RMatrix joint = mu / 20.0;
    CHECK(std::abs(large_n_mean_field_mi(0.7, 8, 20) - explicit_mi(joint)) < 1e-12);
    CHECK_THROWS_AS(large_n_table(0.7, 8, 8), Error);

    const long d = 1 << 10;
    double prev = mean_field_mi_curve(d, d);
    for (double r : {1.5, 2.0, 4.0, 8.0}) {
        const double cur = mean_field_mi_curve(d, long(r * d));
        CHECK(cur < prev);
        prev = cur;
    }

    const long big = 1 << 14;
    long best_n = 0;
    double best = -1.0;
    for (int k = 0; k <= 160; ++k) {
        const long n = long(std::round(std::exp2(1.0 + 16.0 * k / 160.0)));
        const double v = mean_field_mi_curve(big, n);
        if (v > best) {
            best = v;
            best_n = n;
        }
    }
    CHECK(best_n < big);
}

TEST_CASE("maximum mutual information estimate") {
    MiMaxEstimate e = mi_max_estimate(12, 0.28);
    CHECK(std::abs(e.beta - 2.0 * std::log(2.0) / 0.28) < 1e-14);
    CHECK(std::abs(e.beta - 4.951) < 1e-3);
    CHECK(mi_max_estimate(50).i_max / 50.0 > 0.85);

    // Brute force over N with P_S on the Haar curve, base-2 information.
    const long d = 1 << 12;
    long best_n = 0;
    double best = -1.0;
    for (int k = 0; k <= 240; ++k) {
        const long n = long(std::round(std::exp2(1.0 + 11.0 * k / 240.0)));
        const double p = std::pow(oracle::mp_integral([](double x) { return std::sqrt(x); }, double(n) / double(d), 2000), 2);
        const double v = std::log(double(n)) + p * std::log(p) + (1 - p) * std::log(1 - p) - (1 - p) * std::log(double(n - 1));
        if (v > best) {
            best = v;
            best_n = n;
        }
    }
    CHECK(double(best_n) / e.n_star < 2.0);
    CHECK(e.n_star / double(best_n) < 2.0);
}
