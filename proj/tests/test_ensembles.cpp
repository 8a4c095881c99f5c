#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "decohist/ensembles.hpp"
#include "decohist/linalg.hpp"
#include "oracles.hpp"

using namespace decohist;

TEST_CASE("gaussian vector variance in one dimension") {
    Rng rng(1);
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) acc += gaussian_vector(1, rng).squared_norm();
    CHECK(std::abs(acc / 10000 - 1.0) < 0.05);
}

TEST_CASE("gaussian vector rejects zero dimension") {
    Rng rng(1);
    CHECK_THROWS_AS(gaussian_vector(0, rng), Error);
    try {
        gaussian_vector(0, rng);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidDimension);
    }
}

TEST_CASE("squared norm is one on average and concentrates") {
    for (long dim : {5L, 60L, 600L}) {
        Rng rng(7 + dim);
        std::vector<double> n2;
        for (int i = 0; i < 10000; ++i) n2.push_back(gaussian_vector(dim, rng).squared_norm());
        // Var ‖ψ'‖² = 1/dim for a sum of dim exponentials of mean 1/dim.
        const double sigma = std::sqrt(1.0 / double(dim) / 10000.0);
        CHECK(std::abs(oracle::mean(n2) - 1.0) < 3.0 * sigma);
        for (double eps : {0.05, 0.1}) {
            long bad = 0;
            for (double x : n2) bad += std::abs(x - 1.0) > eps;
            const double bound = 2.0 * std::exp(-eps * eps * double(dim) / 6.0);
            CHECK(double(bad) / 10000.0 <= bound);
        }
    }
}

TEST_CASE("haar states") {
    Rng rng(3);
    CHECK(std::abs(std::abs(haar_state(1, rng).coefficients()[0]) - 1.0) < 1e-15);

    // Squared fidelity against a fixed state follows Beta(1, D-1).
    const long d = 50;
    const CVector chi = haar_state(d, rng).coefficients();
    std::vector<double> f2;
    for (int i = 0; i < 100000; ++i) f2.push_back(std::norm(chi.dot(haar_state(d, rng).coefficients())));
    const double ks = oracle::ks_statistic(f2, [&](double x) { return 1.0 - std::pow(1.0 - x, double(d - 1)); });
    CHECK(ks < 0.01);

    std::vector<double> ov;
    const CVector chi100 = haar_state(100, rng).coefficients();
    for (int i = 0; i < 10000; ++i) ov.push_back(std::norm(chi100.dot(haar_state(100, rng).coefficients())));
    CHECK(std::abs(oracle::mean(ov) * 100.0 - 1.0) < 0.05);
}

namespace {
double mean_offdiag_sq(const GramMatrix& g) {
    double s = 0.0;
    const long n = g.size();
    for (long j = 0; j < n; ++j)
        for (long i = 0; i < n; ++i)
            if (i != j) s += std::norm(g.entries(i, j));
    return s / double(n * (n - 1));
}
}  // namespace

TEST_CASE("permutation family") {
    StateFamily f = permutation_family(400, 200, 11);
    CHECK(f.provenance == Provenance::Permutation);
    const double n0 = f.states.col(0).squaredNorm();
    for (long j = 0; j < f.count(); ++j) CHECK(std::abs(f.states.col(j).squaredNorm() - n0) < 1e-13);
    // Every member holds the same multiset of coefficients.
    RVector a = f.states.col(0).cwiseAbs(), b = f.states.col(57).cwiseAbs();
    std::sort(a.data(), a.data() + a.size());
    std::sort(b.data(), b.data() + b.size());
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(mean_offdiag_sq(gram_matrix(f)) * 400.0 - 1.0) < 0.2);

    StateFamily again = permutation_family(400, 200, 11);
    CHECK((again.states - f.states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pi digits") {
    // Leading hex digits of the fractional part of pi.
    const char* hex = "243F6A8885A308D313198A2E03707344A4093822299F31D008";
    for (int i = 0; hex[i]; ++i) {
        const int want = hex[i] <= '9' ? hex[i] - '0' : hex[i] - 'A' + 10;
        CHECK(pi_hex_digit(std::uint64_t(i)) == want);
    }
    // Bulk bits agree with the digit extractor far into the expansion.
    const auto bulk = pi_bits(0, 400000);
    for (std::uint64_t pos : {0ULL, 1ULL, 4ULL, 1001ULL, 77777ULL, 123456ULL, 399999ULL}) {
        DigitStream s = DigitStream::pi();
        CHECK(s.bit_at(pos) == bulk[pos]);
    }
    DigitStream s = DigitStream::pi();
    s.seek(1000);
    const auto chunk = s.take(64);
    CHECK(s.cursor() == 1064);
    for (int i = 0; i < 64; ++i) CHECK(chunk[std::size_t(i)] == bulk[1000 + std::size_t(i)]);
}

TEST_CASE("sign family") {
    DigitStream s = DigitStream::pi();
    StateFamily f = sign_family(400, 200, s);
    CHECK(s.cursor() == 80000);
    CHECK((f.states.cwiseAbs().array() - 1.0 / 20.0).abs().maxCoeff() < 1e-15);
    GramMatrix g = gram_matrix(f);
    CHECK(g.entries.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(mean_offdiag_sq(g) * 400.0 - 1.0) < 0.2);
    // Member j reads bits j·dim + x.
    DigitStream probe = DigitStream::pi();
    CHECK((f.states(3, 2).real() < 0) == (probe.bit_at(2 * 400 + 3) == 1));

    DigitStream p1 = DigitStream::prng(5), p2 = DigitStream::prng(5);
    CHECK((sign_family(30, 10, p1).states - sign_family(30, 10, p2).states).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sign family stream underflow") {
    const std::string path = "/tmp/decohist_bits_test.txt";
    {
        std::ofstream out(path);
        out << "0110 1001\n11";
    }
    DigitStream s = DigitStream::from_file(path);
    CHECK(s.available() == 10);
    StateFamily f = sign_family(5, 2, s);
    CHECK(f.states(1, 0).real() < 0);
    CHECK(f.states(0, 1).real() > 0);
    CHECK(f.states(2, 1).real() < 0);
    CHECK_THROWS_AS(sign_family(2, 1, s), Error);
    std::remove(path.c_str());
}

TEST_CASE("mutually unbiased bases") {
    const long p = 7;
    StateFamily f = mub_family(p, p * (p + 1), 2);
    // Recover (basis, index) by testing against the construction.
    CMatrix all(p, p * (p + 1));
    for (long k = 0; k <= p; ++k)
        for (long j = 0; j < p; ++j) all.col(k * p + j) = mub_state(p, k, j);
    const CMatrix g = all.adjoint() * all;
    for (long a = 0; a < g.rows(); ++a)
        for (long b = 0; b < g.cols(); ++b) {
            const double v = std::abs(g(a, b));
            if (a == b) CHECK(std::abs(v - 1.0) < 1e-10);
            else if (a / p == b / p) CHECK(v < 1e-10);
            else CHECK(std::abs(v - 1.0 / std::sqrt(double(p))) < 1e-10);
        }
    // The drawn family is a permutation of the full design.
    const CMatrix cross = all.adjoint() * f.states;
    for (long j = 0; j < f.count(); ++j) CHECK(std::abs(cross.col(j).cwiseAbs().maxCoeff() - 1.0) < 1e-10);

    StateFamily two = mub_family(2, 6, 1);
    const CMatrix g2 = two.states.adjoint() * two.states;
    int orth = 0;
    for (long a = 0; a < 6; ++a)
        for (long b = a + 1; b < 6; ++b) orth += std::abs(g2(a, b)) < 1e-12;
    CHECK(orth == 3);

    CHECK_NOTHROW(mub_family(499, 10, 1));
    try {
        mub_family(499, 499 * 500 + 1, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ExhaustedDesign);
    }
    try {
        mub_family(500, 10, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InvalidDimension);
    }
    StateFamily m = mub_family(101, 80, 9);
    const double mean_sq = [&] {
        GramMatrix gm = gram_matrix(m);
        double s = 0.0;
        for (long j = 0; j < 80; ++j)
            for (long i = 0; i < 80; ++i)
                if (i != j) s += std::norm(gm.entries(i, j));
        return s / (80.0 * 79.0);
    }();
    CHECK(std::abs(mean_sq * 101.0 - 1.0) < 0.2);
}

TEST_CASE("dirichlet weights") {
    Rng rng(5);
    CHECK(dirichlet_weights(1, rng).weights[0] == doctest::Approx(1.0).epsilon(1e-15));
    const int n = 10, samples = 20000;
    std::vector<double> w0, w01;
    for (int s = 0; s < samples; ++s) {
        RVector w = dirichlet_weights(n, rng).weights;
        CHECK(std::abs(w.sum() - 1.0) < 1e-10);
        w0.push_back(w[0]);
        w01.push_back(w[0] * w[1]);
    }
    CHECK(std::abs(oracle::mean(w0) - 0.1) < 3.0 * oracle::stddev(w0) / std::sqrt(double(samples)));
    CHECK(std::abs(oracle::mean(w01) - 1.0 / 110.0) < 3.0 * oracle::stddev(w01) / std::sqrt(double(samples)));
}

TEST_CASE("gram matrices") {
    CMatrix basis = CMatrix::Identity(4, 3);
    CHECK((gram_matrix(basis).entries - CMatrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

    CMatrix two(2, 2);
    two << 1.0, 0.6, 0.0, 0.8;
    GramMatrix g = gram_matrix(two);
    const cplx det = g.entries(0, 0) * g.entries(1, 1) - g.entries(0, 1) * g.entries(1, 0);
    CHECK(std::abs(det - 0.64) < 1e-14);

    StateFamily f = haar_family(30, 40, 3);
    GramMatrix gf = gram_matrix(f);
    CHECK(std::abs(gf.entries.trace().real() - 40.0) < 1e-12);
    CHECK((gf.entries - gf.entries.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(eigvalsh(gf.entries).minCoeff() >= -1e-8);
    for (StateFamily fam : {permutation_family(30, 40, 1), mub_family(31, 40, 1)})
        CHECK(eigvalsh(gram_matrix(fam).entries).minCoeff() >= -1e-8);
}

TEST_CASE("wishart samples") {
    Rng rng(8);
    double acc = 0.0;
    for (int i = 0; i < 10000; ++i) acc += wishart_sample(1, 7, rng).entries(0, 0).real();
    CHECK(std::abs(acc / 10000.0 - 1.0) < 0.05);

    GramMatrix w = wishart_sample(500, 1000, rng);
    RVector ev = eigvalsh(w.entries);
    std::vector<double> xs(ev.data(), ev.data() + ev.size());
    CHECK(oracle::ks_statistic(xs, [](double x) { return oracle::mp_cdf(x, 0.5); }) < 0.02);

    RVector sq = eigvalsh(wishart_sample(400, 400, rng).entries);
    CHECK(sq.minCoeff() >= 0.0);
    CHECK(sq.maxCoeff() < 4.2);
    CHECK(sq.maxCoeff() > 3.6);
}
