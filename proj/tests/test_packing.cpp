#include <doctest.h>

#include <cmath>

#include "decohist/packing.hpp"
#include "decohist/types.hpp"

using namespace decohist;

TEST_CASE("lower bounds") {
    PackingBound zero = lower_bounds(10, 0.0);
    CHECK(zero.geometric_exact == 1.0);
    CHECK(std::abs(lower_bounds(101, 0.3).geometric_approx - std::exp(9.0)) < 1e-9);
    CHECK(std::abs(std::exp(9.0) - 8103.08) < 0.01);

    const long d = 80;
    for (int k = 1; k < 40; ++k) {
        const double eps = 0.02 * k;
        PackingBound b = lower_bounds(d, eps);
        CHECK(b.geometric_exact >= 1.0);
        CHECK(b.probabilistic >= 1.0);
        const bool looser = b.probabilistic <= b.geometric_approx;
        CHECK(looser == (eps * eps >= std::log(2.0) / double(d - 1)));
        const double direct = std::pow(std::sin(std::acos(eps)), -(2.0 * d - 2.0));
        CHECK(std::abs(b.geometric_exact / direct - 1.0) < 1e-10);
        if (eps <= 0.3) CHECK(b.geometric_exact >= 0.9 * b.geometric_approx);
    }
    for (long dim : {50L, 200L})
        for (double eps : {0.05, 0.1, 0.2}) CHECK(lower_bounds(dim, eps).geometric_exact >= std::exp((dim - 1) * eps * eps));
    CHECK_THROWS_AS(lower_bounds(10, 1.0), Error);
    CHECK_THROWS_AS(lower_bounds(1, 0.1), Error);
}

TEST_CASE("greedy packing") {
    CHECK(greedy_pack(4, 0.0, 500, 1).achieved <= 4);

    PackingResult big = greedy_pack(30, 0.5, 100000, 2);
    CHECK(big.achieved >= long(std::ceil(std::sqrt(2.0) * std::exp(29 * 0.125))));
    CHECK(big.max_overlap <= 0.5 + 1e-12);

    long prev = 0;
    for (double eps : {0.2, 0.4, 0.6, 0.8}) {
        PackingResult r = greedy_pack(6, eps, 3000, 9);
        CHECK(r.achieved >= prev);
        CHECK(r.max_overlap <= eps + 1e-12);
        prev = r.achieved;
    }
}
