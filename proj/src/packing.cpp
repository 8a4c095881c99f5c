#include "decohist/packing.hpp"

#include <cmath>

#include "decohist/ensembles.hpp"
#include "decohist/rng.hpp"

namespace decohist {

PackingBound lower_bounds(long dim, double epsilon) {
    require(dim >= 2, ErrorKind::InvalidDimension, "packing needs D >= 2");
    require(epsilon >= 0.0 && epsilon < 1.0, ErrorKind::Invalid, "epsilon must lie in [0,1)");
    PackingBound b;
    b.dim = dim;
    b.epsilon = epsilon;
    const double m = static_cast<double>(dim - 1), e2 = epsilon * epsilon;
    // sin(arccos ε)^{-(2D-2)} = (1 − ε²)^{-(D-1)}
    b.geometric_exact = std::exp(-m * std::log1p(-e2));
    b.geometric_approx = std::exp(m * e2);
    b.probabilistic = std::sqrt(2.0) * std::exp(m * e2 / 2.0);
    return b;
}

PackingResult greedy_pack(long dim, double epsilon, long budget, std::uint64_t seed) {
    require(budget >= 1, ErrorKind::Invalid, "budget must be positive");
    require(dim >= 1, ErrorKind::InvalidDimension, "dimension must be positive");
    Rng rng(seed);
    CMatrix kept(dim, 64);
    Eigen::Index k = 0;
    constexpr Eigen::Index kChunk = 256;
    for (long draw = 0; draw < budget; ++draw) {
        const CVector psi = haar_state(dim, rng).coefficients();
        bool ok = true;
        for (Eigen::Index start = 0; ok && start < k; start += kChunk) {
            const Eigen::Index len = std::min(kChunk, k - start);
            const CVector ov = kept.middleCols(start, len).adjoint() * psi;
            if (ov.cwiseAbs().maxCoeff() > epsilon) ok = false;
        }
        if (!ok) continue;
        if (k == kept.cols()) kept.conservativeResize(Eigen::NoChange, 2 * kept.cols());
        kept.col(k++) = psi;
    }
    PackingResult r;
    r.achieved = static_cast<long>(k);
    if (k >= 2) {
        CMatrix g = kept.leftCols(k).adjoint() * kept.leftCols(k);
        g.diagonal().setZero();
        r.max_overlap = g.cwiseAbs().maxCoeff();
    }
    return r;
}

}  // namespace decohist
