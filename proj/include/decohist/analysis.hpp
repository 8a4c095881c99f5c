#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "decohist/model.hpp"
#include "decohist/types.hpp"

namespace decohist {

struct DecoherenceSummary {
    double g_bar = 0.0;
    double g_max = 0.0;
    long n = 0;
};
DecoherenceSummary decoherence_summary(const GramMatrix& g);

struct ScalingFit {
    double alpha = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
ScalingFit scaling_fit(const std::vector<double>& dims, const std::vector<double>& values);

double localization(const StateVector& state);
double localization(const CVector& normalized);

// Purity of the Petz-recovered initial state for one Kraus string.
double petz_purity(const Propagator& u, const HistoryLabel& label);
// Same for many labels; labels are visited in lexicographic order so shared
// prefixes are propagated once.
std::vector<double> petz_purities(const Propagator& u, const std::vector<HistoryLabel>& labels);
constexpr std::size_t kPetzMemoryCap = std::size_t(3) << 30;

int hamming(const HistoryLabel& a, const HistoryLabel& b);

struct BinRow {
    double center = 0.0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    long count = 0;
};
std::vector<BinRow> binned_correlation(const std::vector<double>& xs, const std::vector<double>& ys,
                                       int bins, bool log_x);

struct NProfile {
    std::vector<long> counts;
    std::vector<double> mean_localization;
    std::vector<double> mean_purity;
    std::vector<double> q;         // summed weight of the labels present
    std::vector<double> q_sector;  // C(L−1, n) · mean weight: full-sector estimate
    double n_bar = 0.0;
};
NProfile n_profile(const BranchStates& branches, const std::vector<double>* purity = nullptr);

struct NnHeatmap {
    RMatrix g_bar;
    RMatrix g_max;
};
NnHeatmap heatmap_nn(const GramMatrix& g, const std::vector<HistoryLabel>& labels);

struct InhomogeneousFamily {
    CMatrix states;  // unnormalized |ψ'(n)⟩, n = 0 … L
    RVector weights;
    CMatrix normalized() const;  // zero columns for empty sectors
};
InhomogeneousFamily inhomogeneous_states(const BranchStates& full_tree_both, long length);
// Same family by the recursion over the number of ones, without the tree.
InhomogeneousFamily inhomogeneous_sweep(const Propagator& u, const CVector& psi0, long length);
// G_max(n) = max over n' ≠ n of |G(n, n')| among non-empty sectors.
std::vector<double> g_max_by_n(const InhomogeneousFamily& family);

// T(x', x), columns sum to one.
Eigen::Matrix2d markov_transition(const Propagator& u, long samples, std::uint64_t seed);
std::vector<double> markov_distribution(const Eigen::Matrix2d& t, long length, const Eigen::Vector2d& p0,
                                        double* max_conservation_error = nullptr);
std::vector<double> bernoulli_distribution(long length, double p);
Eigen::Vector2d stationary_distribution(const Eigen::Matrix2d& t);

double total_variation(const std::vector<double>& p, const std::vector<double>& q,
                       const std::vector<bool>& window);

double inverse_snr(const GramMatrix& g);

enum class Extreme { Lowest, Highest };
std::vector<Eigen::Index> subset_filter(const std::vector<double>& values, double fraction, Extreme direction);
GramMatrix restrict_gram(const GramMatrix& g, const std::vector<Eigen::Index>& idx);

}  // namespace decohist
