#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "decohist/ensembles.hpp"
#include "decohist/types.hpp"

namespace decohist {

enum class DiagonalLayout { EvenlySpaced, UniformRandom };

struct ModelOptions {
    long d1 = 0;               // 0 means 2·D0
    double delta_eps = 0.5;
    double lambda = -1.0;      // negative means δε/(15√D)
    DiagonalLayout diagonal = DiagonalLayout::EvenlySpaced;
    bool conserved = false;    // zero coupling, [Π_x, H] = 0
};

// Block Hamiltonian H = [[H00, λR], [λRᵀ, H11]] with R ∈ {±1}^{D0×D1}. H is
// real symmetric so the eigenvectors are stored as a real matrix.
struct ModelSpec {
    long d0 = 0, d1 = 0;
    double delta_eps = 0.0;
    double lambda = 0.0;
    std::uint64_t seed = 0;
    DiagonalLayout diagonal = DiagonalLayout::EvenlySpaced;
    RVector diag;                                        // length D
    Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> signs;  // D0×D1
    RVector energies;
    RMatrix eigenvectors;

    long dim() const { return d0 + d1; }
    long offset(int x) const { return x == 0 ? 0 : d0; }
    long block_dim(int x) const { return x == 0 ? d0 : d1; }
    RMatrix hamiltonian() const;
};

ModelSpec build_model(long d0, std::uint64_t seed, const ModelOptions& opts = {});
// Builds H without diagonalizing; used by checkpoint loading.
ModelSpec model_skeleton(long d0, std::uint64_t seed, const ModelOptions& opts = {});
void diagonalize(ModelSpec& model);

double tau(const ModelSpec& model);
// "eq" → 8τ, "neq" → τ/2, otherwise a number.
double resolve_dt(const ModelSpec& model, std::string_view preset);

class Propagator {
public:
    Propagator(const ModelSpec& model, double dt);

    double dt() const { return dt_; }
    const ModelSpec& model() const { return *model_; }
    CVector apply(const CVector& psi) const;
    CMatrix apply(const CMatrix& psi) const;
    // Dense U(dt), built on first use.
    const CMatrix& dense() const;
    // U restricted to target block b and source block a.
    auto block(int b, int a) const {
        const CMatrix& u = dense();
        return u.block(model_->offset(b), model_->offset(a), model_->block_dim(b), model_->block_dim(a));
    }

private:
    const ModelSpec* model_;
    double dt_;
    mutable CMatrix dense_;
};

CVector evolve(const ModelSpec& model, const CVector& psi, double t);

enum class InitialKind { HaarInH1, RandomEigenstate, HaarFull };
InitialKind parse_initial_kind(std::string_view s);
CVector initial_state(const ModelSpec& model, InitialKind kind, std::uint64_t seed);

struct ExpectationTable {
    std::vector<double> times, p0, p1;
};
ExpectationTable evolve_expectations(const ModelSpec& model, const CVector& psi0,
                                     const std::vector<double>& times);

struct HistoryLabel {
    std::vector<std::uint8_t> bits;  // x_1 … x_L

    std::size_t length() const { return bits.size(); }
    int ones() const;
    int final_bit() const { return bits.back(); }
    std::string str() const;  // written x_L … x_1
    bool operator==(const HistoryLabel& o) const { return bits == o.bits; }
};

enum class SetProvenance { FullTree, StratifiedSample };

struct HistorySet {
    std::vector<HistoryLabel> labels;
    long l_max = 0;
    SetProvenance provenance = SetProvenance::FullTree;
    std::uint64_t seed = 0;
    bool final_fixed = true;  // full tree only: x_L = 0 for every label
};

// All 2^{L-1} labels ending in 0, or all 2^L when final_fixed is false.
HistorySet full_tree(long length, bool final_fixed = true);
HistorySet sample_history_set(long l_max, long count, std::uint64_t seed);
// Cut to the first L−1 bits and set x_L = 0; duplicates keep first occurrence.
HistorySet truncate(const HistorySet& set, long length);

constexpr double kNullWeight = 1e-24;
// kNullWeight relative to the mean full-tree branch weight 2^{-(L-1)}.
inline double null_threshold(std::size_t length) {
    return std::ldexp(kNullWeight, -static_cast<int>(length > 0 ? length - 1 : 0));
}

struct BranchStates {
    std::vector<HistoryLabel> labels;
    CMatrix states;  // unnormalized, one column per label
    RVector weights;
    std::vector<bool> null;
    double telescoping_residual = -1.0;  // full trees only

    Eigen::Index count() const { return states.cols(); }
    CVector normalized(Eigen::Index i) const;
    std::vector<Eigen::Index> non_null() const;
    BranchStates select(const std::vector<Eigen::Index>& idx) const;
};

// Shared prefixes are propagated once, level by level, batched per subspace.
BranchStates branch_states(const Propagator& u, const CVector& psi0, const HistorySet& set);

GramMatrix ndf(const BranchStates& branches);
bool dhc_check(const GramMatrix& g, double tol);

// Small dense history problems: step unitaries W_1 … W_L and a projective
// coarse-graining applied after every step.
struct DenseHistoryProblem {
    std::vector<CMatrix> steps;
    std::vector<CMatrix> projectors;
    CVector psi0;
};

CVector history_state(const DenseHistoryProblem& p, const std::vector<int>& label);
CVector final_state(const DenseHistoryProblem& p);
// Max-entry norm of [P_j(x), P_k(x')] over j ≠ k, with P_j(x) the Heisenberg
// projector at the final time.
double max_commutator(const DenseHistoryProblem& p);
bool commutativity_check(const DenseHistoryProblem& p, double tol);

DenseHistoryProblem model_problem(const ModelSpec& model, double dt, long length, const CVector& psi0);
bool commutativity_check(const ModelSpec& model, double dt, long length, double tol);

struct DilationModel {
    long system_dim = 0, m = 0, length = 0;
    CMatrix system_unitary;
    std::vector<CMatrix> system_projectors;
    CVector system_psi0;
    DenseHistoryProblem problem;  // composite system ⊗ ancillas
};

constexpr long kDilationCap = 1 << 14;

DilationModel dilation_model(long system_dim, long m, long length, std::uint64_t seed,
                             bool commuting_unitary = false);
CVector system_history_state(const DilationModel& d, const std::vector<int>& label);
// ⟨x|_A Ψ_L as a system vector.
CVector record_component(const DilationModel& d, const CVector& composite, const std::vector<int>& label);

}  // namespace decohist
