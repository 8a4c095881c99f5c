#pragma once

#include "decohist/ensembles.hpp"
#include "decohist/linalg.hpp"
#include "decohist/types.hpp"

namespace decohist {

struct SqrtMeasurement {
    CMatrix record_coefficients;  // G^{-1/2}
    CMatrix sqrt_gram;            // G^{1/2}
    RVector eigenvalues;
};

SqrtMeasurement sqrt_measurement(const GramMatrix& g);

// G^{1/2} only. Accepts singular positive semidefinite input.
CMatrix sqrt_gram(const GramMatrix& g);

double average_success(const GramMatrix& g, const WeightVector& q);
double average_success_from_sqrt(const CMatrix& sqrt_g, const WeightVector& q);

struct UnambiguousBounds {
    double p_un = 0.0;
    double det_root = 0.0;
};
UnambiguousBounds unambiguous_bounds(const GramMatrix& g);
UnambiguousBounds unambiguous_bounds_from_spectrum(const RVector& eigenvalues);

struct PlaneRotation {
    CVector u1, u2;
    double angle = 0.0;  // arccos F
};

struct SlpSolution {
    double fidelity = 0.0;
    double overlap_t = 0.0;
    PlaneRotation rotation;
    double success_qsd = 0.0;
    double success_slp = 0.0;
    double gap_bound = 0.0;
};

double slp_gap_bound(double fidelity, double success_qsd, double overlap_t);

SlpSolution slp_solve(const GramMatrix& g, const StateFamily& states, const StateVector& psi,
                      const WeightVector& q);

// Normalized Σ √q_j ψ_j, the global state the histories superpose to.
StateVector global_state(const StateFamily& states, const WeightVector& q);

struct JointTable {
    RMatrix q;     // q(i, j): history i, record j
    RVector row;   // q_i
    RVector col;   // q'_j
};

JointTable joint_table(const GramMatrix& g, const WeightVector& q);
JointTable joint_table_from_sqrt(const CMatrix& sqrt_g, const WeightVector& q);
JointTable joint_table_from_conditional(const RMatrix& conditional, const RVector& row);

double mutual_information(const JointTable& table);

double binary_entropy(double p);
double harmonic_number(long n);
double mi_mean_field(double p_s, long n);
double mi_fluct(double p_s, long n);

// Conditional μ_{j|i} for N > d, rows are histories.
RMatrix large_n_table(double p_s, long d, long n);
// Mean-field mutual information of the large-N table at q = 1/N, closed form.
double large_n_mean_field_mi(double p_s, long d, long n);
// Mean-field curve across both regimes with P_S = μ_sqrt(min(γ,1))².
double mean_field_mi_curve(long d, long n);

struct MiMaxEstimate {
    double beta = 0.0;
    double n_star = 0.0;
    double i_max = 0.0;
};
MiMaxEstimate mi_max_estimate(double k, double c = 0.28);

}  // namespace decohist
