#pragma once

#include <functional>
#include <vector>

#include "decohist/ensembles.hpp"
#include "decohist/types.hpp"

namespace decohist {

class MpLaw {
public:
    explicit MpLaw(double gamma);
    double gamma() const { return gamma_; }
    double lambda_minus() const { return lm_; }
    double lambda_plus() const { return lp_; }

private:
    double gamma_, lm_, lp_;
};

double mp_density(double lambda, const MpLaw& law);
double mp_expectation(const std::function<double(double)>& f, const MpLaw& law, double tol = 1e-8);

// μ_sqrt(γ) and μ_ln(γ).
double mu_sqrt(double gamma);
double mu_ln(double gamma);

struct SpectralFit {
    double d_eff = 0.0;
    double gamma_eff = 0.0;
    double residual = 0.0;
};

struct MpFitOptions {
    int bins = 40;
    int grid_points = 200;
    double grid_lo_factor = 0.25;
    double grid_hi_factor = 50.0;
};

SpectralFit mp_fit(const RVector& eigenvalues, const MpFitOptions& opts = {});

std::vector<double> bridge_process(const CMatrix& unitary_columns, const StateVector& probe);

}  // namespace decohist
