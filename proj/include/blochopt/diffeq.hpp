#pragma once

#include <functional>
#include <vector>

#include "blochopt/series.hpp"

namespace blochopt::diffeq {

/// Pins d^order f_func / dx^order at x to `value`.
struct BoundaryCondition {
    int func = 0;
    int order = 0;
    double x = 0.0;
    double value = 0.0;
};

/// General (possibly non-linear) system. residual(x, vals) returns one value
/// per equation, where vals(j, a) holds the a-th derivative of function j at
/// x, for a = 0..max_order. A solution drives every residual to zero on the
/// domain while meeting the boundary conditions.
struct OdeProblem {
    int n_funcs = 1;
    int n_equations = 0;  // 0 means n_funcs
    int max_order = 1;
    std::function<Eigen::VectorXd(double, const Eigen::MatrixXd&)> residual;
    encoding::VariableDomain domain;
    std::vector<BoundaryCondition> boundary;

    int equations() const { return n_equations > 0 ? n_equations : n_funcs; }
};

/// Linear system sum_terms coeff(x) * d^order f_func = rhs_eq(x). Coefficient
/// and rhs callables must be evaluable on the extended basis domain, not just
/// on the problem domain.
struct LinearTerm {
    int eq = 0;
    int func = 0;
    int order = 0;
    std::function<double(double)> coeff;
};

struct LinearOde {
    int n_funcs = 1;
    int max_order = 1;
    std::vector<LinearTerm> terms;
    std::vector<std::function<double(double)>> rhs;  // one per equation, null = 0
    encoding::VariableDomain domain;
    std::vector<BoundaryCondition> boundary;
};

/// Collocation adapter: evaluates the linear system pointwise so both solver
/// routes can be cross-checked on the same problem.
OdeProblem make_problem(const LinearOde& linear);

struct SpectralSolution {
    std::vector<series::TruncatedSeries> series;  // one per unknown function
    double residual_norm = 0.0;   // sqrt of the integrated squared residual
    double bc_violation = 0.0;    // max abs boundary defect
    double penalty = 0.0;         // boundary weight actually used
    std::vector<std::pair<int, double>> trace;
    bool converged = false;
};

/// Derivative of an exponential series (coefficientwise multiplication by
/// (i 2 pi l / P)^order). Trig series must be converted with to_exponential
/// first; custom bases cannot be differentiated here.
series::TruncatedSeries differentiate_series(const series::TruncatedSeries& s,
                                             int order);

/// Mesh-weighted residual norm of a candidate solution over the mesh points:
/// sqrt(sum_mu sum_j res_j(x_mu)^2 dx_mu). Boundary terms are not included.
double residual_norm(const OdeProblem& problem,
                     const std::vector<series::TruncatedSeries>& candidate,
                     const series::Mesh& mesh);

/// Largest absolute boundary-condition defect of a candidate solution.
double bc_violation(const OdeProblem& problem,
                    const std::vector<series::TruncatedSeries>& candidate);

struct CollocationOptions {
    /// Basis domain = problem domain scaled about its midpoint by this factor,
    /// so the fit is not forced to be periodic over the problem domain itself.
    double extension = 2.5;
    double penalty = 0.0;      // 0 = 1000 * mesh-average |residual| of the guess
    double coeff_bound = 0.0;  // 0 = 8 * max(1, max |bc value|)
    int continuation_stages = 3;  // boundary weight ramps penalty/100 -> penalty
};

/// Minimizes sum_mu sum_j res_j(x_mu)^2 dx_mu + penalty * sum_bc defect^2 over
/// conjugate-symmetric Fourier coefficients (K modes per function, basis on
/// the extended domain) through the circuit optimizer. The boundary weight is
/// ramped up in `continuation_stages` stages; each stage warm-starts from the
/// previous one, and the first stage warm-starts from the flat guess
/// c_0 = mean of the function's order-0 boundary values.
SpectralSolution solve_collocation(const OdeProblem& problem, int K,
                                   const series::Mesh& mesh,
                                   const CollocationOptions& options,
                                   const optim::OptimizerConfig& config);

struct LinearSpectralOptions {
    double extension = 2.5;
    double penalty = 0.0;  // same default rule as collocation
    double cond_threshold = 1e10;
};

/// Spectral route for linear systems: coefficient functions and right-hand
/// sides are themselves fitted as Fourier series on the extended domain, the
/// products become coefficient convolutions truncated to the solution band,
/// and the integrated squared residual over the problem domain (a Gram-matrix
/// quadratic in the unknown coefficients) plus the boundary penalty is
/// minimized in closed form through the series machinery.
SpectralSolution solve_linear_spectral(const LinearOde& linear, int K,
                                       const series::Mesh& mesh,
                                       const LinearSpectralOptions& options);

}  // namespace blochopt::diffeq
