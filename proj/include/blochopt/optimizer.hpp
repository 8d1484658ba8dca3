#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "blochopt/encoding.hpp"
#include "blochopt/qsim.hpp"

namespace blochopt::optim {

/// Continuous minimization target. `objective` must accept any x inside the
/// domains; non-finite returns are treated as +infinity by the solver.
/// `gradient` is optional metadata for callers; the solver differentiates in
/// circuit-parameter space and never calls it.
struct ContinuousProblem {
    std::function<double(const Eigen::VectorXd&)> objective;
    int n_vars = 0;
    std::vector<encoding::VariableDomain> domains;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};

enum class Method { gradient_descent, conjugate_gradient, derivative_free };

/// exact = true reads Bloch vectors from the density matrix; otherwise each
/// reading is estimated from `shots` simulated measurements per axis.
struct Tomography {
    bool exact = true;
    long shots = 0;
};

struct OptimizerConfig {
    encoding::Mode mode = encoding::Mode::pure;
    int layers = 3;
    Method method = Method::gradient_descent;
    double learning_rate = 0.1;
    int max_iters = 2000;
    double grad_eps = 1e-5;
    double grad_eps_shots = 1e-2;  // replaces grad_eps when sampling shots
    double tol_f = 1e-9;
    double tol_g = 1e-6;
    int restarts = 4;  // additional runs beyond the first
    std::uint64_t seed = 0;
    Tomography tomography;

    int n_qubits_override = 0;  // 0 derives the register from capacity
    /// When set, the first run starts from near-equatorial angles pre-fitted
    /// so the decoded variables approximate this point; remaining restarts
    /// draw random angles as usual.
    std::optional<Eigen::VectorXd> warm_start_x;
    /// Escalating random perturbations allowed per run when line searches
    /// stop making progress. 0 disables kicks.
    int stall_kicks = 6;
};

struct OptimizationResult {
    Eigen::VectorXd best_x;
    double best_f = 0.0;
    Eigen::VectorXd best_omega;
    int iterations = 0;
    std::vector<std::pair<int, double>> trace;  // (iteration, f) of the best run
    bool converged = false;
    int restarts_used = 0;
};

/// One forward pass: circuit at `omega`, per-qubit tomography, decode, f(x).
/// Non-finite objective values come back as +infinity. `rng` is consumed only
/// when tomography samples shots; exact mode accepts rng = nullptr.
std::pair<Eigen::VectorXd, double> evaluate(
    const Eigen::VectorXd& omega, const qsim::Ansatz& ansatz,
    const encoding::EncodingMap& map, const ContinuousProblem& problem,
    const Tomography& tomography = {}, std::mt19937_64* rng = nullptr);

/// Central-difference gradient of f(x(omega)) in circuit-parameter space.
/// Coordinates whose stencil hits a non-finite value contribute 0.
Eigen::VectorXd omega_gradient(const Eigen::VectorXd& omega,
                               const qsim::Ansatz& ansatz,
                               const encoding::EncodingMap& map,
                               const ContinuousProblem& problem, double eps,
                               const Tomography& tomography = {},
                               std::mt19937_64* rng = nullptr);

/// Full multi-restart minimization. Convergence means either |f drop| < tol_f
/// on 10 consecutive accepted steps or gradient norm < tol_g; runs that stop
/// any other way report converged = false. Same problem, config and seed
/// reproduce the result bit for bit.
OptimizationResult minimize(const ContinuousProblem& problem,
                            const OptimizerConfig& config);

}  // namespace blochopt::optim
