#include "blochopt/diffeq.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace blochopt::diffeq {

namespace {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

encoding::VariableDomain extended_domain(const encoding::VariableDomain& d,
                                         double extension) {
    if (!(extension >= 1.0))
        throw ContractViolation("extended domain: extension factor below 1");
    const double mid = 0.5 * (d.lo + d.hi);
    const double half = 0.5 * (d.hi - d.lo) * extension;
    return {mid - half, mid + half, false};
}

int equation_count(const LinearOde& linear) {
    int n_eq = int(linear.rhs.size());
    for (const LinearTerm& t : linear.terms) n_eq = std::max(n_eq, t.eq + 1);
    return n_eq;
}

void validate_boundary(const std::vector<BoundaryCondition>& boundary,
                       int n_funcs, int max_order,
                       const encoding::VariableDomain& domain) {
    for (const BoundaryCondition& bc : boundary) {
        if (bc.func < 0 || bc.func >= n_funcs)
            throw ContractViolation("boundary condition names a missing function");
        if (bc.order < 0 || bc.order > max_order)
            throw ContractViolation("boundary condition order out of range");
        if (bc.x < domain.lo - 1e-12 || bc.x > domain.hi + 1e-12)
            throw ContractViolation("boundary condition point outside the domain");
    }
}

// (i w_l)^order for the basis mode at coefficient index idx.
cd derivative_factor(const series::BasisSpec& basis, int idx, int order) {
    const double w = 2.0 * kPi * basis.mode_of(idx) / basis.period();
    cd factor(1.0, 0.0);
    for (int k = 0; k < order; ++k) factor *= cd(0.0, w);
    return factor;
}

// Rows: mesh points, cols: coefficient indices; entry (i w_l)^order e^{i w_l x}.
Eigen::MatrixXcd derivative_design(const series::BasisSpec& basis,
                                   const Eigen::VectorXd& points, int order) {
    const int M = int(points.size());
    const int n = basis.n_coeffs();
    Eigen::MatrixXcd E(M, n);
    for (int idx = 0; idx < n; ++idx) {
        const cd factor = derivative_factor(basis, idx, order);
        for (int mu = 0; mu < M; ++mu)
            E(mu, idx) = factor * basis.eval_basis(idx, points[mu]);
    }
    return E;
}

struct SymmetricLayout {
    int n_funcs = 0;
    int dof_per_func = 0;  // 2 * (K/2) + 1

    int total() const { return n_funcs * dof_per_func; }
    Eigen::VectorXcd coeffs_of(const Eigen::VectorXd& u, int func) const {
        return series::coeffs_from_symmetric_dof(
            u.segment(func * dof_per_func, dof_per_func));
    }
};

std::vector<series::TruncatedSeries> dof_to_series(
    const Eigen::VectorXd& u, const SymmetricLayout& layout,
    const series::BasisSpec& basis, double residual) {
    std::vector<series::TruncatedSeries> out(layout.n_funcs);
    for (int j = 0; j < layout.n_funcs; ++j) {
        out[j].basis = basis;
        out[j].coeffs = layout.coeffs_of(u, j);
        out[j].residual_norm = residual;
    }
    return out;
}

// Flat start: every coefficient zero except c_0 = mean of the function's
// plain-value boundary conditions.
Eigen::VectorXd initial_guess(const SymmetricLayout& layout,
                              const std::vector<BoundaryCondition>& boundary) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(layout.total());
    for (int j = 0; j < layout.n_funcs; ++j) {
        double sum = 0.0;
        int count = 0;
        for (const BoundaryCondition& bc : boundary)
            if (bc.func == j && bc.order == 0) {
                sum += bc.value;
                ++count;
            }
        if (count > 0) u[j * layout.dof_per_func] = sum / count;
    }
    return u;
}

// DOF -> coefficient map as an explicit complex matrix (needed to express the
// linear route's quadratic in real variables).
Eigen::MatrixXcd symmetric_dof_matrix(int dof_per_func) {
    const int m = dof_per_func / 2;
    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(dof_per_func, dof_per_func);
    S(m, 0) = cd(1.0, 0.0);
    for (int l = 1; l <= m; ++l) {
        S(m + l, 2 * l - 1) = cd(1.0, 0.0);
        S(m - l, 2 * l - 1) = cd(1.0, 0.0);
        S(m + l, 2 * l) = cd(0.0, 1.0);
        S(m - l, 2 * l) = cd(0.0, -1.0);
    }
    return S;
}

}  // namespace

series::TruncatedSeries differentiate_series(const series::TruncatedSeries& s,
                                             int order) {
    if (order < 0) throw ContractViolation("differentiate_series: order < 0");
    if (s.basis.kind == series::BasisKind::fourier_trig)
        throw ContractViolation(
            "differentiate_series: convert trig series with to_exponential first");
    if (s.basis.kind == series::BasisKind::custom)
        throw ContractViolation("differentiate_series: custom bases unsupported");
    series::TruncatedSeries out = s;
    for (int idx = 0; idx < s.basis.n_coeffs(); ++idx)
        out.coeffs[idx] *= derivative_factor(s.basis, idx, order);
    return out;
}

OdeProblem make_problem(const LinearOde& linear) {
    const int n_eq = equation_count(linear);
    if (n_eq < 1) throw ContractViolation("make_problem: empty system");
    for (const LinearTerm& t : linear.terms) {
        if (t.func < 0 || t.func >= linear.n_funcs)
            throw ContractViolation("make_problem: term names a missing function");
        if (t.order < 0 || t.order > linear.max_order)
            throw ContractViolation("make_problem: term order out of range");
    }
    OdeProblem problem;
    problem.n_funcs = linear.n_funcs;
    problem.n_equations = n_eq;
    problem.max_order = linear.max_order;
    problem.domain = linear.domain;
    problem.boundary = linear.boundary;
    problem.residual = [terms = linear.terms, rhs = linear.rhs,
                        n_eq](double x, const Eigen::MatrixXd& vals) {
        Eigen::VectorXd r = Eigen::VectorXd::Zero(n_eq);
        for (int eq = 0; eq < int(rhs.size()); ++eq)
            if (rhs[eq]) r[eq] -= rhs[eq](x);
        for (const LinearTerm& t : terms) {
            const double a = t.coeff ? t.coeff(x) : 1.0;
            r[t.eq] += a * vals(t.func, t.order);
        }
        return r;
    };
    return problem;
}

double residual_norm(const OdeProblem& problem,
                     const std::vector<series::TruncatedSeries>& candidate,
                     const series::Mesh& mesh) {
    if (int(candidate.size()) != problem.n_funcs)
        throw ContractViolation("residual_norm: need one series per function");
    const int M = int(mesh.points.size());
    const int A = problem.max_order;
    std::vector<std::vector<series::TruncatedSeries>> deriv(problem.n_funcs);
    for (int j = 0; j < problem.n_funcs; ++j) {
        deriv[j].push_back(series::to_exponential(candidate[j]));
        for (int a = 1; a <= A; ++a)
            deriv[j].push_back(differentiate_series(deriv[j][0], a));
    }
    double acc = 0.0;
    Eigen::MatrixXd vals(problem.n_funcs, A + 1);
    for (int mu = 0; mu < M; ++mu) {
        const double x = mesh.points[mu];
        for (int j = 0; j < problem.n_funcs; ++j)
            for (int a = 0; a <= A; ++a)
                vals(j, a) = series::evaluate_series(deriv[j][a], x);
        acc += problem.residual(x, vals).squaredNorm() * mesh.deltas[mu];
    }
    return std::sqrt(acc);
}

double bc_violation(const OdeProblem& problem,
                    const std::vector<series::TruncatedSeries>& candidate) {
    if (int(candidate.size()) != problem.n_funcs)
        throw ContractViolation("bc_violation: need one series per function");
    double worst = 0.0;
    for (const BoundaryCondition& bc : problem.boundary) {
        const series::TruncatedSeries es =
            series::to_exponential(candidate[bc.func]);
        const series::TruncatedSeries ds = differentiate_series(es, bc.order);
        worst = std::max(worst,
                         std::abs(series::evaluate_series(ds, bc.x) - bc.value));
    }
    return worst;
}

SpectralSolution solve_collocation(const OdeProblem& problem, int K,
                                   const series::Mesh& mesh,
                                   const CollocationOptions& options,
                                   const optim::OptimizerConfig& config) {
    if (!problem.residual)
        throw ContractViolation("solve_collocation: no residual callable");
    if (problem.n_funcs < 1 || K < 1)
        throw ContractViolation("solve_collocation: bad problem shape");
    validate_boundary(problem.boundary, problem.n_funcs, problem.max_order,
                      problem.domain);
    if (options.continuation_stages < 1)
        throw ContractViolation("solve_collocation: need at least one stage");
    const double span = problem.domain.hi - problem.domain.lo;
    if (std::abs(mesh.deltas.sum() - span) > 1e-12 * std::max(1.0, span))
        throw ContractViolation("solve_collocation: mesh does not tile the domain");

    series::BasisSpec basis;
    basis.kind = series::BasisKind::fourier_exp;
    basis.K = K;
    basis.domain = extended_domain(problem.domain, options.extension);

    SymmetricLayout layout{problem.n_funcs, basis.n_coeffs()};
    const int M = int(mesh.points.size());
    const int A = problem.max_order;
    const int n_eq = problem.equations();

    std::vector<Eigen::MatrixXcd> design(A + 1);
    for (int a = 0; a <= A; ++a)
        design[a] = derivative_design(basis, mesh.points, a);

    // Mesh residual term plus the weighted boundary defects; `weight` is the
    // stage's boundary penalty.
    auto make_objective = [&](double weight) {
        return [&, weight](const Eigen::VectorXd& u) {
            Eigen::MatrixXd vals_all(M, layout.n_funcs * (A + 1));
            for (int j = 0; j < layout.n_funcs; ++j) {
                const Eigen::VectorXcd c = layout.coeffs_of(u, j);
                for (int a = 0; a <= A; ++a)
                    vals_all.col(j * (A + 1) + a) = (design[a] * c).real();
            }
            double acc = 0.0;
            Eigen::MatrixXd vals(layout.n_funcs, A + 1);
            for (int mu = 0; mu < M; ++mu) {
                for (int j = 0; j < layout.n_funcs; ++j)
                    for (int a = 0; a <= A; ++a)
                        vals(j, a) = vals_all(mu, j * (A + 1) + a);
                const Eigen::VectorXd r = problem.residual(mesh.points[mu], vals);
                if (int(r.size()) != n_eq)
                    throw ContractViolation(
                        "solve_collocation: residual size changed between calls");
                acc += r.squaredNorm() * mesh.deltas[mu];
            }
            for (const BoundaryCondition& bc : problem.boundary) {
                const Eigen::VectorXcd c = layout.coeffs_of(u, bc.func);
                cd v(0.0, 0.0);
                for (int idx = 0; idx < basis.n_coeffs(); ++idx)
                    v += c[idx] * derivative_factor(basis, idx, bc.order) *
                         basis.eval_basis(idx, bc.x);
                acc += weight * (v.real() - bc.value) * (v.real() - bc.value);
            }
            return acc;
        };
    };

    const Eigen::VectorXd u0 = initial_guess(layout, problem.boundary);

    double penalty = options.penalty;
    if (penalty <= 0.0) {
        // Scale off the flat guess so the ramp target tracks the problem size.
        const auto base = make_objective(0.0);
        const double mean_sq = base(u0) / (problem.domain.hi - problem.domain.lo);
        penalty = 1000.0 * std::max(1.0, std::sqrt(mean_sq));
    }

    double bound = options.coeff_bound;
    if (bound <= 0.0) {
        double bc_max = 0.0;
        for (const BoundaryCondition& bc : problem.boundary)
            bc_max = std::max(bc_max, std::abs(bc.value));
        bound = 8.0 * std::max(1.0, bc_max);
    }

    SpectralSolution sol;
    sol.penalty = penalty;

    Eigen::VectorXd current = u0;
    int iter_offset = 0;
    const int stages = options.continuation_stages;
    for (int stage = 0; stage < stages; ++stage) {
        const double weight =
            penalty * std::pow(10.0, -double(stages - 1 - stage));
        optim::ContinuousProblem cp;
        cp.n_vars = layout.total();
        cp.domains.assign(layout.total(), {-bound, bound, false});
        cp.objective = make_objective(weight);

        optim::OptimizerConfig cfg = config;
        cfg.warm_start_x =
            (stage == 0 && config.warm_start_x) ? *config.warm_start_x : current;
        if (stage > 0) cfg.restarts = 0;
        cfg.seed = config.seed + std::uint64_t(stage);

        const optim::OptimizationResult res = optim::minimize(cp, cfg);
        current = res.best_x;
        for (const auto& [it, f] : res.trace)
            sol.trace.emplace_back(iter_offset + it, f);
        iter_offset += res.iterations + 1;
        sol.converged = res.converged;
    }

    sol.series = dof_to_series(current, layout, basis, 0.0);
    sol.residual_norm = residual_norm(problem, sol.series, mesh);
    sol.bc_violation = bc_violation(problem, sol.series);
    for (auto& s : sol.series) s.residual_norm = sol.residual_norm;
    return sol;
}

SpectralSolution solve_linear_spectral(const LinearOde& linear, int K,
                                       const series::Mesh& mesh,
                                       const LinearSpectralOptions& options) {
    const int n_eq = equation_count(linear);
    if (n_eq < 1) throw ContractViolation("solve_linear_spectral: empty system");
    if (linear.n_funcs < 1 || K < 1)
        throw ContractViolation("solve_linear_spectral: bad problem shape");
    validate_boundary(linear.boundary, linear.n_funcs, linear.max_order,
                      linear.domain);
    const double span = linear.domain.hi - linear.domain.lo;
    if (std::abs(mesh.deltas.sum() - span) > 1e-12 * std::max(1.0, span))
        throw ContractViolation(
            "solve_linear_spectral: mesh does not tile the domain");

    series::BasisSpec basis;
    basis.kind = series::BasisKind::fourier_exp;
    basis.K = K;
    basis.domain = extended_domain(linear.domain, options.extension);
    const int m = basis.max_mode();
    const int n = basis.n_coeffs();
    const double P = basis.period();

    // Coefficient functions and right-hand sides become series on the
    // extended domain; products then turn into banded convolutions.
    const series::Mesh fit_mesh =
        series::Mesh::uniform(basis.domain, std::max(201, 8 * m + 5));
    series::BasisSpec coeff_basis = basis;
    coeff_basis.K = 2 * m;

    auto fit_modes = [&](const std::function<double(double)>& fn,
                         const series::BasisSpec& fb) -> Eigen::VectorXcd {
        if (!fn) return Eigen::VectorXcd::Zero(fb.n_coeffs());
        return series::fit(fn, fb, fit_mesh).coeffs;
    };

    const Eigen::MatrixXcd S = symmetric_dof_matrix(n);
    const int total = linear.n_funcs * n;

    // Per-equation linear map from stacked real DOF to residual modes.
    std::vector<Eigen::MatrixXcd> map_eq(
        n_eq, Eigen::MatrixXcd::Zero(n, total));
    for (const LinearTerm& t : linear.terms) {
        if (t.func < 0 || t.func >= linear.n_funcs)
            throw ContractViolation(
                "solve_linear_spectral: term names a missing function");
        if (t.order < 0 || t.order > linear.max_order)
            throw ContractViolation("solve_linear_spectral: term order out of range");
        const Eigen::VectorXcd a_hat = t.coeff
            ? fit_modes(t.coeff, coeff_basis)
            : [&] {
                  Eigen::VectorXcd one = Eigen::VectorXcd::Zero(coeff_basis.n_coeffs());
                  one[coeff_basis.max_mode()] = cd(1.0, 0.0);
                  return one;
              }();
        Eigen::MatrixXcd T(n, n);  // banded convolution, target modes -m..m
        for (int row = 0; row < n; ++row)
            for (int col = 0; col < n; ++col) {
                const int d = (row - m) - (col - m);
                T(row, col) = std::abs(d) <= coeff_basis.max_mode()
                                  ? a_hat[d + coeff_basis.max_mode()]
                                  : cd(0.0, 0.0);
            }
        for (int col = 0; col < n; ++col)
            T.col(col) *= derivative_factor(basis, col, t.order);
        map_eq[t.eq].middleCols(t.func * n, n) += T * S;
    }

    std::vector<Eigen::VectorXcd> b_hat(n_eq, Eigen::VectorXcd::Zero(n));
    for (int eq = 0; eq < int(linear.rhs.size()); ++eq)
        if (linear.rhs[eq]) b_hat[eq] = fit_modes(linear.rhs[eq], basis);

    // Gram of the modes restricted to the problem domain: the objective is the
    // integrated squared residual over [lo, hi], not over the extension.
    Eigen::MatrixXcd W(n, n);
    for (int row = 0; row < n; ++row)
        for (int col = 0; col < n; ++col) {
            if (row == col) {
                W(row, col) = cd((linear.domain.hi - linear.domain.lo) / P, 0.0);
                continue;
            }
            const double dw = 2.0 * kPi * (col - row) / P;
            W(row, col) = (std::exp(cd(0.0, dw * linear.domain.hi)) -
                           std::exp(cd(0.0, dw * linear.domain.lo))) /
                          (cd(0.0, dw) * P);
        }

    OdeProblem as_problem = make_problem(linear);

    double penalty = options.penalty;
    if (penalty <= 0.0) {
        SymmetricLayout layout{linear.n_funcs, n};
        const std::vector<series::TruncatedSeries> guess = dof_to_series(
            initial_guess(layout, linear.boundary), layout, basis, 0.0);
        const double r0 = residual_norm(as_problem, guess, mesh);
        const double mean_sq =
            r0 * r0 / (linear.domain.hi - linear.domain.lo);
        penalty = 1000.0 * std::max(1.0, std::sqrt(mean_sq));
    }

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(total, total);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(total);
    double constant = 0.0;
    for (int eq = 0; eq < n_eq; ++eq) {
        const Eigen::MatrixXcd WM = W * map_eq[eq];
        H += P * (map_eq[eq].adjoint() * WM).real();
        r += P * (map_eq[eq].adjoint() * (W * b_hat[eq])).real();
        constant += P * (b_hat[eq].dot(W * b_hat[eq])).real();
    }
    for (const BoundaryCondition& bc : linear.boundary) {
        Eigen::RowVectorXcd row_c(n);
        for (int idx = 0; idx < n; ++idx)
            row_c[idx] = derivative_factor(basis, idx, bc.order) *
                         basis.eval_basis(idx, bc.x);
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(total);
        row.segment(bc.func * n, n) = (row_c * S).real();
        H += penalty * row.transpose() * row;
        r += penalty * bc.value * row.transpose();
        constant += penalty * bc.value * bc.value;
    }

    series::QuadraticForm qf;
    qf.A = H.cast<cd>();
    qf.b = (-r).cast<cd>();
    qf.q = constant;
    const Eigen::VectorXd u =
        series::solve_closed_form(qf, options.cond_threshold).real();

    SpectralSolution sol;
    sol.penalty = penalty;
    sol.converged = true;
    SymmetricLayout layout{linear.n_funcs, n};
    sol.series = dof_to_series(u, layout, basis, 0.0);
    sol.residual_norm = residual_norm(as_problem, sol.series, mesh);
    sol.bc_violation = bc_violation(as_problem, sol.series);
    for (auto& s : sol.series) s.residual_norm = sol.residual_norm;
    sol.trace.emplace_back(0, qf.value(u.cast<cd>()));
    return sol;
}

}  // namespace blochopt::diffeq
