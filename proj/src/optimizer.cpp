#include "blochopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace blochopt::optim {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Evaluation context for one run. prefit_target switches the objective to the
// squared decode distance used by warm starts; that path is always exact.
struct EvalContext {
    const qsim::Ansatz& ansatz;
    const encoding::EncodingMap& map;
    const ContinuousProblem& problem;
    Tomography tomography;
    std::mt19937_64* rng = nullptr;
    const Eigen::VectorXd* prefit_target = nullptr;

    std::pair<Eigen::VectorXd, double> eval(const Eigen::VectorXd& omega) const {
        qsim::StateVector state = qsim::apply_circuit(
            qsim::StateVector::zero_state(map.n_qubits), ansatz, omega);
        std::vector<qsim::BlochParams> blochs(map.n_qubits);
        for (int q = 0; q < map.n_qubits; ++q) {
            if (tomography.exact || prefit_target)
                blochs[q] = qsim::exact_bloch_params(state, q);
            else
                blochs[q] =
                    qsim::sampled_bloch_params(state, q, tomography.shots, *rng);
        }
        Eigen::VectorXd x = encoding::decode(blochs, map);
        double f;
        if (prefit_target) {
            f = (x - *prefit_target).squaredNorm();
        } else {
            f = problem.objective(x);
            if (!std::isfinite(f)) f = kInf;
        }
        return {std::move(x), f};
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& omega, double eps) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(omega.size());
        Eigen::VectorXd probe = omega;
        for (Eigen::Index i = 0; i < omega.size(); ++i) {
            probe[i] = omega[i] + eps;
            const double fp = eval(probe).second;
            probe[i] = omega[i] - eps;
            const double fm = eval(probe).second;
            probe[i] = omega[i];
            if (std::isfinite(fp) && std::isfinite(fm))
                g[i] = (fp - fm) / (2.0 * eps);
        }
        return g;
    }
};

struct RunOutcome {
    Eigen::VectorXd omega;
    Eigen::VectorXd x;
    double f = kInf;
    int iterations = 0;
    std::vector<std::pair<int, double>> trace;
    bool converged = false;
};

struct LineSearchResult {
    Eigen::VectorXd omega;
    Eigen::VectorXd x;
    double f = kInf;
    bool ok = false;
};

// Backtracking halving from the configured rate, then one parabolic
// refinement through (0, f0), (s/2, fh), (s, fs) when the fit is convex.
LineSearchResult line_search(const EvalContext& ctx, const Eigen::VectorXd& omega,
                             double f0, const Eigen::VectorXd& dir,
                             double initial_step) {
    LineSearchResult res;
    double step = initial_step;
    for (int halving = 0; halving < 45; ++halving) {
        Eigen::VectorXd cand = omega + step * dir;
        auto [x_cand, f_cand] = ctx.eval(cand);
        if (std::isfinite(f_cand) && f_cand < f0) {
            Eigen::VectorXd half = omega + 0.5 * step * dir;
            auto [x_half, f_half] = ctx.eval(half);
            const double denom = f_cand - 2.0 * f_half + f0;
            if (std::isfinite(f_half) && denom > 1e-300) {
                const double s_opt =
                    step * (0.25 * (f0 - f_cand) / denom + 0.5);
                if (s_opt > 0.0 && s_opt < 2.0 * step) {
                    Eigen::VectorXd refined = omega + s_opt * dir;
                    auto [x_ref, f_ref] = ctx.eval(refined);
                    if (std::isfinite(f_ref) && f_ref < f_cand) {
                        res.omega = std::move(refined);
                        res.x = std::move(x_ref);
                        res.f = f_ref;
                        res.ok = true;
                        return res;
                    }
                }
            }
            if (std::isfinite(f_half) && f_half < f_cand) {
                res.omega = std::move(half);
                res.x = std::move(x_half);
                res.f = f_half;
            } else {
                res.omega = std::move(cand);
                res.x = std::move(x_cand);
                res.f = f_cand;
            }
            res.ok = true;
            return res;
        }
        step *= 0.5;
    }
    return res;
}

struct DescentParams {
    double learning_rate;
    double grad_eps;
    double tol_f;
    double tol_g;
    int max_iters;
    bool conjugate;
    int stall_kicks;
};

RunOutcome descent_loop(const EvalContext& ctx, Eigen::VectorXd omega,
                        const DescentParams& p, std::mt19937_64& rng) {
    RunOutcome out;
    auto [x, f] = ctx.eval(omega);
    out.trace.emplace_back(0, f);

    Eigen::VectorXd g = ctx.gradient(omega, p.grad_eps);
    Eigen::VectorXd dir = -g;
    int kicks_left = p.stall_kicks;
    int kick_level = 0;
    int consec_small = 0;
    std::normal_distribution<double> gauss(0.0, 1.0);

    int iter = 0;
    while (iter < p.max_iters) {
        ++iter;
        if (g.norm() < p.tol_g) {
            out.converged = true;
            break;
        }

        LineSearchResult ls = line_search(ctx, omega, f, dir, p.learning_rate);
        if (!ls.ok && p.conjugate && (dir + g).norm() > 0.0) {
            dir = -g;
            ls = line_search(ctx, omega, f, dir, p.learning_rate);
        }
        if (!ls.ok) {
            if (kicks_left > 0) {
                --kicks_left;
                const double sigma = 0.02 * std::pow(2.0, kick_level++);
                Eigen::VectorXd kicked = omega;
                for (Eigen::Index i = 0; i < kicked.size(); ++i)
                    kicked[i] += sigma * gauss(rng);
                auto [x_k, f_k] = ctx.eval(kicked);
                if (std::isfinite(f_k)) {
                    omega = std::move(kicked);
                    x = std::move(x_k);
                    f = f_k;
                    g = ctx.gradient(omega, p.grad_eps);
                    dir = -g;
                    consec_small = 0;
                    out.trace.emplace_back(iter, f);
                }
                continue;
            }
            break;  // stalled with no kicks left; not converged by the rules
        }

        const double drop = f - ls.f;
        omega = std::move(ls.omega);
        x = std::move(ls.x);
        f = ls.f;

        Eigen::VectorXd g_new = ctx.gradient(omega, p.grad_eps);
        double beta = 0.0;
        if (p.conjugate) {
            const double denom = g.squaredNorm();
            if (denom > 0.0)
                beta = std::max(0.0, g_new.dot(g_new - g) / denom);
        }
        dir = -g_new + beta * dir;
        if (dir.dot(g_new) >= 0.0) dir = -g_new;
        g = std::move(g_new);

        out.trace.emplace_back(iter, f);
        consec_small = std::abs(drop) < p.tol_f ? consec_small + 1 : 0;
        if (consec_small >= 10) {
            out.converged = true;
            break;
        }
    }

    out.omega = std::move(omega);
    out.x = std::move(x);
    out.f = f;
    out.iterations = iter;
    return out;
}

// Adaptive Nelder-Mead on the circuit parameters; no gradients involved.
RunOutcome nelder_mead_loop(const EvalContext& ctx, const Eigen::VectorXd& omega0,
                            const DescentParams& p) {
    const Eigen::Index n = omega0.size();
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / double(n);
    const double gamma = 0.75 - 1.0 / (2.0 * double(n));
    const double delta = 1.0 - 1.0 / double(n);

    std::vector<Eigen::VectorXd> verts(n + 1, omega0);
    std::vector<Eigen::VectorXd> xs(n + 1);
    std::vector<double> fs(n + 1);
    for (Eigen::Index j = 0; j < n; ++j) verts[j + 1][j] += 0.5;
    for (Eigen::Index j = 0; j <= n; ++j)
        std::tie(xs[j], fs[j]) = ctx.eval(verts[j]);

    std::vector<int> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    auto sort_simplex = [&] {
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return fs[a] < fs[b]; });
    };
    sort_simplex();

    RunOutcome out;
    out.trace.emplace_back(0, fs[order[0]]);
    int consec_small = 0;
    int iter = 0;
    while (iter < p.max_iters) {
        ++iter;
        const double f_best_prev = fs[order[0]];
        const int worst = order[n];

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (Eigen::Index j = 0; j < n; ++j) centroid += verts[order[j]];
        centroid /= double(n);

        auto try_point = [&](double coef) {
            Eigen::VectorXd pt = centroid + coef * (centroid - verts[worst]);
            auto [x_pt, f_pt] = ctx.eval(pt);
            return std::tuple(std::move(pt), std::move(x_pt), f_pt);
        };

        auto [refl, x_refl, f_refl] = try_point(alpha);
        bool shrink = false;
        if (f_refl < fs[order[0]]) {
            auto [expd, x_expd, f_expd] = try_point(alpha * beta);
            if (f_expd < f_refl) {
                verts[worst] = std::move(expd);
                xs[worst] = std::move(x_expd);
                fs[worst] = f_expd;
            } else {
                verts[worst] = std::move(refl);
                xs[worst] = std::move(x_refl);
                fs[worst] = f_refl;
            }
        } else if (f_refl < fs[order[n - 1]]) {
            verts[worst] = std::move(refl);
            xs[worst] = std::move(x_refl);
            fs[worst] = f_refl;
        } else {
            const double coef = f_refl < fs[worst] ? alpha * gamma : -gamma;
            auto [contr, x_contr, f_contr] = try_point(coef);
            if (f_contr < std::min(f_refl, fs[worst])) {
                verts[worst] = std::move(contr);
                xs[worst] = std::move(x_contr);
                fs[worst] = f_contr;
            } else {
                shrink = true;
            }
        }
        if (shrink) {
            const Eigen::VectorXd& best = verts[order[0]];
            for (Eigen::Index j = 1; j <= n; ++j) {
                const int v = order[j];
                verts[v] = best + delta * (verts[v] - best);
                std::tie(xs[v], fs[v]) = ctx.eval(verts[v]);
            }
        }
        sort_simplex();

        out.trace.emplace_back(iter, fs[order[0]]);
        consec_small =
            std::abs(f_best_prev - fs[order[0]]) < p.tol_f ? consec_small + 1 : 0;
        if (consec_small >= 10) {
            out.converged = true;
            break;
        }
    }

    const int best = order[0];
    out.omega = verts[best];
    out.x = xs[best];
    out.f = fs[best];
    out.iterations = iter;
    return out;
}

// Near-equatorial start (RY = pi/2, RZ = pi) plus a small jitter keeps every
// decoded variable away from the Bloch poles where the map loses sensitivity.
Eigen::VectorXd neutral_omega(const qsim::Ansatz& ansatz, std::mt19937_64& rng) {
    Eigen::VectorXd omega(ansatz.n_params);
    for (int i = 0; i < ansatz.n_params; ++i)
        omega[i] = (i % 2 == 0) ? kPi / 2.0 : kPi;
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (int i = 0; i < ansatz.n_params; ++i) omega[i] += jitter(rng);
    return omega;
}

// Pre-fits the circuit so the decoded point lands on `target`. Retries with a
// fresh jitter when the fit distance stays poor; keeps the best attempt.
Eigen::VectorXd warm_start_omega(const EvalContext& main_ctx,
                                 const Eigen::VectorXd& target,
                                 const DescentParams& main_params,
                                 std::mt19937_64& rng) {
    EvalContext prefit_ctx = main_ctx;
    prefit_ctx.prefit_target = &target;

    DescentParams p = main_params;
    p.learning_rate = 0.25;
    p.grad_eps = 1e-5;
    p.tol_f = 1e-15;
    p.tol_g = 1e-9;
    p.max_iters = 300;
    p.conjugate = true;
    p.stall_kicks = 0;

    Eigen::VectorXd best;
    double best_dist = kInf;
    for (int attempt = 0; attempt < 5; ++attempt) {
        RunOutcome fit = descent_loop(prefit_ctx, neutral_omega(main_ctx.ansatz, rng), p, rng);
        if (fit.f < best_dist) {
            best_dist = fit.f;
            best = std::move(fit.omega);
        }
        if (best_dist <= 1e-10) break;
    }
    return best;
}

}  // namespace

std::pair<Eigen::VectorXd, double> evaluate(
    const Eigen::VectorXd& omega, const qsim::Ansatz& ansatz,
    const encoding::EncodingMap& map, const ContinuousProblem& problem,
    const Tomography& tomography, std::mt19937_64* rng) {
    if (!tomography.exact && rng == nullptr)
        throw ContractViolation("evaluate: sampled tomography needs an rng");
    EvalContext ctx{ansatz, map, problem, tomography, rng, nullptr};
    return ctx.eval(omega);
}

Eigen::VectorXd omega_gradient(const Eigen::VectorXd& omega,
                               const qsim::Ansatz& ansatz,
                               const encoding::EncodingMap& map,
                               const ContinuousProblem& problem, double eps,
                               const Tomography& tomography,
                               std::mt19937_64* rng) {
    if (!tomography.exact && rng == nullptr)
        throw ContractViolation("omega_gradient: sampled tomography needs an rng");
    EvalContext ctx{ansatz, map, problem, tomography, rng, nullptr};
    return ctx.gradient(omega, eps);
}

OptimizationResult minimize(const ContinuousProblem& problem,
                            const OptimizerConfig& config) {
    if (!problem.objective) throw ContractViolation("minimize: no objective");
    if (int(problem.domains.size()) != problem.n_vars)
        throw ContractViolation("minimize: domains must cover every variable");
    if (config.layers < 1) throw ContractViolation("minimize: layers < 1");
    if (config.learning_rate <= 0.0)
        throw ContractViolation("minimize: learning_rate must be positive");
    if (config.max_iters < 1) throw ContractViolation("minimize: max_iters < 1");
    if (config.restarts < 0) throw ContractViolation("minimize: restarts < 0");
    if (!config.tomography.exact && config.tomography.shots < 1)
        throw ContractViolation("minimize: sampled tomography needs shots >= 1");

    const encoding::EncodingMap map = encoding::EncodingMap::make(
        config.mode, problem.domains, config.n_qubits_override);
    const qsim::Ansatz ansatz = qsim::layered_ansatz(map.n_qubits, config.layers);
    if (config.warm_start_x && config.warm_start_x->size() != problem.n_vars)
        throw ContractViolation("minimize: warm_start_x size mismatch");

    DescentParams params;
    params.learning_rate = config.learning_rate;
    params.grad_eps =
        config.tomography.exact ? config.grad_eps : config.grad_eps_shots;
    params.tol_f = config.tol_f;
    params.tol_g = config.tol_g;
    params.max_iters = config.max_iters;
    params.conjugate = config.method == Method::conjugate_gradient;
    params.stall_kicks = config.stall_kicks;

    std::mt19937_64 master(config.seed);
    const int runs = config.restarts + 1;
    std::vector<std::uint64_t> sub_seeds(runs);
    for (auto& s : sub_seeds) s = master();

    OptimizationResult result;
    result.best_f = kInf;
    result.restarts_used = runs - 1;  // additional runs, matching the config

    for (int run = 0; run < runs; ++run) {
        std::mt19937_64 rng(sub_seeds[run]);
        EvalContext ctx{ansatz,
                        map,
                        problem,
                        config.tomography,
                        config.tomography.exact ? nullptr : &rng,
                        nullptr};

        Eigen::VectorXd omega0;
        if (run == 0 && config.warm_start_x) {
            omega0 = warm_start_omega(ctx, *config.warm_start_x, params, rng);
        } else {
            std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
            bool feasible = false;
            for (int attempt = 0; attempt < 200 && !feasible; ++attempt) {
                omega0.resize(ansatz.n_params);
                for (int i = 0; i < ansatz.n_params; ++i) omega0[i] = uni(rng);
                feasible = std::isfinite(ctx.eval(omega0).second);
            }
            if (!feasible)
                throw InfeasibleStart(
                    "minimize: no finite starting point in 200 draws");
        }

        RunOutcome outcome =
            config.method == Method::derivative_free
                ? nelder_mead_loop(ctx, omega0, params)
                : descent_loop(ctx, std::move(omega0), params, rng);

        if (outcome.f < result.best_f) {
            result.best_f = outcome.f;
            result.best_x = std::move(outcome.x);
            result.best_omega = std::move(outcome.omega);
            result.iterations = outcome.iterations;
            result.trace = std::move(outcome.trace);
            result.converged = outcome.converged;
        }
    }
    return result;
}

}  // namespace blochopt::optim
