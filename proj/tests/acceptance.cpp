// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failing criteria. Run a single criterion with --criterion N.

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "blochopt/calculus.hpp"
#include "blochopt/cli.hpp"
#include "blochopt/diffeq.hpp"
#include "blochopt/optimizer.hpp"
#include "blochopt/qsim.hpp"
#include "blochopt/reference.hpp"
#include "blochopt/series.hpp"

using namespace blochopt;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kSeed = 1000;

struct Outcome {
    bool pass = false;
    std::string detail;  // "measured=... bound=..."
};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

fs::path out_dir(int criterion) {
    const fs::path dir =
        fs::path("acceptance_out") / ("criterion" + std::to_string(criterion));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Outcome optimization_suite(int criterion, const std::string& name,
                           double ceiling_seconds) {
    const cli::BenchmarkResult r =
        cli::run_benchmark(name, kSeed, out_dir(criterion).string());
    const int successes = r.metrics.at("successes").get<int>();
    const int needed = r.metrics.at("needed_successes").get<int>();
    const double worst_seed = r.metrics.at("max_seed_seconds").get<double>();
    Outcome out;
    out.pass = successes >= needed && worst_seed < ceiling_seconds;
    out.detail = "successes=" + std::to_string(successes) + "/5 (need " +
                 std::to_string(needed) + "), slowest_seed=" + num(worst_seed) +
                 "s (ceiling " + num(ceiling_seconds) + "s), per_seed_best_f=" +
                 r.metrics.at("per_seed_best_f").dump();
    return out;
}

Outcome criterion_1() { return optimization_suite(1, "trig14", 60.0); }
Outcome criterion_2() { return optimization_suite(2, "nested4", 30.0); }
Outcome criterion_3() { return optimization_suite(3, "nested28", 300.0); }

Outcome criterion_4() {
    const cli::BenchmarkResult r =
        cli::run_benchmark("step", kSeed, out_dir(4).string());
    const double measured = r.metrics.at("max_rel_error_off_jump").get<double>();
    Outcome out;
    out.pass = measured <= 1e-2;
    out.detail = "measured=" + num(measured) + " bound=1e-2";
    return out;
}

Outcome criterion_5() {
    const cli::BenchmarkResult r =
        cli::run_benchmark("gauss", kSeed, out_dir(5).string());
    const double fit = r.metrics.at("fit_max_rel_error").get<double>();
    const double integral = r.metrics.at("integral_max_rel_error").get<double>();
    Outcome out;
    out.pass = fit <= 1e-2 && integral <= 1e-2;
    out.detail = "fit=" + num(fit) + " integral=" + num(integral) + " bound=1e-2";
    return out;
}

Outcome criterion_6() {
    const cli::BenchmarkResult r =
        cli::run_benchmark("chirp", kSeed, out_dir(6).string());
    const double measured = r.metrics.at("integral_rel_error").get<double>();
    Outcome out;
    out.pass = measured <= 5e-3;
    out.detail = "measured=" + num(measured) + " bound=5e-3";
    return out;
}

Outcome criterion_7() {
    const cli::BenchmarkResult r =
        cli::run_benchmark("bernoulli", kSeed, out_dir(7).string());
    const double measured =
        r.metrics.at("collocation").at("max_rel_error").get<double>();
    Outcome out;
    out.pass = measured <= 1e-3;
    out.detail = "measured=" + num(measured) + " bound=1e-3 residual=" +
                 num(r.metrics.at("collocation").at("residual_norm").get<double>());
    return out;
}

Outcome criterion_8() {
    const cli::BenchmarkResult r =
        cli::run_benchmark("coupled", kSeed, out_dir(8).string());
    const double g = r.metrics.at("linear").at("max_rel_error_g").get<double>();
    const double f = r.metrics.at("linear").at("max_rel_error_f").get<double>();
    const double measured = std::max(g, f);
    Outcome out;
    out.pass = measured <= 1e-1;
    out.detail = "measured=" + num(measured) + " (g=" + num(g) + ", f=" +
                 num(f) + ") bound=1e-1";
    return out;
}

// ---------------------------------------------------------------------------
// Criterion 9: property battery.

bool check(std::vector<std::string>& notes, const std::string& name,
           double measured, double bound) {
    const bool ok = measured <= bound;
    notes.push_back("  - " + std::string(ok ? "ok  " : "FAIL") + " " + name +
                    ": measured=" + num(measured) + " bound=" + num(bound));
    return ok;
}

qsim::StateVector purified(double theta, double phi, double r) {
    qsim::StateVector psi = qsim::StateVector::zero_state(2);
    const double a0 = std::sqrt((1.0 + r) / 2.0);
    const double a1 = std::sqrt((1.0 - r) / 2.0);
    const std::complex<double> phase = std::exp(std::complex<double>(0.0, phi));
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    psi.amps.setZero();
    psi.amps[0] = a0 * c;
    psi.amps[1] = a0 * s * phase;
    psi.amps[2] = -a1 * s;
    psi.amps[3] = a1 * c * phase;
    return psi;
}

double tomography_grid_error() {
    double worst = 0.0;
    for (const double r : {0.05, 0.3, 0.55, 0.8, 1.0}) {
        for (int it = 1; it <= 5; ++it) {
            for (int ip = 0; ip < 6; ++ip) {
                const double theta = kPi * it / 6.0;
                const double phi = 2.0 * kPi * ip / 6.0 + 0.1;
                const auto b = qsim::exact_bloch_params(purified(theta, phi, r), 0);
                worst = std::max({worst, std::abs(b.theta - theta),
                                  std::abs(b.phi - phi), std::abs(b.r - r)});
            }
        }
    }
    return worst;
}

double gradient_check_error() {
    optim::ContinuousProblem problem;
    problem.n_vars = 3;
    problem.domains.assign(3, {-1.5, 1.5, false});
    problem.objective = [](const Eigen::VectorXd& x) {
        return std::sin(x[0]) * std::cos(x[1]) + 0.5 * x[2] * x[2] +
               0.3 * x[0] * x[2];
    };
    const auto map =
        encoding::EncodingMap::make(encoding::Mode::pure, problem.domains);
    const auto ansatz = qsim::layered_ansatz(map.n_qubits, 3);
    Eigen::VectorXd omega(ansatz.n_params);
    for (int i = 0; i < omega.size(); ++i) omega[i] = 0.4 + 0.13 * i;

    const double eps = 1e-5;
    const Eigen::VectorXd g =
        optim::omega_gradient(omega, ansatz, map, problem, eps);
    double worst = 0.0;
    for (int k = 0; k < omega.size(); ++k) {
        Eigen::VectorXd hi = omega, lo = omega;
        hi[k] += eps;
        lo[k] -= eps;
        const double fd = (optim::evaluate(hi, ansatz, map, problem).second -
                           optim::evaluate(lo, ansatz, map, problem).second) /
                          (2.0 * eps);
        worst = std::max(worst, std::abs(g[k] - fd) / std::max(std::abs(fd), 1.0));
    }
    return worst;
}

series::BasisSpec gaussian_basis() {
    series::BasisSpec basis;
    basis.kind = series::BasisKind::fourier_exp;
    basis.K = 22;
    basis.domain = {-3.0, 3.0, false};
    return basis;
}

double quadratic_identity_error() {
    const auto basis = gaussian_basis();
    const auto mesh = series::Mesh::uniform(basis.domain, 100);
    Eigen::VectorXd f(mesh.points.size());
    for (int mu = 0; mu < f.size(); ++mu)
        f[mu] = std::exp(-mesh.points[mu] * mesh.points[mu]);
    const series::QuadraticForm qf = series::assemble(f, basis, mesh);
    const Eigen::VectorXcd c = series::solve_closed_form(qf);
    const Eigen::VectorXcd Ainv_b =
        Eigen::LDLT<Eigen::MatrixXcd>(qf.A).solve(qf.b);
    const double closed = qf.q - qf.b.dot(Ainv_b).real();
    return std::abs(qf.value(c) - closed);
}

double variational_gap_relative() {
    const auto f = [](double x) { return std::exp(-x * x); };
    const auto basis = gaussian_basis();
    const auto mesh = series::Mesh::uniform(basis.domain, 100);
    Eigen::VectorXd samples(mesh.points.size());
    for (int mu = 0; mu < samples.size(); ++mu) samples[mu] = f(mesh.points[mu]);
    const series::QuadraticForm qf = series::assemble(samples, basis, mesh);
    const Eigen::VectorXcd closed = series::solve_closed_form(qf);

    optim::OptimizerConfig cfg;
    cfg.mode = encoding::Mode::mixed;
    cfg.method = optim::Method::conjugate_gradient;
    cfg.layers = 3;
    cfg.max_iters = 2000;
    cfg.restarts = 0;
    cfg.seed = kSeed;
    cfg.tol_f = 1e-16;
    cfg.tol_g = 1e-10;
    cfg.warm_start_x = series::symmetric_dof_from_coeffs(closed);
    const Eigen::VectorXcd variational =
        series::solve_variational(qf, basis, cfg, 4.0);

    const double gap = qf.value(variational) - qf.value(closed);
    return gap / (1.0 + std::abs(qf.value(closed)));
}

double integral_linearity_error() {
    const auto f = [](double x) { return std::exp(std::sin(kPi * x)); };
    const auto g = [](double x) { return x * std::cos(kPi * x); };
    const auto combo = [&](double x) { return 2.0 * f(x) - 3.0 * g(x); };
    const double vf = calculus::definite_integral(f, 0.0, 2.0, 12, 80).value;
    const double vg = calculus::definite_integral(g, 0.0, 2.0, 12, 80).value;
    const double vc = calculus::definite_integral(combo, 0.0, 2.0, 12, 80).value;
    return std::abs(vc - (2.0 * vf - 3.0 * vg));
}

double integral_additivity_error() {
    series::BasisSpec basis;
    basis.kind = series::BasisKind::fourier_exp;
    basis.K = 10;
    basis.domain = {0.0, 2.0, false};
    const auto mesh = series::Mesh::uniform(basis.domain, 61);
    const auto s = series::fit(
        [](double x) { return std::exp(-x) + 0.2 * x; }, basis, mesh);
    double worst = 0.0;
    for (const double split : {0.3, 0.9, 1.5}) {
        const double left = calculus::running_integral(s, split);
        const double rest = calculus::running_integral(s, 2.0) - left;
        const double whole = calculus::integrate_series(s, 0.0, 2.0).value;
        worst = std::max(worst, std::abs(left + rest - whole));
    }
    return worst;
}

double certificate_factor() {
    diffeq::LinearOde sys;
    sys.n_funcs = 2;
    sys.max_order = 1;
    sys.domain = {0.0, 2.0, false};
    sys.boundary = {{0, 0, 0.0, 2.0}, {1, 0, 0.0, 0.0}};
    sys.terms.push_back({0, 0, 1, nullptr});
    sys.terms.push_back({0, 0, 0, nullptr});
    sys.terms.push_back({0, 1, 0, [](double) { return -6.0; }});
    sys.terms.push_back({1, 1, 1, nullptr});
    sys.terms.push_back({1, 0, 0, [](double) { return -1.0; }});
    sys.terms.push_back({1, 1, 0, [](double) { return 2.0; }});
    sys.rhs = {nullptr, nullptr};

    const auto mesh = series::Mesh::uniform(sys.domain, 60);
    const auto sol = diffeq::solve_linear_spectral(sys, 7, mesh, {});
    const auto problem = diffeq::make_problem(sys);
    const double coarse = diffeq::residual_norm(problem, sol.series, mesh);
    const auto fine = series::Mesh::uniform(sys.domain, 180);
    const double refined = diffeq::residual_norm(problem, sol.series, fine);
    const double lo = std::min(coarse, refined);
    return lo > 0.0 ? std::max(coarse, refined) / lo : 1.0;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double determinism_mismatches() {
    const fs::path base = out_dir(9);
    const fs::path dir_a = base / "a";
    const fs::path dir_b = base / "b";
    int mismatches = 0;
    for (const std::string& name : {std::string("nested4"), std::string("gauss")}) {
        const auto ra = cli::run_benchmark(name, 500, (dir_a / name).string());
        const auto rb = cli::run_benchmark(name, 500, (dir_b / name).string());
        if (ra.csv_paths.size() != rb.csv_paths.size()) {
            ++mismatches;
            continue;
        }
        for (size_t i = 0; i < ra.csv_paths.size(); ++i) {
            const std::string a = slurp(ra.csv_paths[i]);
            if (a.empty() || a != slurp(rb.csv_paths[i])) ++mismatches;
        }
    }
    return double(mismatches);
}

Outcome criterion_9() {
    std::vector<std::string> notes;
    bool pass = true;
    pass &= check(notes, "tomography round-trip", tomography_grid_error(), 1e-8);
    pass &= check(notes, "gradient vs finite differences",
                  gradient_check_error(), 1e-6);
    pass &= check(notes, "quadratic stationary identity",
                  quadratic_identity_error(), 1e-9);
    pass &= check(notes, "closed vs variational objective gap",
                  variational_gap_relative(), 1e-4);
    pass &= check(notes, "integral linearity", integral_linearity_error(), 1e-9);
    pass &= check(notes, "integral additivity", integral_additivity_error(), 1e-9);
    pass &= check(notes, "residual certificate mesh factor",
                  certificate_factor(), 3.0);
    pass &= check(notes, "byte-identical reruns", determinism_mismatches(), 0.0);

    Outcome out;
    out.pass = pass;
    std::string joined;
    for (const auto& n : notes) joined += "\n" + n;
    out.detail = "all property suites must pass" + joined;
    return out;
}

struct Criterion {
    int id;
    const char* description;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all = {
        {1, "14-variable trigonometric sum reaches 1e-2 on 4/5 seeds, <60s/seed",
         criterion_1},
        {2, "4-variable nested objective reaches -0.99 on 4/5 seeds, <30s/seed",
         criterion_2},
        {3, "28-variable nested objective reaches -0.99 on 3/5 seeds, <300s/seed",
         criterion_3},
        {4, "step-function fit within 1e-2 beyond 2 cells of the jump",
         criterion_4},
        {5, "gaussian fit and running integral within 1e-2 off the tails",
         criterion_5},
        {6, "oscillatory integral matches its closed form within 5e-3",
         criterion_6},
        {7, "nonlinear first-order equation solved to 1e-3 max relative error",
         criterion_7},
        {8, "coupled linear system solved to 1e-1 max relative error",
         criterion_8},
        {9, "property suites (tomography, gradients, quadratics, integrals, "
            "certificates, determinism)",
         criterion_9},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::strcmp(argv[i], "--criterion") == 0) only = std::atoi(argv[i + 1]);

    int failures = 0;
    for (const Criterion& crit : criteria()) {
        if (only != 0 && crit.id != only) continue;
        Outcome outcome;
        try {
            outcome = crit.run();
        } catch (const std::exception& e) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + e.what();
        }
        std::printf("[%s] criterion %d: %s; %s\n",
                    outcome.pass ? "PASS" : "FAIL", crit.id, crit.description,
                    outcome.detail.c_str());
        std::fflush(stdout);
        if (!outcome.pass) ++failures;
    }
    return failures;
}
