#include <doctest.h>

#include <cmath>
#include <complex>

#include "blochopt/errors.hpp"
#include "blochopt/series.hpp"

using namespace blochopt;
using Complex = std::complex<double>;

namespace {
constexpr double kPi = 3.14159265358979323846;

series::BasisSpec exp_basis(int K, double lo, double hi) {
    series::BasisSpec b;
    b.kind = series::BasisKind::fourier_exp;
    b.K = K;
    b.domain = {lo, hi, false};
    return b;
}

series::BasisSpec trig_basis(int K, double lo, double hi) {
    series::BasisSpec b;
    b.kind = series::BasisKind::fourier_trig;
    b.K = K;
    b.domain = {lo, hi, false};
    return b;
}
}  // namespace

TEST_CASE("basis sizes and mode numbering") {
    const auto e6 = exp_basis(6, 0.0, 1.0);
    CHECK(e6.n_coeffs() == 7);
    CHECK(e6.max_mode() == 3);
    CHECK(e6.mode_of(0) == -3);
    CHECK(e6.mode_of(3) == 0);
    CHECK(e6.mode_of(6) == 3);
    CHECK(e6.real_param_count() == 14);

    const auto e5 = exp_basis(5, 0.0, 1.0);
    CHECK(e5.n_coeffs() == 5);

    const auto t3 = trig_basis(3, 0.0, 2.0);
    CHECK(t3.n_coeffs() == 7);
    CHECK(t3.real_param_count() == 7);
    CHECK(t3.mode_of(0) == 0);
    CHECK(t3.mode_of(1) == 1);
    CHECK(t3.mode_of(4) == 1);  // first sine
}

TEST_CASE("basis functions take their textbook values") {
    const auto e = exp_basis(4, 0.0, 2.0);
    // mode 1 at x = 0.5: exp(i pi 0.5)
    const Complex v = e.eval_basis(3, 0.5);
    CHECK(v.real() == doctest::Approx(std::cos(kPi * 0.5)));
    CHECK(v.imag() == doctest::Approx(std::sin(kPi * 0.5)));
    CHECK(e.weight_at(0.3) == doctest::Approx(0.5));

    const auto t = trig_basis(2, 0.0, 1.0);
    CHECK(t.eval_basis(0, 0.77).real() == doctest::Approx(1.0));
    CHECK(t.eval_basis(1, 0.25).real() == doctest::Approx(std::cos(kPi / 2.0)));
    CHECK(t.eval_basis(3, 0.25).real() == doctest::Approx(std::sin(kPi / 2.0)));
}

TEST_CASE("uniform mesh tiles the domain with trapezoid cells") {
    const series::Mesh mesh = series::Mesh::uniform({1.0, 3.0, false}, 9);
    REQUIRE(mesh.points.size() == 9);
    CHECK(mesh.points[0] == 1.0);
    CHECK(mesh.points[8] == 3.0);
    const double h = 2.0 / 8.0;
    CHECK(mesh.deltas[0] == doctest::Approx(h / 2.0));
    CHECK(mesh.deltas[4] == doctest::Approx(h));
    CHECK(mesh.deltas[8] == doctest::Approx(h / 2.0));
    CHECK(mesh.deltas.sum() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("normal matrix is the identity for exponential modes") {
    // Orthonormality under the 1/P weight; the trapezoid rule is exact for
    // periodic integrands on a uniform mesh.
    const auto basis = exp_basis(6, -1.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 33);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(33);
    const series::QuadraticForm qf = series::assemble(f, basis, mesh);
    CHECK((qf.A - Eigen::MatrixXcd::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("assembled normal matrix is Hermitian and PSD") {
    const auto basis = exp_basis(5, 0.0, 2.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 17);
    Eigen::VectorXd f(17);
    for (int i = 0; i < 17; ++i) f[i] = std::sin(3.0 * mesh.points[i]);
    const series::QuadraticForm qf = series::assemble(f, basis, mesh);
    CHECK((qf.A - qf.A.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::VectorXd evals =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(qf.A).eigenvalues();
    CHECK(evals.minCoeff() > -1e-12);
}

TEST_CASE("closed-form solve hits a known stationary point") {
    series::QuadraticForm qf;
    qf.A = Eigen::Vector2d(2.0, 4.0).asDiagonal();
    qf.b = Eigen::Vector2cd(-2.0, -8.0);
    qf.q = 20.0;
    const Eigen::VectorXcd c = series::solve_closed_form(qf);
    CHECK(std::abs(c[0] - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(c[1] - Complex(2.0, 0.0)) < 1e-12);
    // At the stationary point A c = -b, so the value reduces to q + Re(b^H c).
    CHECK(qf.value(c) == doctest::Approx(2.0));
    CHECK(qf.value(c) == doctest::Approx(qf.q + (qf.b.dot(c)).real()));
}

TEST_CASE("singular normal matrix is refused") {
    series::QuadraticForm qf;
    qf.A = Eigen::MatrixXcd::Ones(2, 2);
    qf.b = Eigen::Vector2cd(1.0, 1.0);
    CHECK_THROWS_AS(series::solve_closed_form(qf), IllConditioned);
}

TEST_CASE("constant target fits as the zero-mode coefficient") {
    const auto basis = exp_basis(4, 0.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 21);
    const auto fit = series::fit([](double) { return 3.0; }, basis, mesh);
    REQUIRE(fit.coeffs.size() == 5);
    CHECK(std::abs(fit.coeffs[2] - Complex(3.0, 0.0)) < 1e-10);
    for (int i : {0, 1, 3, 4}) CHECK(std::abs(fit.coeffs[i]) < 1e-10);
    // The residual is a sqrt of cancelling O(1) terms, so ~1e-8 is its floor.
    CHECK(fit.residual_norm < 1e-6);
}

TEST_CASE("pure harmonic lands on the matching trig coefficient") {
    const auto basis = trig_basis(3, 0.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 41);
    const auto fit = series::fit(
        [](double x) { return std::sin(2.0 * kPi * x); }, basis, mesh);
    REQUIRE(fit.coeffs.size() == 7);
    // Layout: [1, cos1, cos2, cos3, sin1, sin2, sin3].
    CHECK(std::abs(fit.coeffs[4] - Complex(1.0, 0.0)) < 1e-3);
    for (int i : {0, 1, 2, 3, 5, 6}) CHECK(std::abs(fit.coeffs[i]) < 1e-3);
}

TEST_CASE("band-limited targets are recovered to rounding") {
    const auto target = [](double x) {
        return 1.0 + 0.5 * std::cos(2.0 * kPi * x) - 0.25 * std::sin(4.0 * kPi * x);
    };
    const auto basis = exp_basis(8, 0.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 64);
    const auto fit = series::fit(target, basis, mesh);
    double worst = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        worst = std::max(worst,
                         std::abs(series::evaluate_series(fit, x) - target(x)));
    }
    CHECK(worst < 1e-6);
    CHECK(fit.residual_norm < 1e-6);
}

TEST_CASE("residual norm does not grow with more modes") {
    const auto target = [](double x) { return std::exp(std::sin(2.0 * kPi * x)); };
    double previous = std::numeric_limits<double>::infinity();
    for (int K : {2, 4, 6, 8, 10}) {
        const auto basis = exp_basis(K, 0.0, 1.0);
        const series::Mesh mesh = series::Mesh::uniform(basis.domain, 81);
        const auto fit = series::fit(target, basis, mesh);
        CHECK(fit.residual_norm <= previous + 1e-9);
        previous = fit.residual_norm;
    }
}

TEST_CASE("real targets give conjugate-symmetric coefficients") {
    const auto basis = exp_basis(6, 0.0, 2.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 41);
    const auto fit = series::fit(
        [](double x) { return x * (2.0 - x); }, basis, mesh);
    const int m = basis.max_mode();
    for (int l = 1; l <= m; ++l)
        CHECK(std::abs(fit.coeffs[m + l] - std::conj(fit.coeffs[m - l])) < 1e-10);
    // The imaginary part of the series vanishes everywhere on the domain.
    for (int i = 0; i <= 40; ++i) {
        const double x = 2.0 * i / 40.0;
        CHECK(std::abs(series::evaluate_series_complex(fit, x).imag()) < 1e-10);
    }
}

TEST_CASE("symmetric dof packing round-trips") {
    Eigen::VectorXd u(5);
    u << 1.5, 0.25, -0.75, 2.0, 0.125;
    const Eigen::VectorXcd c = series::coeffs_from_symmetric_dof(u);
    REQUIRE(c.size() == 5);
    CHECK(c[2] == Complex(1.5, 0.0));
    CHECK(c[3] == Complex(0.25, -0.75));
    CHECK(c[1] == Complex(0.25, 0.75));
    CHECK(c[4] == Complex(2.0, 0.125));
    CHECK(c[0] == Complex(2.0, -0.125));
    const Eigen::VectorXd back = series::symmetric_dof_from_coeffs(c);
    CHECK((back - u).norm() < 1e-15);
}

TEST_CASE("trig and exponential fits describe the same function") {
    const auto target = [](double x) {
        return 0.3 + std::cos(kPi * x) * std::exp(-x);
    };
    const auto tb = trig_basis(5, 0.0, 2.0);
    const auto eb = exp_basis(10, 0.0, 2.0);
    const series::Mesh mesh = series::Mesh::uniform(tb.domain, 61);
    const auto tfit = series::fit(target, tb, mesh);
    const auto efit = series::fit(target, eb, mesh);
    const auto converted = series::to_exponential(tfit);
    for (int i = 0; i <= 100; ++i) {
        const double x = 2.0 * i / 100.0;
        const double tv = series::evaluate_series(tfit, x);
        const double cv = series::evaluate_series(converted, x);
        const double ev = series::evaluate_series(efit, x);
        CHECK(std::abs(tv - cv) < 1e-10);  // conversion is exact
        CHECK(std::abs(tv - ev) < 1e-9);   // same least-squares optimum
    }
}

TEST_CASE("custom bases cannot be rewritten in exponential form") {
    series::BasisSpec basis;
    basis.kind = series::BasisKind::custom;
    basis.domain = {0.0, 1.0, false};
    basis.custom_basis = {[](double) { return Complex(1.0, 0.0); }};
    series::TruncatedSeries s;
    s.basis = basis;
    s.coeffs = Eigen::VectorXcd::Ones(1);
    CHECK_THROWS_AS(series::to_exponential(s), ContractViolation);
}

TEST_CASE("variational solve agrees with the closed form on a small fit") {
    const auto target = [](double x) {
        return 0.4 + 0.3 * std::cos(2.0 * kPi * x) + 0.1 * std::sin(2.0 * kPi * x);
    };
    const auto basis = exp_basis(2, 0.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 33);

    const auto closed = series::fit(target, basis, mesh);

    series::FitOptions options;
    options.method = series::FitMethod::variational;
    options.coeff_bound = 2.0;
    options.optimizer.method = optim::Method::conjugate_gradient;
    options.optimizer.layers = 3;
    options.optimizer.max_iters = 800;
    options.optimizer.restarts = 2;
    options.optimizer.seed = 21;
    options.optimizer.tol_f = 1e-14;
    options.optimizer.tol_g = 1e-8;
    const auto variational = series::fit(target, basis, mesh, options);

    double gap = 0.0;
    for (int i = 0; i <= 100; ++i) {
        const double x = i / 100.0;
        gap = std::max(gap, std::abs(series::evaluate_series(closed, x) -
                                     series::evaluate_series(variational, x)));
    }
    CHECK(gap < 1e-2);
}

TEST_CASE("ill-conditioned closed-form fits fall back to the variational route") {
    // Two identical basis functions make the normal matrix singular; the fit
    // must still return finite coefficients through the fallback.
    series::BasisSpec basis;
    basis.kind = series::BasisKind::custom;
    basis.domain = {0.0, 1.0, false};
    basis.custom_basis = {
        [](double) { return Complex(1.0, 0.0); },
        [](double) { return Complex(1.0, 0.0); },
    };
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 9);
    series::FitOptions options;
    options.coeff_bound = 3.0;
    options.optimizer.method = optim::Method::conjugate_gradient;
    options.optimizer.layers = 2;
    options.optimizer.max_iters = 400;
    options.optimizer.restarts = 1;
    options.optimizer.seed = 4;
    const auto fit = series::fit([](double) { return 2.0; }, basis, mesh, options);
    REQUIRE(fit.coeffs.size() == 2);
    CHECK(std::isfinite(fit.coeffs[0].real()));
    // The two copies must jointly reproduce the constant.
    CHECK(std::abs(series::evaluate_series(fit, 0.5) - 2.0) < 0.2);
}

TEST_CASE("fit rejects non-finite samples") {
    const auto basis = exp_basis(2, 0.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 9);
    CHECK_THROWS_AS(
        series::fit([](double x) { return 1.0 / (x - 0.5); }, basis, mesh),
        ContractViolation);
}

TEST_CASE("lp fitting with p = 2 tracks the least-squares answer") {
    const auto target = [](double x) { return 0.5 + 0.2 * std::sin(2.0 * kPi * x); };
    const auto basis = exp_basis(2, 0.0, 1.0);
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, 25);
    const auto closed = series::fit(target, basis, mesh);

    series::FitOptions options;
    options.method = series::FitMethod::variational_lp;
    options.lp = 2.0;
    options.coeff_bound = 2.0;
    options.optimizer.method = optim::Method::conjugate_gradient;
    options.optimizer.layers = 3;
    options.optimizer.max_iters = 800;
    options.optimizer.restarts = 2;
    options.optimizer.seed = 13;
    options.optimizer.tol_f = 1e-14;
    const auto lp = series::fit(target, basis, mesh, options);

    double gap = 0.0;
    for (int i = 0; i <= 60; ++i) {
        const double x = i / 60.0;
        gap = std::max(gap, std::abs(series::evaluate_series(closed, x) -
                                     series::evaluate_series(lp, x)));
    }
    CHECK(gap < 2e-2);
}
