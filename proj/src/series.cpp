#include "blochopt/series.hpp"

#include <algorithm>
#include <cmath>

namespace blochopt::series {

namespace {
constexpr double kPi = 3.14159265358979323846;
using cd = std::complex<double>;
}  // namespace

int BasisSpec::n_coeffs() const {
    switch (kind) {
        case BasisKind::fourier_exp: return 2 * (K / 2) + 1;
        case BasisKind::fourier_trig: return 2 * K + 1;
        case BasisKind::custom: return int(custom_basis.size());
    }
    return 0;
}

int BasisSpec::real_param_count() const {
    return kind == BasisKind::fourier_trig ? n_coeffs() : 2 * n_coeffs();
}

int BasisSpec::mode_of(int idx) const {
    switch (kind) {
        case BasisKind::fourier_exp: return idx - K / 2;
        case BasisKind::fourier_trig:
            return idx == 0 ? 0 : (idx <= K ? idx : idx - K);
        case BasisKind::custom: return idx;
    }
    return 0;
}

std::complex<double> BasisSpec::eval_basis(int idx, double x) const {
    if (idx < 0 || idx >= n_coeffs())
        throw ContractViolation("eval_basis: index out of range");
    switch (kind) {
        case BasisKind::fourier_exp: {
            const double w = 2.0 * kPi * mode_of(idx) / period();
            return std::exp(cd(0.0, w * x));
        }
        case BasisKind::fourier_trig: {
            if (idx == 0) return cd(1.0, 0.0);
            const double w = 2.0 * kPi * mode_of(idx) / period();
            return idx <= K ? cd(std::cos(w * x), 0.0) : cd(std::sin(w * x), 0.0);
        }
        case BasisKind::custom: return custom_basis[idx](x);
    }
    return cd(0.0, 0.0);
}

double BasisSpec::weight_at(double x) const {
    return weight ? weight(x) : 1.0 / period();
}

Mesh Mesh::uniform(const VariableDomain& domain, int M) {
    if (M < 2) throw ContractViolation("Mesh::uniform: need at least 2 points");
    if (!(domain.lo < domain.hi))
        throw ContractViolation("Mesh::uniform: domain requires lo < hi");
    Mesh mesh;
    mesh.points.resize(M);
    mesh.deltas.resize(M);
    const double h = (domain.hi - domain.lo) / double(M - 1);
    for (int mu = 0; mu < M; ++mu) {
        mesh.points[mu] = domain.lo + h * mu;
        mesh.deltas[mu] = (mu == 0 || mu == M - 1) ? h / 2.0 : h;
    }
    mesh.points[M - 1] = domain.hi;
    return mesh;
}

double QuadraticForm::value(const Eigen::VectorXcd& c) const {
    const cd quad = c.dot(A * c);  // Eigen's dot conjugates the left argument
    const cd lin = b.dot(c);
    return quad.real() + 2.0 * lin.real() + q;
}

double evaluate_series(const TruncatedSeries& s, double x) {
    return evaluate_series_complex(s, x).real();
}

std::complex<double> evaluate_series_complex(const TruncatedSeries& s, double x) {
    const int n = s.basis.n_coeffs();
    if (s.coeffs.size() != n)
        throw ContractViolation("evaluate_series: coefficient count mismatch");
    cd acc(0.0, 0.0);
    for (int idx = 0; idx < n; ++idx) acc += s.coeffs[idx] * s.basis.eval_basis(idx, x);
    return acc;
}

TruncatedSeries to_exponential(const TruncatedSeries& s) {
    if (s.basis.kind == BasisKind::fourier_exp) return s;
    if (s.basis.kind == BasisKind::custom)
        throw ContractViolation("to_exponential: custom bases are not convertible");
    const int K = s.basis.K;
    TruncatedSeries out;
    out.basis.kind = BasisKind::fourier_exp;
    out.basis.K = 2 * K;  // modes -K .. K
    out.basis.domain = s.basis.domain;
    out.basis.weight = s.basis.weight;
    out.residual_norm = s.residual_norm;
    out.coeffs = Eigen::VectorXcd::Zero(2 * K + 1);
    out.coeffs[K] = s.coeffs[0];
    for (int l = 1; l <= K; ++l) {
        const cd a = s.coeffs[l];
        const cd b = s.coeffs[K + l];
        out.coeffs[K + l] = 0.5 * (a - cd(0, 1) * b);
        out.coeffs[K - l] = 0.5 * (a + cd(0, 1) * b);
    }
    return out;
}

QuadraticForm assemble(const Eigen::VectorXd& f_samples, const BasisSpec& basis,
                       const Mesh& mesh) {
    const int M = int(mesh.points.size());
    if (int(f_samples.size()) != M)
        throw ContractViolation("assemble: need one sample per mesh point");
    if (mesh.deltas.size() != M)
        throw ContractViolation("assemble: mesh deltas/points size mismatch");
    const double P = basis.period();
    if (std::abs(mesh.deltas.sum() - P) > 1e-12 * std::max(1.0, P))
        throw ContractViolation("assemble: mesh cells do not tile the domain");
    const int n = basis.n_coeffs();
    if (n < 1) throw ContractViolation("assemble: empty basis");

    Eigen::MatrixXcd G(M, n);
    Eigen::VectorXd wdx(M);
    for (int mu = 0; mu < M; ++mu) {
        const double x = mesh.points[mu];
        wdx[mu] = basis.weight_at(x) * mesh.deltas[mu];
        for (int idx = 0; idx < n; ++idx) G(mu, idx) = basis.eval_basis(idx, x);
    }
    QuadraticForm qf;
    const Eigen::MatrixXcd Gw = wdx.asDiagonal() * G;
    qf.A = G.adjoint() * Gw;
    qf.b = -G.adjoint() * (wdx.cwiseProduct(f_samples).eval()).cast<cd>();
    qf.q = wdx.dot(f_samples.cwiseProduct(f_samples));
    return qf;
}

Eigen::VectorXcd solve_closed_form(const QuadraticForm& qf,
                                   double cond_threshold) {
    const Eigen::Index n = qf.A.rows();
    if (qf.A.cols() != n || qf.b.size() != n)
        throw ContractViolation("solve_closed_form: shape mismatch");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(qf.A);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(n - 1);
    const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (!(cond < cond_threshold))
        throw IllConditioned("solve_closed_form: condition estimate " +
                                 std::to_string(cond) + " exceeds threshold",
                             cond);
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(qf.A);
    Eigen::VectorXcd c = ldlt.solve(-qf.b);
    const double bnorm = qf.b.norm();
    for (int pass = 0; pass < 3; ++pass) {
        const Eigen::VectorXcd resid = qf.A * c + qf.b;
        if (resid.norm() <= 1e-9 * std::max(bnorm, 1e-300)) break;
        c -= ldlt.solve(resid);
    }
    return c;
}

Eigen::VectorXcd coeffs_from_symmetric_dof(const Eigen::VectorXd& u) {
    if (u.size() % 2 == 0)
        throw ContractViolation("coeffs_from_symmetric_dof: even size");
    const int m = int(u.size()) / 2;
    Eigen::VectorXcd c(2 * m + 1);
    c[m] = cd(u[0], 0.0);
    for (int l = 1; l <= m; ++l) {
        const cd cl(u[2 * l - 1], u[2 * l]);
        c[m + l] = cl;
        c[m - l] = std::conj(cl);
    }
    return c;
}

Eigen::VectorXd symmetric_dof_from_coeffs(const Eigen::VectorXcd& c) {
    if (c.size() % 2 == 0)
        throw ContractViolation("symmetric_dof_from_coeffs: even size");
    const int m = int(c.size()) / 2;
    Eigen::VectorXd u(2 * m + 1);
    u[0] = c[m].real();
    for (int l = 1; l <= m; ++l) {
        u[2 * l - 1] = c[m + l].real();
        u[2 * l] = c[m + l].imag();
    }
    return u;
}

namespace {

bool conjugate_symmetric(const Eigen::VectorXcd& b) {
    if (b.size() % 2 == 0) return false;
    const int m = int(b.size()) / 2;
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (std::abs(b[m].imag()) > 1e-9 * scale) return false;
    for (int l = 1; l <= m; ++l)
        if (std::abs(b[m + l] - std::conj(b[m - l])) > 1e-9 * scale) return false;
    return true;
}

}  // namespace

Eigen::VectorXcd solve_variational(const QuadraticForm& qf,
                                   const BasisSpec& basis,
                                   const optim::OptimizerConfig& config,
                                   double coeff_bound) {
    const int n = basis.n_coeffs();
    if (qf.A.rows() != n)
        throw ContractViolation("solve_variational: basis/quadratic mismatch");
    if (!(coeff_bound > 0.0))
        throw ContractViolation("solve_variational: coeff_bound must be positive");

    enum class Packing { real_direct, symmetric, full_complex };
    Packing packing = Packing::full_complex;
    if (basis.kind == BasisKind::fourier_trig)
        packing = Packing::real_direct;
    else if (basis.kind == BasisKind::fourier_exp && conjugate_symmetric(qf.b))
        packing = Packing::symmetric;

    int dof = 0;
    switch (packing) {
        case Packing::real_direct: dof = n; break;
        case Packing::symmetric: dof = n; break;  // c0 plus Re/Im per pair
        case Packing::full_complex: dof = 2 * n; break;
    }

    auto unpack = [&](const Eigen::VectorXd& u) -> Eigen::VectorXcd {
        switch (packing) {
            case Packing::real_direct: return u.cast<cd>();
            case Packing::symmetric: return coeffs_from_symmetric_dof(u);
            case Packing::full_complex: {
                Eigen::VectorXcd c(n);
                for (int i = 0; i < n; ++i) c[i] = cd(u[2 * i], u[2 * i + 1]);
                return c;
            }
        }
        return {};
    };

    optim::ContinuousProblem problem;
    problem.n_vars = dof;
    problem.domains.assign(dof, {-coeff_bound, coeff_bound, false});
    problem.objective = [&qf, unpack](const Eigen::VectorXd& u) {
        return qf.value(unpack(u));
    };

    optim::OptimizerConfig cfg = config;
    if (!cfg.warm_start_x) cfg.warm_start_x = Eigen::VectorXd::Zero(dof);

    const optim::OptimizationResult result = optim::minimize(problem, cfg);
    return unpack(result.best_x);
}

TruncatedSeries fit(const std::function<double(double)>& f,
                    const BasisSpec& basis, const Mesh& mesh,
                    const FitOptions& options) {
    if (!f) throw ContractViolation("fit: target callable is empty");
    const int M = int(mesh.points.size());
    Eigen::VectorXd samples(M);
    for (int mu = 0; mu < M; ++mu) samples[mu] = f(mesh.points[mu]);
    if (!samples.allFinite())
        throw ContractViolation("fit: target is not finite on the mesh");

    const double fmax = samples.cwiseAbs().maxCoeff();
    const double bound =
        options.coeff_bound > 0.0 ? options.coeff_bound : 4.0 * std::max(fmax, 1e-6);

    TruncatedSeries out;
    out.basis = basis;

    if (options.method == FitMethod::variational_lp) {
        // Direct mesh objective; no quadratic form involved.
        const int n = basis.n_coeffs();
        Eigen::MatrixXcd G(M, n);
        Eigen::VectorXd wdx(M);
        for (int mu = 0; mu < M; ++mu) {
            wdx[mu] = basis.weight_at(mesh.points[mu]) * mesh.deltas[mu];
            for (int idx = 0; idx < n; ++idx)
                G(mu, idx) = basis.eval_basis(idx, mesh.points[mu]);
        }
        // Real target: trig coefficients are real, exponential ones collapse
        // to conjugate-symmetric pairs; custom bases keep full complex freedom.
        const int dof = basis.kind == BasisKind::custom ? 2 * n : n;
        auto unpack = [&](const Eigen::VectorXd& u) -> Eigen::VectorXcd {
            if (basis.kind == BasisKind::fourier_trig) return u.cast<cd>();
            if (basis.kind == BasisKind::fourier_exp)
                return coeffs_from_symmetric_dof(u);
            Eigen::VectorXcd c(n);
            for (int i = 0; i < n; ++i) c[i] = cd(u[2 * i], u[2 * i + 1]);
            return c;
        };
        const double p = options.lp;
        optim::ContinuousProblem problem;
        problem.n_vars = dof;
        problem.domains.assign(dof, {-bound, bound, false});
        problem.objective = [&](const Eigen::VectorXd& u) {
            const Eigen::VectorXcd vals = G * unpack(u);
            double acc = 0.0;
            for (int mu = 0; mu < M; ++mu)
                acc += wdx[mu] *
                       std::pow(std::abs(vals[mu] - cd(samples[mu], 0.0)), p);
            return acc;
        };
        optim::OptimizerConfig cfg = options.optimizer;
        if (!cfg.warm_start_x) cfg.warm_start_x = Eigen::VectorXd::Zero(dof);
        out.coeffs = unpack(optim::minimize(problem, cfg).best_x);
        const QuadraticForm qf = assemble(samples, basis, mesh);
        out.residual_norm = std::sqrt(std::max(0.0, qf.value(out.coeffs)));
        return out;
    }

    const QuadraticForm qf = assemble(samples, basis, mesh);
    if (options.method == FitMethod::closed_form) {
        try {
            out.coeffs = solve_closed_form(qf, options.cond_threshold);
        } catch (const IllConditioned&) {
            out.coeffs = solve_variational(qf, basis, options.optimizer, bound);
        }
    } else {
        out.coeffs = solve_variational(qf, basis, options.optimizer, bound);
    }
    out.residual_norm = std::sqrt(std::max(0.0, qf.value(out.coeffs)));
    return out;
}

}  // namespace blochopt::series
