#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "blochopt/encoding.hpp"
#include "blochopt/errors.hpp"
#include "blochopt/optimizer.hpp"

namespace blochopt::series {

using encoding::VariableDomain;

enum class BasisKind { fourier_exp, fourier_trig, custom };

/// Truncated basis over one variable. The fundamental period equals the
/// domain length P = hi - lo.
///
/// fourier_exp: functions exp(i 2 pi l x / P) for l = -K/2 .. K/2 (integer
/// division), indexed low mode first; K even gives K + 1 functions, K odd
/// gives K.
/// fourier_trig: 1, cos(2 pi l x / P) for l = 1..K, then sin likewise;
/// 2K + 1 functions with real coefficients.
/// custom: caller-supplied complex functions.
struct BasisSpec {
    BasisKind kind = BasisKind::fourier_exp;
    int K = 0;
    VariableDomain domain;
    std::vector<std::function<std::complex<double>(double)>> custom_basis;
    std::function<double(double)> weight;  // null means the default 1 / P

    int n_coeffs() const;
    int real_param_count() const;  // real degrees of freedom before symmetry
    int max_mode() const { return K / 2; }
    double period() const { return domain.hi - domain.lo; }
    /// Mode number of a fourier_exp index (idx - K/2); harmonic of a trig index.
    int mode_of(int idx) const;
    std::complex<double> eval_basis(int idx, double x) const;
    double weight_at(double x) const;
};

/// Quadrature mesh: points with positive cell widths that tile the domain.
/// Cell widths must sum to the domain length within 1e-12 (relative).
struct Mesh {
    Eigen::VectorXd points;
    Eigen::VectorXd deltas;

    /// M >= 2 points including both endpoints; trapezoidal cell widths
    /// (half cells at the ends).
    static Mesh uniform(const VariableDomain& domain, int M);
};

/// Weighted least-squares objective in coefficient space:
/// F(c) = c^H A c + 2 Re(b^H c) + q, with A Hermitian positive semidefinite.
struct QuadraticForm {
    Eigen::MatrixXcd A;
    Eigen::VectorXcd b;
    double q = 0.0;

    double value(const Eigen::VectorXcd& c) const;
};

struct TruncatedSeries {
    BasisSpec basis;
    Eigen::VectorXcd coeffs;
    double residual_norm = 0.0;
};

/// Real part of the series at x (imaginary parts cancel for conjugate-
/// symmetric coefficients; they are discarded otherwise).
double evaluate_series(const TruncatedSeries& s, double x);
std::complex<double> evaluate_series_complex(const TruncatedSeries& s, double x);

/// Exact rewrite of a trig series in exponential form (modes -K .. K).
/// Exponential input is returned unchanged; custom bases are not convertible.
TruncatedSeries to_exponential(const TruncatedSeries& s);

/// Builds the least-squares quadratic from samples of the target on the mesh:
/// A = sum_mu w conj(g_l) g_l' dx, b = -sum_mu w conj(g_l) f dx, q = sum w f^2 dx.
QuadraticForm assemble(const Eigen::VectorXd& f_samples, const BasisSpec& basis,
                       const Mesh& mesh);

/// Stationary point of the quadratic (A c = -b) through an LDLT factorization
/// with iterative refinement. Throws IllConditioned when the spectral
/// condition estimate exceeds cond_threshold.
Eigen::VectorXcd solve_closed_form(const QuadraticForm& qf,
                                   double cond_threshold = 1e10);

/// Packs conjugate-symmetric coefficients (c_{-l} = conj(c_l)) into real
/// degrees of freedom [c_0, Re c_1, Im c_1, ..., Re c_m, Im c_m] and back.
Eigen::VectorXcd coeffs_from_symmetric_dof(const Eigen::VectorXd& u);
Eigen::VectorXd symmetric_dof_from_coeffs(const Eigen::VectorXcd& c);

/// Minimizes the quadratic through the circuit optimizer. Coefficient
/// variables live in [-coeff_bound, coeff_bound]. For fourier_exp problems
/// with conjugate-symmetric b the search collapses to the real-series
/// degrees of freedom; otherwise every coefficient contributes its real and
/// imaginary part.
Eigen::VectorXcd solve_variational(const QuadraticForm& qf,
                                   const BasisSpec& basis,
                                   const optim::OptimizerConfig& config,
                                   double coeff_bound);

enum class FitMethod { closed_form, variational, variational_lp };

struct FitOptions {
    FitMethod method = FitMethod::closed_form;
    double coeff_bound = 0.0;  // 0 = 4 * max |f| on the mesh
    double lp = 2.0;           // exponent for variational_lp
    double cond_threshold = 1e10;
    optim::OptimizerConfig optimizer;
};

/// Samples f on the mesh and fits the basis coefficients. closed_form falls
/// back to the variational route when the normal matrix is ill-conditioned.
/// variational_lp skips the quadratic and minimizes the mesh-weighted
/// sum of |s(x) - f(x)|^p directly.
TruncatedSeries fit(const std::function<double(double)>& f,
                    const BasisSpec& basis, const Mesh& mesh,
                    const FitOptions& options = {});

}  // namespace blochopt::series
