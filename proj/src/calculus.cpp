#include "blochopt/calculus.hpp"

#include <cmath>

namespace blochopt::calculus {

namespace {

using cd = std::complex<double>;
constexpr double kPi = 3.14159265358979323846;

// Antiderivative of mode l evaluated between lo and hi.
cd mode_integral(const series::BasisSpec& basis, int idx, double lo, double hi) {
    const int l = basis.mode_of(idx);
    if (l == 0) return cd(hi - lo, 0.0);
    const double w = 2.0 * kPi * l / basis.period();
    return (std::exp(cd(0.0, w * hi)) - std::exp(cd(0.0, w * lo))) / cd(0.0, w);
}

series::TruncatedSeries require_exponential(const series::TruncatedSeries& s) {
    if (s.basis.kind == series::BasisKind::custom)
        throw ContractViolation("integrate_series: custom bases have no closed form");
    return series::to_exponential(s);
}

}  // namespace

IntegralResult integrate_series(const series::TruncatedSeries& s, double a,
                                double b) {
    const double lo = s.basis.domain.lo;
    const double hi = s.basis.domain.hi;
    const double tol = 1e-12 * std::max(1.0, hi - lo);
    if (std::abs(a - lo) > tol || std::abs(b - hi) > tol)
        throw ContractViolation(
            "integrate_series: bounds must equal the fit domain");

    IntegralResult out;
    out.a = a;
    out.b = b;
    out.series = require_exponential(s);
    const int n = out.series.basis.n_coeffs();
    out.mode_terms.resize(n);
    cd total(0.0, 0.0);
    for (int idx = 0; idx < n; ++idx) {
        out.mode_terms[idx] =
            out.series.coeffs[idx] * mode_integral(out.series.basis, idx, lo, hi);
        total += out.mode_terms[idx];
    }
    out.value = total.real();
    return out;
}

double running_integral(const series::TruncatedSeries& s, double x) {
    const double lo = s.basis.domain.lo;
    const double hi = s.basis.domain.hi;
    const double tol = 1e-12 * std::max(1.0, hi - lo);
    if (x < lo - tol || x > hi + tol)
        throw ContractViolation("running_integral: x outside the fit domain");
    const series::TruncatedSeries es = require_exponential(s);
    cd total(0.0, 0.0);
    for (int idx = 0; idx < es.basis.n_coeffs(); ++idx)
        total += es.coeffs[idx] * mode_integral(es.basis, idx, lo, x);
    return total.real();
}

std::function<double(double)> running_integral_fn(series::TruncatedSeries s) {
    series::TruncatedSeries es = require_exponential(s);
    return [es = std::move(es)](double x) { return running_integral(es, x); };
}

IntegralResult definite_integral(const std::function<double(double)>& f,
                                 double a, double b, int K, int M,
                                 const series::FitOptions& options) {
    if (!(a < b)) throw ContractViolation("definite_integral: need a < b");
    series::BasisSpec basis;
    basis.kind = series::BasisKind::fourier_exp;
    basis.K = K;
    basis.domain = {a, b, false};
    const series::Mesh mesh = series::Mesh::uniform(basis.domain, M);
    const series::TruncatedSeries fitted = series::fit(f, basis, mesh, options);
    return integrate_series(fitted, a, b);
}

}  // namespace blochopt::calculus
