#pragma once

#include <cmath>
#include <functional>

namespace blochopt::reference {

/// Adaptive Simpson quadrature with interval-halving error control.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-12) {
    struct Rec {
        const std::function<double(double)>& f;
        double run(double lo, double hi, double flo, double fmid, double fhi,
                   double whole, double eps, int depth) const {
            const double mid = 0.5 * (lo + hi);
            const double lmid = 0.5 * (lo + mid);
            const double rmid = 0.5 * (mid + hi);
            const double flmid = f(lmid);
            const double frmid = f(rmid);
            const double left = (mid - lo) / 6.0 * (flo + 4.0 * flmid + fmid);
            const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frmid + fhi);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * eps)
                return left + right + delta / 15.0;
            return run(lo, mid, flo, flmid, fmid, left, eps / 2.0, depth - 1) +
                   run(mid, hi, fmid, frmid, fhi, right, eps / 2.0, depth - 1);
        }
    };
    const double mid = 0.5 * (a + b);
    const double fa = f(a), fm = f(mid), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}.run(a, b, fa, fm, fb, whole, tol, 48);
}

/// Fresnel sine integral S(z) = int_0^z sin(pi t^2 / 2) dt.
inline double fresnel_s(double z) {
    if (z == 0.0) return 0.0;
    const double pi = 3.14159265358979323846;
    const double mag = adaptive_simpson(
        [pi](double t) { return std::sin(pi * t * t / 2.0); }, 0.0,
        std::abs(z), 1e-13);
    return z > 0.0 ? mag : -mag;
}

/// Antiderivative of x^2 cos(x^2):
/// (2 x sin(x^2) - sqrt(2 pi) S(sqrt(2/pi) x)) / 4, evaluated between a and b.
inline double chirp_integral(double a, double b) {
    const double pi = 3.14159265358979323846;
    const auto F = [pi](double x) {
        return 0.25 * (2.0 * x * std::sin(x * x) -
                       std::sqrt(2.0 * pi) * fresnel_s(std::sqrt(2.0 / pi) * x));
    };
    return F(b) - F(a);
}

/// int_a^x exp(-t^2) dt through the standard error function.
inline double gauss_running(double a, double x) {
    const double spi = std::sqrt(3.14159265358979323846);
    return 0.5 * spi * (std::erf(x) - std::erf(a));
}

/// Solution of x f' + f = f^2 x^2 log x with f(1) = 1 on [1, 2]:
/// f(x) = 1 / (x^2 (1 - log x)). Check via u = 1/f = x^2 - x^2 log x:
/// the equation becomes u - x u' = x^2 log x, and indeed
/// u - x u' = (x^2 - x^2 log x) - (x^2 - 2 x^2 log x) = x^2 log x.
inline double bernoulli_exact(double x) {
    return 1.0 / (x * x * (1.0 - std::log(x)));
}

/// Solution of g' = -g + 6 f, f' = g - 2 f with g(0) = 2, f(0) = 0:
/// eigenpairs (1, g = 3f) and (-4, g = -2f) give
/// g = (6/5) e^x + (4/5) e^{-4x}, f = (2/5)(e^x - e^{-4x}).
inline void coupled_exact(double x, double& g, double& f) {
    const double ep = std::exp(x);
    const double em = std::exp(-4.0 * x);
    g = 1.2 * ep + 0.8 * em;
    f = 0.4 * (ep - em);
}

}  // namespace blochopt::reference
