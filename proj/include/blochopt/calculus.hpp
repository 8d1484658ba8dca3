#pragma once

#include <functional>

#include "blochopt/series.hpp"

namespace blochopt::calculus {

/// Definite integral of a fitted series. `mode_terms` holds one closed-form
/// contribution per exponential coefficient; their sum (real part) is `value`.
struct IntegralResult {
    double value = 0.0;
    double a = 0.0;
    double b = 0.0;
    series::TruncatedSeries series;  // exponential form actually integrated
    Eigen::VectorXcd mode_terms;
};

/// Integrates a Fourier series over exactly its fit domain [a, b]. Each
/// exponential mode integrates in closed form:
///   l = 0:   c_0 (b - a)
///   l != 0:  c_l (exp(i w_l b) - exp(i w_l a)) / (i w_l),  w_l = 2 pi l / (b - a),
/// which vanishes since the modes are periodic over the domain; only c_0
/// survives for a full-period integral. Trig series are converted exactly;
/// custom bases are rejected. Passing bounds other than the fit domain throws
/// ContractViolation, as the closed form is only valid there.
IntegralResult integrate_series(const series::TruncatedSeries& s, double a,
                                double b);

/// Antiderivative value int_lo^x of the series, for x inside the fit domain.
double running_integral(const series::TruncatedSeries& s, double x);

/// The running integral packaged as a callable.
std::function<double(double)> running_integral_fn(series::TruncatedSeries s);

/// Fits f with K exponential modes over an M-point uniform mesh on [a, b] and
/// integrates the fit over the whole interval.
IntegralResult definite_integral(const std::function<double(double)>& f,
                                 double a, double b, int K, int M,
                                 const series::FitOptions& options = {});

}  // namespace blochopt::calculus
