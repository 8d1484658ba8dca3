#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "blochopt/errors.hpp"

namespace blochopt::cli {

/// |approx - exact| / max(|exact|, 1e-12); the floor keeps zeros of the exact
/// curve from blowing up the column.
double rel_error(double approx, double exact);

struct CurvePoint {
    double x = 0.0;
    double exact = 0.0;
    double approx = 0.0;
};

/// Writes header x,exact,approx,rel_error; every value as %.17g so reruns are
/// byte-identical.
void write_curve_csv(const std::string& path,
                     const std::vector<CurvePoint>& points);

std::vector<CurvePoint> read_curve_csv(const std::string& path);

/// Per-benchmark artifacts. `metrics` values are recomputed from the CSV
/// files after writing them, never copied from in-memory results.
struct BenchmarkResult {
    std::string name;
    nlohmann::json metrics;
    std::vector<std::string> csv_paths;
    double wall_seconds = 0.0;
};

/// trig14, nested4, nested28 (optimization suites over 5 seeds), step, gauss,
/// chirp (fits and integrals), bernoulli, coupled (differential equations).
std::vector<std::string> benchmark_names();

BenchmarkResult run_benchmark(const std::string& name, std::uint64_t seed,
                              const std::string& out_dir);

/// Full command-line front end; returns the process exit code
/// (0 success, 2 validation failure, 3 non-convergence under
/// --require-convergence, 1 unexpected fault).
int run_cli(int argc, const char* const* argv);

}  // namespace blochopt::cli
