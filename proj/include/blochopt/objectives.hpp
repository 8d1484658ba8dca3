#pragma once

#include <string>
#include <vector>

#include "blochopt/optimizer.hpp"

namespace blochopt::objectives {

/// Built-in optimization target. `expression` is a parser-ready twin of the
/// native implementation; tests hold the two routes against each other.
struct BuiltIn {
    std::string name;
    int n_vars = 0;
    optim::ContinuousProblem problem;
    std::string expression;
};

/// Known names: trig14 (separable trigonometric sum, 14 variables),
/// nested4 (nested ratio, 4 variables), nested28 (deeply nested mix,
/// 28 variables). All live on [0, 2*pi) per variable.
BuiltIn built_in_objective(const std::string& name);

std::vector<std::string> built_in_names();

}  // namespace blochopt::objectives
