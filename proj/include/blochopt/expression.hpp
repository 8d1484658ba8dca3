#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blochopt/errors.hpp"

namespace blochopt::expr {

/// Parsed scalar expression over variables x1, x2, ... (1-based in the text,
/// mapped to vector indices 0, 1, ...). Supported: decimal literals, + - * /,
/// unary minus, ^ (right associative), parentheses, and the calls sin, cos,
/// log (natural), exp, sqrt, pow(a, b).
class CompiledExpression {
  public:
    /// Evaluates with IEEE semantics: division by zero, log of a negative
    /// number and friends flow through as inf/nan rather than throwing.
    double eval(const Eigen::VectorXd& x) const;

    /// Highest variable index referenced, so nested28 reports 28. eval
    /// requires x.size() >= n_vars().
    int n_vars() const { return max_var_; }

    const std::string& text() const { return text_; }

  private:
    friend CompiledExpression parse_expression(const std::string&);
    friend struct Parser;

    enum class Op { constant, variable, add, sub, mul, div, neg, pow_op, call };
    enum class Fn { sin, cos, log, exp, sqrt, pow };
    struct Node {
        Op op;
        double value = 0.0;  // constant
        int var = 0;         // variable (0-based)
        Fn fn = Fn::sin;     // call
        int lhs = -1;
        int rhs = -1;
    };

    double eval_node(int node, const Eigen::VectorXd& x) const;

    std::vector<Node> nodes_;
    int root_ = -1;
    int max_var_ = 0;
    std::string text_;
};

/// Parses or throws ParseError whose position is the byte offset of the
/// offending token in `text`.
CompiledExpression parse_expression(const std::string& text);

}  // namespace blochopt::expr
