#include "blochopt/objectives.hpp"

#include <cmath>

namespace blochopt::objectives {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<encoding::VariableDomain> angle_domains(int n) {
    return std::vector<encoding::VariableDomain>(n, {0.0, 2.0 * kPi, true});
}

double trig14_native(const Eigen::VectorXd& x) {
    double f = 0.0;
    for (int i = 0; i < 5; ++i) f += std::sin(x[i]);
    for (int i = 5; i < 10; ++i) f += std::cos(x[i]);
    for (int i = 10; i < 14; ++i) f += 4.0 * std::cos(x[i]) * std::cos(x[i]);
    return f;
}

double nested4_native(const Eigen::VectorXd& x) {
    return std::sin(x[0] / (x[3] * std::cos(std::log(x[0] * x[0] * x[1] / x[2]))));
}

double nested28_native(const Eigen::VectorXd& v) {
    // 1-based aliases keep the term structure readable.
    auto x = [&](int i) { return v[i - 1]; };
    const double t1 = x(1) / x(2) *
                      std::cos(std::log(std::pow(x(1), 3) * x(3) / x(4))) *
                      std::sin(x(5) / x(2));
    const double t2 = std::cos(std::sqrt(x(6)) * x(1) / (x(5) * x(5)));
    const double t3 = -x(9) * x(9) * (x(10) - x(11) * x(1) / x(4));
    const double t4 = std::sin(std::pow(x(7), 3) / (x(1) * x(3) + x(4))) *
                      std::cos(x(8) / x(3) * std::sin(x(7)));
    const double t5 = std::cos(x(12) * x(12) - x(9) * x(10));
    const double t6 = std::cos(x(21) * x(22) / x(23) - std::sin(x(24)));
    const double t7 =
        std::cos(x(13) * x(14)) *
        std::log(x(15) / x(16) +
                 x(14) * x(15) * x(15) *
                     std::sin(x(13) * std::cos(x(16) / x(15))));
    const double t8 = std::sin(x(1) * x(1) * x(17) / x(18) +
                               std::cos(std::cos(x(19) / x(20))));
    const double t9 = std::sin(x(25) * x(1) * std::sqrt(x(6)) * x(26));
    const double t10 = std::cos(x(27) * x(28) * x(28));
    const double t11 =
        -x(3) * std::log(x(27) * x(28) / x(21) - std::sin(x(5) * x(11)));
    return std::sin(t1 + t2 + t3 + t4 + t5 + t6 + t7 + t8 + t9 + t10 + t11);
}

const char* kTrig14Expr =
    "sin(x1)+sin(x2)+sin(x3)+sin(x4)+sin(x5)"
    "+cos(x6)+cos(x7)+cos(x8)+cos(x9)+cos(x10)"
    "+4*(cos(x11)^2+cos(x12)^2+cos(x13)^2+cos(x14)^2)";

const char* kNested4Expr = "sin(x1/(x4*cos(log(x1^2*x2/x3))))";

const char* kNested28Expr =
    "sin(x1/x2*cos(log(x1^3*x3/x4))*sin(x5/x2)"
    " + cos(sqrt(x6)*x1/x5^2)"
    " - x9^2*(x10 - x11*x1/x4)"
    " + sin(x7^3/(x1*x3 + x4))*cos(x8/x3*sin(x7))"
    " + cos(x12^2 - x9*x10)"
    " + cos(x21*x22/x23 - sin(x24))"
    " + cos(x13*x14)*log(x15/x16 + x14*x15^2*sin(x13*cos(x16/x15)))"
    " + sin(x1^2*x17/x18 + cos(cos(x19/x20)))"
    " + sin(x25*x1*sqrt(x6)*x26)"
    " + cos(x27*x28^2)"
    " - x3*log(x27*x28/x21 - sin(x5*x11)))";

}  // namespace

BuiltIn built_in_objective(const std::string& name) {
    BuiltIn b;
    b.name = name;
    if (name == "trig14") {
        b.n_vars = 14;
        b.problem.objective = trig14_native;
        b.expression = kTrig14Expr;
    } else if (name == "nested4") {
        b.n_vars = 4;
        b.problem.objective = nested4_native;
        b.expression = kNested4Expr;
    } else if (name == "nested28") {
        b.n_vars = 28;
        b.problem.objective = nested28_native;
        b.expression = kNested28Expr;
    } else {
        throw ContractViolation("built_in_objective: unknown name '" + name +
                                "'");
    }
    b.problem.n_vars = b.n_vars;
    b.problem.domains = angle_domains(b.n_vars);
    return b;
}

std::vector<std::string> built_in_names() {
    return {"trig14", "nested4", "nested28"};
}

}  // namespace blochopt::objectives
