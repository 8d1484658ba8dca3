#include "blochopt/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace blochopt::expr {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;
    CompiledExpression out;

    explicit Parser(const std::string& t) : text(t) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(unsigned(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }

    [[noreturn]] void fail(const std::string& message, std::size_t at) {
        throw ParseError(message + " at position " + std::to_string(at), at);
    }

    int add_node(CompiledExpression::Node node) {
        out.nodes_.push_back(node);
        return int(out.nodes_.size()) - 1;
    }

    int binary(CompiledExpression::Op op, int lhs, int rhs) {
        CompiledExpression::Node n;
        n.op = op;
        n.lhs = lhs;
        n.rhs = rhs;
        return add_node(n);
    }

    // expr := term (('+'|'-') term)*
    int parse_expr() {
        int lhs = parse_term();
        while (true) {
            if (eat('+'))
                lhs = binary(CompiledExpression::Op::add, lhs, parse_term());
            else if (eat('-'))
                lhs = binary(CompiledExpression::Op::sub, lhs, parse_term());
            else
                return lhs;
        }
    }

    // term := unary (('*'|'/') unary)*
    int parse_term() {
        int lhs = parse_unary();
        while (true) {
            if (eat('*'))
                lhs = binary(CompiledExpression::Op::mul, lhs, parse_unary());
            else if (eat('/'))
                lhs = binary(CompiledExpression::Op::div, lhs, parse_unary());
            else
                return lhs;
        }
    }

    // unary := ('+'|'-')* power; -x^2 parses as -(x^2)
    int parse_unary() {
        if (eat('-')) {
            CompiledExpression::Node n;
            n.op = CompiledExpression::Op::neg;
            n.lhs = parse_unary();
            return add_node(n);
        }
        if (eat('+')) return parse_unary();
        return parse_power();
    }

    // power := atom ('^' unary)?   (right associative)
    int parse_power() {
        int base = parse_atom();
        if (eat('^'))
            return binary(CompiledExpression::Op::pow_op, base, parse_unary());
        return base;
    }

    int parse_atom() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of expression", pos);
        const char c = text[pos];

        if (c == '(') {
            ++pos;
            const int inner = parse_expr();
            if (!eat(')')) fail("expected ')'", pos);
            return inner;
        }
        if (std::isdigit(unsigned(c)) || c == '.') return parse_number();
        if (std::isalpha(unsigned(c))) return parse_name();
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    int parse_number() {
        const char* begin = text.c_str() + pos;
        char* end = nullptr;
        const double value = std::strtod(begin, &end);
        if (end == begin) fail("malformed number", pos);
        pos += std::size_t(end - begin);
        CompiledExpression::Node n;
        n.op = CompiledExpression::Op::constant;
        n.value = value;
        return add_node(n);
    }

    int parse_name() {
        const std::size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(unsigned(text[pos])) || text[pos] == '_'))
            ++pos;
        const std::string name = text.substr(start, pos - start);

        if (name.size() >= 2 && name[0] == 'x' &&
            std::isdigit(unsigned(name[1]))) {
            for (std::size_t i = 1; i < name.size(); ++i)
                if (!std::isdigit(unsigned(name[i])))
                    fail("malformed variable '" + name + "'", start);
            const long index = std::strtol(name.c_str() + 1, nullptr, 10);
            if (index < 1) fail("variables are numbered from x1", start);
            CompiledExpression::Node n;
            n.op = CompiledExpression::Op::variable;
            n.var = int(index) - 1;
            out.max_var_ = std::max(out.max_var_, int(index));
            return add_node(n);
        }

        using Fn = CompiledExpression::Fn;
        Fn fn = Fn::sin;
        int arity = 1;
        if (name == "sin") fn = Fn::sin;
        else if (name == "cos") fn = Fn::cos;
        else if (name == "log") fn = Fn::log;
        else if (name == "exp") fn = Fn::exp;
        else if (name == "sqrt") fn = Fn::sqrt;
        else if (name == "pow") { fn = Fn::pow; arity = 2; }
        else fail("unknown function '" + name + "'", start);

        if (!eat('(')) fail("expected '(' after '" + name + "'", pos);
        const int first = parse_expr();
        int second = -1;
        if (arity == 2) {
            if (!eat(',')) fail("pow needs two arguments", pos);
            second = parse_expr();
        }
        if (!eat(')')) fail("expected ')'", pos);

        CompiledExpression::Node n;
        n.op = CompiledExpression::Op::call;
        n.fn = fn;
        n.lhs = first;
        n.rhs = second;
        return add_node(n);
    }
};

CompiledExpression parse_expression(const std::string& text) {
    Parser parser(text);
    parser.skip_ws();
    if (parser.pos >= text.size())
        throw ParseError("empty expression at position 0", 0);
    const int root = parser.parse_expr();
    parser.skip_ws();
    if (parser.pos < text.size())
        parser.fail("unexpected trailing input", parser.pos);
    parser.out.root_ = root;
    parser.out.text_ = text;
    return std::move(parser.out);
}

double CompiledExpression::eval(const Eigen::VectorXd& x) const {
    if (root_ < 0) throw ContractViolation("eval: expression not parsed");
    if (int(x.size()) < max_var_)
        throw ContractViolation("eval: expression needs " +
                                std::to_string(max_var_) + " variables");
    return eval_node(root_, x);
}

double CompiledExpression::eval_node(int node, const Eigen::VectorXd& x) const {
    const Node& n = nodes_[node];
    switch (n.op) {
        case Op::constant: return n.value;
        case Op::variable: return x[n.var];
        case Op::add: return eval_node(n.lhs, x) + eval_node(n.rhs, x);
        case Op::sub: return eval_node(n.lhs, x) - eval_node(n.rhs, x);
        case Op::mul: return eval_node(n.lhs, x) * eval_node(n.rhs, x);
        case Op::div: return eval_node(n.lhs, x) / eval_node(n.rhs, x);
        case Op::neg: return -eval_node(n.lhs, x);
        case Op::pow_op:
            return std::pow(eval_node(n.lhs, x), eval_node(n.rhs, x));
        case Op::call: {
            const double a = eval_node(n.lhs, x);
            switch (n.fn) {
                case Fn::sin: return std::sin(a);
                case Fn::cos: return std::cos(a);
                case Fn::log: return std::log(a);
                case Fn::exp: return std::exp(a);
                case Fn::sqrt: return std::sqrt(a);
                case Fn::pow: return std::pow(a, eval_node(n.rhs, x));
            }
        }
    }
    return 0.0;
}

}  // namespace blochopt::expr
