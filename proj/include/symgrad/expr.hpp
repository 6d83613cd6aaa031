#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace symgrad::symsearch {

// Operator alphabet: every entry is differentiable on its domain, which is
// what lets gradient fitness reject candidates only through domain failures.
enum class Op : std::uint8_t {
    constant,
    variable,
    neg,
    square,
    sin,
    cos,
    exp,
    add,
    sub,
    mul,
    div,
};

int arity(Op op);
std::string op_name(Op op);
Op parse_op(const std::string& name);  // throws on unknown name
bool is_terminal(Op op);

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Node {
    Op op = Op::constant;
    int var = 0;         // Op::variable only
    double value = 0.0;  // Op::constant only
};

// Expression tree stored in prefix order; a subtree is a contiguous range.
struct Expr {
    std::vector<Node> nodes;

    int complexity() const { return int(nodes.size()); }
    bool empty() const { return nodes.empty(); }

    static Expr constant(double v) { return Expr{{Node{Op::constant, 0, v}}}; }
    static Expr variable(int i) { return Expr{{Node{Op::variable, i, 0.0}}}; }
};

// End (exclusive) of the subtree rooted at node i.
std::size_t subtree_end(const Expr& e, std::size_t i);

// Prefix grammar: "(add (mul x0 x0) 1.5)". When max_vars >= 0, variable
// indices must stay below it.
Expr parse_expr(const std::string& text, int max_vars = -1);
std::string format_expr(const Expr& e);

// Largest variable index + 1.
int min_dimension(const Expr& e);

// Division by |denominator| < 1e-12 or any non-finite intermediate is a
// domain failure, reported as nullopt / false and consumed by fitness.
constexpr double kDivFloor = 1e-12;

std::optional<double> eval_expr(const Expr& e, std::span<const double> x);

// Forward-mode value plus full gradient in one pass. grad.size() == x.size().
bool eval_with_gradient(const Expr& e, std::span<const double> x, double& value,
                        std::span<double> grad);

std::optional<std::vector<double>> grad_expr(const Expr& e, std::span<const double> x);

// Replace operator nodes whose operands are all constants by their value
// (skipped when evaluation would be a domain failure).
Expr fold_constants(const Expr& e);

}  // namespace symgrad::symsearch
