#include "symgrad/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include <limits>
#include <vector>

#include "symgrad/dataset.hpp"
#include "symgrad/io.hpp"
#include "symgrad/symsearch.hpp"

namespace symgrad::symsearch {

int arity(Op op) {
    switch (op) {
        case Op::constant:
        case Op::variable: return 0;
        case Op::neg:
        case Op::square:
        case Op::sin:
        case Op::cos:
        case Op::exp: return 1;
        case Op::add:
        case Op::sub:
        case Op::mul:
        case Op::div: return 2;
    }
    return 0;
}

std::string op_name(Op op) {
    switch (op) {
        case Op::constant: return "const";
        case Op::variable: return "var";
        case Op::neg: return "neg";
        case Op::square: return "square";
        case Op::sin: return "sin";
        case Op::cos: return "cos";
        case Op::exp: return "exp";
        case Op::add: return "add";
        case Op::sub: return "sub";
        case Op::mul: return "mul";
        case Op::div: return "div";
    }
    return "?";
}

Op parse_op(const std::string& name) {
    for (Op op : {Op::neg, Op::square, Op::sin, Op::cos, Op::exp, Op::add, Op::sub,
                  Op::mul, Op::div})
        if (op_name(op) == name) return op;
    throw ExprError("unknown operator: " + name);
}

bool is_terminal(Op op) { return arity(op) == 0; }

std::size_t subtree_end(const Expr& e, std::size_t i) {
    std::size_t end = i;
    int pending = 1;
    while (pending > 0) {
        if (end >= e.nodes.size()) throw ExprError("malformed expression tree");
        pending += arity(e.nodes[end].op) - 1;
        ++end;
    }
    return end;
}

// --- parsing -----------------------------------------------------------------

namespace {

struct Tokenizer {
    const std::string& text;
    std::size_t pos = 0;

    std::optional<std::string> next() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
        if (pos >= text.size()) return std::nullopt;
        const char c = text[pos];
        if (c == '(' || c == ')') {
            ++pos;
            return std::string(1, c);
        }
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        return text.substr(start, pos - start);
    }
};

bool parse_variable(const std::string& tok, int& index) {
    if (tok.size() < 2 || tok[0] != 'x') return false;
    for (std::size_t i = 1; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
    index = std::atoi(tok.c_str() + 1);
    return true;
}

bool parse_number(const std::string& tok, double& value) {
    char* end = nullptr;
    value = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size() && std::isfinite(value);
}

void parse_into(Tokenizer& tz, Expr& out, int max_vars, int depth) {
    if (depth > 10000) throw ExprError("expression nesting too deep");
    auto tok = tz.next();
    if (!tok) throw ExprError("unexpected end of expression");
    if (*tok == ")") throw ExprError("unexpected ')'");
    if (*tok == "(") {
        auto name = tz.next();
        if (!name || *name == "(" || *name == ")")
            throw ExprError("expected operator after '('");
        const Op op = parse_op(*name);
        out.nodes.push_back(Node{op, 0, 0.0});
        for (int i = 0; i < arity(op); ++i) parse_into(tz, out, max_vars, depth + 1);
        auto close = tz.next();
        if (!close || *close != ")")
            throw ExprError("arity mismatch for operator " + *name);
        return;
    }
    int index = 0;
    double value = 0.0;
    if (parse_variable(*tok, index)) {
        if (max_vars >= 0 && index >= max_vars)
            throw ExprError("variable index out of range: " + *tok);
        out.nodes.push_back(Node{Op::variable, index, 0.0});
    } else if (parse_number(*tok, value)) {
        out.nodes.push_back(Node{Op::constant, 0, value});
    } else {
        throw ExprError("unknown symbol: " + *tok);
    }
}

}  // namespace

Expr parse_expr(const std::string& text, int max_vars) {
    Tokenizer tz{text};
    Expr e;
    parse_into(tz, e, max_vars, 0);
    if (tz.next()) throw ExprError("trailing input after expression");
    return e;
}

namespace {

void format_into(const Expr& e, std::size_t i, std::string& out) {
    const Node& n = e.nodes[i];
    switch (n.op) {
        case Op::constant:
            append_double(out, n.value);
            return;
        case Op::variable:
            out += "x" + std::to_string(n.var);
            return;
        default: break;
    }
    out += "(" + op_name(n.op);
    std::size_t child = i + 1;
    for (int k = 0; k < arity(n.op); ++k) {
        out += " ";
        format_into(e, child, out);
        child = subtree_end(e, child);
    }
    out += ")";
}

}  // namespace

std::string format_expr(const Expr& e) {
    if (e.empty()) throw ExprError("cannot format empty expression");
    std::string out;
    format_into(e, 0, out);
    return out;
}

int min_dimension(const Expr& e) {
    int d = 0;
    for (const Node& n : e.nodes)
        if (n.op == Op::variable) d = std::max(d, n.var + 1);
    return d;
}

// --- evaluation ---------------------------------------------------------------

namespace {

// Reverse-prefix walk with an explicit stack: by the time an operator is
// reached its operands sit on top (left uppermost). Templating on the input
// dimension lets the compiler unroll the per-component gradient loops on the
// hot fitness path; D = 0 is the generic runtime-dimension fallback.
struct EvalStack {
    std::vector<double> v;
    std::vector<double> g;

    void reset(std::size_t max_slots, std::size_t dim) {
        if (v.size() < max_slots) v.resize(max_slots);
        if (g.size() < max_slots * dim) g.resize(max_slots * dim);
    }
};

thread_local EvalStack tl_stack;

template <int D>
bool eval_with_gradient_impl(const Expr& e, const double* x, std::size_t dim,
                             double& value, double* out_grad) {
    const std::size_t d = D > 0 ? std::size_t(D) : dim;
    EvalStack& st = tl_stack;
    st.reset(e.nodes.size(), d);
    double* sv = st.v.data();
    double* sg = st.g.data();
    std::size_t top = 0;

    for (std::size_t idx = e.nodes.size(); idx-- > 0;) {
        const Node& n = e.nodes[idx];
        switch (n.op) {
            case Op::constant: {
                sv[top] = n.value;
                double* g = sg + top * d;
                for (std::size_t k = 0; k < d; ++k) g[k] = 0.0;
                ++top;
                break;
            }
            case Op::variable: {
                if (n.var >= int(d)) throw ExprError("variable index out of range");
                sv[top] = x[std::size_t(n.var)];
                double* g = sg + top * d;
                for (std::size_t k = 0; k < d; ++k) g[k] = 0.0;
                g[std::size_t(n.var)] = 1.0;
                ++top;
                break;
            }
            case Op::neg: {
                double* g = sg + (top - 1) * d;
                sv[top - 1] = -sv[top - 1];
                for (std::size_t k = 0; k < d; ++k) g[k] = -g[k];
                break;
            }
            case Op::square: {
                const double a = sv[top - 1];
                double* g = sg + (top - 1) * d;
                const double r = a * a;
                if (!std::isfinite(r)) return false;
                sv[top - 1] = r;
                const double da = 2.0 * a;
                for (std::size_t k = 0; k < d; ++k) g[k] *= da;
                break;
            }
            case Op::sin: {
                const double a = sv[top - 1];
                double* g = sg + (top - 1) * d;
                sv[top - 1] = std::sin(a);
                const double da = std::cos(a);
                for (std::size_t k = 0; k < d; ++k) g[k] *= da;
                break;
            }
            case Op::cos: {
                const double a = sv[top - 1];
                double* g = sg + (top - 1) * d;
                sv[top - 1] = std::cos(a);
                const double da = -std::sin(a);
                for (std::size_t k = 0; k < d; ++k) g[k] *= da;
                break;
            }
            case Op::exp: {
                const double a = sv[top - 1];
                const double r = std::exp(a);
                if (!std::isfinite(r)) return false;
                double* g = sg + (top - 1) * d;
                sv[top - 1] = r;
                for (std::size_t k = 0; k < d; ++k) g[k] *= r;
                break;
            }
            case Op::add: {
                const double* ga = sg + (top - 1) * d;
                double* gout = sg + (top - 2) * d;
                const double r = sv[top - 1] + sv[top - 2];
                if (!std::isfinite(r)) return false;
                sv[top - 2] = r;
                for (std::size_t k = 0; k < d; ++k) gout[k] += ga[k];
                --top;
                break;
            }
            case Op::sub: {
                const double a = sv[top - 1], b = sv[top - 2];
                const double* ga = sg + (top - 1) * d;
                double* gout = sg + (top - 2) * d;
                const double r = a - b;
                if (!std::isfinite(r)) return false;
                sv[top - 2] = r;
                for (std::size_t k = 0; k < d; ++k) gout[k] = ga[k] - gout[k];
                --top;
                break;
            }
            case Op::mul: {
                const double a = sv[top - 1], b = sv[top - 2];
                const double* ga = sg + (top - 1) * d;
                double* gout = sg + (top - 2) * d;
                const double r = a * b;
                if (!std::isfinite(r)) return false;
                sv[top - 2] = r;
                for (std::size_t k = 0; k < d; ++k) gout[k] = ga[k] * b + gout[k] * a;
                --top;
                break;
            }
            case Op::div: {
                const double a = sv[top - 1], b = sv[top - 2];
                if (std::fabs(b) < kDivFloor) return false;
                const double* ga = sg + (top - 1) * d;
                double* gout = sg + (top - 2) * d;
                const double r = a / b;
                if (!std::isfinite(r)) return false;
                sv[top - 2] = r;
                const double inv_b = 1.0 / b;
                for (std::size_t k = 0; k < d; ++k)
                    gout[k] = (ga[k] - r * gout[k]) * inv_b;
                --top;
                break;
            }
        }
    }
    value = sv[0];
    for (std::size_t k = 0; k < d; ++k) {
        if (!std::isfinite(sg[k])) return false;
        out_grad[k] = sg[k];
    }
    return std::isfinite(value);
}

template <int D>
double fitness_impl(const Expr& e, const GradientView& view) {
    const std::size_t d = D > 0 ? std::size_t(D) : std::size_t(view.d);
    thread_local std::vector<double> grad;
    grad.resize(d);
    double acc = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < view.count; ++i) {
        const double* x = view.x.data() + i * d;
        const double* gf = view.g.data() + i * d;
        if (!eval_with_gradient_impl<D>(e, x, d, value, grad.data()))
            return std::numeric_limits<double>::infinity();
        double norm_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) norm_sq += grad[k] * grad[k];
        if (norm_sq > 0.0) {
            const double inv = 1.0 / std::sqrt(norm_sq);
            for (std::size_t k = 0; k < d; ++k) grad[k] *= inv;
        }
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = grad[k] - gf[k];
            acc += diff * diff;
        }
    }
    return acc / double(view.count);
}

}  // namespace

std::optional<double> eval_expr(const Expr& e, std::span<const double> x) {
    if (e.empty()) throw ExprError("cannot evaluate empty expression");
    thread_local std::vector<double> stack;
    if (stack.size() < e.nodes.size()) stack.resize(e.nodes.size());
    std::size_t top = 0;
    for (std::size_t idx = e.nodes.size(); idx-- > 0;) {
        const Node& n = e.nodes[idx];
        double r;
        switch (n.op) {
            case Op::constant: r = n.value; break;
            case Op::variable:
                if (n.var >= int(x.size())) throw ExprError("variable index out of range");
                r = x[std::size_t(n.var)];
                break;
            case Op::neg: r = -stack[--top]; break;
            case Op::square: {
                const double a = stack[--top];
                r = a * a;
                break;
            }
            case Op::sin: r = std::sin(stack[--top]); break;
            case Op::cos: r = std::cos(stack[--top]); break;
            case Op::exp: r = std::exp(stack[--top]); break;
            case Op::add: {
                const double a = stack[--top], b = stack[--top];
                r = a + b;
                break;
            }
            case Op::sub: {
                const double a = stack[--top], b = stack[--top];
                r = a - b;
                break;
            }
            case Op::mul: {
                const double a = stack[--top], b = stack[--top];
                r = a * b;
                break;
            }
            case Op::div: {
                const double a = stack[--top], b = stack[--top];
                if (std::fabs(b) < kDivFloor) return std::nullopt;
                r = a / b;
                break;
            }
        }
        if (!std::isfinite(r)) return std::nullopt;
        stack[top++] = r;
    }
    return stack[0];
}

bool eval_with_gradient(const Expr& e, std::span<const double> x, double& value,
                        std::span<double> grad) {
    if (e.empty()) throw ExprError("cannot evaluate empty expression");
    if (grad.size() != x.size()) throw ExprError("gradient span size mismatch");
    switch (x.size()) {
        case 2: return eval_with_gradient_impl<2>(e, x.data(), 2, value, grad.data());
        case 4: return eval_with_gradient_impl<4>(e, x.data(), 4, value, grad.data());
        case 6: return eval_with_gradient_impl<6>(e, x.data(), 6, value, grad.data());
        case 9: return eval_with_gradient_impl<9>(e, x.data(), 9, value, grad.data());
        case 16: return eval_with_gradient_impl<16>(e, x.data(), 16, value, grad.data());
        default:
            return eval_with_gradient_impl<0>(e, x.data(), x.size(), value, grad.data());
    }
}

double fitness(const Expr& e, const GradientView& view) {
    if (view.count == 0) return std::numeric_limits<double>::infinity();
    if (min_dimension(e) > view.d)
        throw ExprError("fitness: expression uses variables beyond dataset dimension");
    switch (view.d) {
        case 2: return fitness_impl<2>(e, view);
        case 4: return fitness_impl<4>(e, view);
        case 6: return fitness_impl<6>(e, view);
        case 9: return fitness_impl<9>(e, view);
        case 16: return fitness_impl<16>(e, view);
        default: return fitness_impl<0>(e, view);
    }
}

std::optional<std::vector<double>> grad_expr(const Expr& e, std::span<const double> x) {
    std::vector<double> grad(x.size());
    double value = 0.0;
    if (!eval_with_gradient(e, x, value, grad)) return std::nullopt;
    return grad;
}

namespace {

// Returns the fold of the subtree at i and appends the (possibly reduced)
// nodes to out; all-constant operator subtrees collapse to their value.
bool fold_subtree(const Expr& e, std::size_t i, Expr& out) {
    const Node& n = e.nodes[i];
    if (is_terminal(n.op)) {
        out.nodes.push_back(n);
        return n.op == Op::constant;
    }
    const std::size_t mark = out.nodes.size();
    out.nodes.push_back(n);
    bool all_const = true;
    std::size_t child = i + 1;
    for (int k = 0; k < arity(n.op); ++k) {
        all_const &= fold_subtree(e, child, out);
        child = subtree_end(e, child);
    }
    if (!all_const) return false;
    Expr sub;
    sub.nodes.assign(out.nodes.begin() + std::ptrdiff_t(mark), out.nodes.end());
    const auto v = eval_expr(sub, {});
    if (!v) return false;  // would be a domain failure; leave unfolded
    out.nodes.resize(mark);
    out.nodes.push_back(Node{Op::constant, 0, *v});
    return true;
}

}  // namespace

Expr fold_constants(const Expr& e) {
    if (e.empty()) return e;
    Expr out;
    out.nodes.reserve(e.nodes.size());
    fold_subtree(e, 0, out);
    return out;
}

}  // namespace symgrad::symsearch
