#include "symgrad/symsearch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "symgrad/io.hpp"
#include "symgrad/linalg.hpp"

namespace symgrad::symsearch {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogFloor = 1e-30;  // knee computation guard for exact zeros
}

std::vector<Op> default_operators() {
    return {Op::add, Op::sub, Op::mul, Op::div, Op::neg, Op::square, Op::sin, Op::cos,
            Op::exp};
}

std::vector<Op> parse_operators(const std::string& comma_list) {
    std::vector<Op> ops;
    for (const std::string& name : split_list(comma_list)) ops.push_back(parse_op(name));
    if (ops.empty()) throw ExprError("empty operator set");
    return ops;
}

std::string format_operators(std::span<const Op> ops) {
    std::string out;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (i) out += ",";
        out += op_name(ops[i]);
    }
    return out;
}

void SearchConfig::validate() const {
    if (population_size < 2) throw std::invalid_argument("search: population_size < 2");
    if (generations < 0) throw std::invalid_argument("search: negative generations");
    if (tournament_size < 1) throw std::invalid_argument("search: tournament_size < 1");
    if (mutation_rate < 0 || mutation_rate > 1)
        throw std::invalid_argument("search: mutation_rate outside [0,1]");
    if (crossover_rate < 0 || crossover_rate > 1)
        throw std::invalid_argument("search: crossover_rate outside [0,1]");
    if (max_complexity < 3) throw std::invalid_argument("search: max_complexity < 3");
    if (operator_set.empty()) throw std::invalid_argument("search: empty operator set");
    if (constant_range <= 0) throw std::invalid_argument("search: constant_range <= 0");
}

void normalize_symbolic(std::span<double> gradient) {
    const double n = norm(gradient);
    if (n == 0.0) return;  // exact-zero branch
    for (double& g : gradient) g /= n;
}

double fitness(const Expr& e, const GradientDataset& ds, Split split) {
    return fitness(e, make_view(ds, split));
}

// --- random trees and variation -----------------------------------------------

namespace {

Node random_terminal(const SearchConfig& cfg, int dim, Rng& rng) {
    // two variables for every constant keeps trees input-driven
    if (dim > 0 && !chance(rng, 1.0 / 3.0))
        return Node{Op::variable, int(uniform_index(rng, std::size_t(dim))), 0.0};
    return Node{Op::constant, 0, uniform(rng, -cfg.constant_range, cfg.constant_range)};
}

void grow(const SearchConfig& cfg, int dim, int budget, Rng& rng,
          std::vector<Node>& out) {
    if (budget <= 1) {
        out.push_back(random_terminal(cfg, dim, rng));
        return;
    }
    thread_local std::vector<Op> fitting;
    fitting.clear();
    for (Op op : cfg.operator_set)
        if (arity(op) + 1 <= budget) fitting.push_back(op);
    if (fitting.empty()) {
        out.push_back(random_terminal(cfg, dim, rng));
        return;
    }
    const Op op = fitting[uniform_index(rng, fitting.size())];
    out.push_back(Node{op, 0, 0.0});
    if (arity(op) == 1) {
        grow(cfg, dim, budget - 1, rng, out);
    } else {
        const int left = 1 + int(uniform_index(rng, std::size_t(budget - 2)));
        grow(cfg, dim, left, rng, out);
        grow(cfg, dim, budget - 1 - left, rng, out);
    }
}

Expr replace_subtree(const Expr& e, std::size_t i, const std::vector<Node>& repl) {
    const std::size_t end = subtree_end(e, i);
    Expr out;
    out.nodes.reserve(e.nodes.size() - (end - i) + repl.size());
    out.nodes.insert(out.nodes.end(), e.nodes.begin(), e.nodes.begin() + std::ptrdiff_t(i));
    out.nodes.insert(out.nodes.end(), repl.begin(), repl.end());
    out.nodes.insert(out.nodes.end(), e.nodes.begin() + std::ptrdiff_t(end), e.nodes.end());
    return out;
}

// Offspring over the cap lose a uniformly chosen operator subtree to a
// fresh terminal until they fit.
Expr truncate_to_cap(Expr e, const SearchConfig& cfg, int dim, Rng& rng) {
    while (e.complexity() > cfg.max_complexity) {
        thread_local std::vector<std::size_t> internal;
        internal.clear();
        for (std::size_t i = 0; i < e.nodes.size(); ++i)
            if (!is_terminal(e.nodes[i].op)) internal.push_back(i);
        if (internal.empty()) break;
        const std::size_t pick = internal[uniform_index(rng, internal.size())];
        e = replace_subtree(e, pick, {random_terminal(cfg, dim, rng)});
    }
    return e;
}

}  // namespace

Expr random_expr(const SearchConfig& cfg, int dim, Rng& rng) {
    Expr e;
    const int budget = 1 + int(uniform_index(rng, std::size_t(cfg.max_complexity)));
    grow(cfg, dim, budget, rng, e.nodes);
    return e;
}

Expr mutate(const Expr& e, const SearchConfig& cfg, int dim, Rng& rng) {
    Expr out = e;
    if (out.empty()) return out;

    thread_local std::vector<std::size_t> constants;
    constants.clear();
    for (std::size_t i = 0; i < out.nodes.size(); ++i)
        if (out.nodes[i].op == Op::constant) constants.push_back(i);

    const double r = uniform(rng, 0.0, 1.0);
    if (r < 1.0 / 3.0 && !constants.empty()) {
        // constant jitter
        Node& n = out.nodes[constants[uniform_index(rng, constants.size())]];
        const double sigma = 0.1 * std::fabs(n.value) + 0.01;
        n.value += gaussian(rng, 0.0, sigma);
        return out;
    }
    if (r < 2.0 / 3.0) {
        // point swap: operators trade within their arity, terminals re-roll
        const std::size_t i = uniform_index(rng, out.nodes.size());
        Node& n = out.nodes[i];
        if (is_terminal(n.op)) {
            n = random_terminal(cfg, dim, rng);
        } else {
            thread_local std::vector<Op> same;
            same.clear();
            for (Op op : cfg.operator_set)
                if (arity(op) == arity(n.op)) same.push_back(op);
            if (!same.empty()) n.op = same[uniform_index(rng, same.size())];
        }
        return out;
    }
    // subtree replacement, sized near the replaced subtree
    const std::size_t i = uniform_index(rng, out.nodes.size());
    const std::size_t old_size = subtree_end(out, i) - i;
    thread_local std::vector<Node> repl;
    repl.clear();
    grow(cfg, dim, 1 + int(uniform_index(rng, old_size + 2)), rng, repl);
    return truncate_to_cap(replace_subtree(out, i, repl), cfg, dim, rng);
}

std::pair<Expr, Expr> crossover(const Expr& a, const Expr& b, const SearchConfig& cfg,
                                Rng& rng) {
    if (a.complexity() < 2 || b.complexity() < 2) return {a, b};
    const std::size_t ia = 1 + uniform_index(rng, a.nodes.size() - 1);
    const std::size_t ib = 1 + uniform_index(rng, b.nodes.size() - 1);
    const std::size_t ea = subtree_end(a, ia);
    const std::size_t eb = subtree_end(b, ib);
    const std::vector<Node> sub_a(a.nodes.begin() + std::ptrdiff_t(ia),
                                  a.nodes.begin() + std::ptrdiff_t(ea));
    const std::vector<Node> sub_b(b.nodes.begin() + std::ptrdiff_t(ib),
                                  b.nodes.begin() + std::ptrdiff_t(eb));
    const int dim = std::max(min_dimension(a), min_dimension(b));
    Expr c1 = truncate_to_cap(replace_subtree(a, ia, sub_b), cfg, dim, rng);
    Expr c2 = truncate_to_cap(replace_subtree(b, ib, sub_a), cfg, dim, rng);
    return {std::move(c1), std::move(c2)};
}

Expr optimize_constants(const Expr& e, const GradientView& view, int iterations) {
    std::vector<std::size_t> constants;
    for (std::size_t i = 0; i < e.nodes.size(); ++i)
        if (e.nodes[i].op == Op::constant) constants.push_back(i);
    if (constants.empty()) return e;

    Expr best = e;
    double best_fit = fitness(best, view);
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (const std::size_t ci : constants) {
            double step = 0.25 * std::fabs(best.nodes[ci].value) + 0.1;
            for (int it = 0; it < iterations; ++it) {
                const double center = best.nodes[ci].value;
                bool moved = false;
                for (const double candidate : {center + step, center - step}) {
                    best.nodes[ci].value = candidate;
                    const double f = fitness(best, view);
                    if (f < best_fit) {
                        best_fit = f;
                        moved = true;
                        break;
                    }
                }
                if (!moved) {
                    best.nodes[ci].value = center;
                    step *= 0.5;
                    if (step < 1e-12 * (1.0 + std::fabs(center))) break;
                } else {
                    step *= 1.5;
                }
            }
        }
    }
    return best;
}

// --- evolution ------------------------------------------------------------------

namespace {

struct Individual {
    Expr e;
    double fit = kInf;
};

std::size_t tournament(const std::vector<Individual>& pop, int k, Rng& rng) {
    std::size_t best = uniform_index(rng, pop.size());
    for (int i = 1; i < k; ++i) {
        const std::size_t c = uniform_index(rng, pop.size());
        if (pop[c].fit < pop[best].fit) best = c;
    }
    return best;
}

}  // namespace

std::vector<ParetoEntry> evolve(const GradientDataset& ds, const SearchConfig& cfg) {
    cfg.validate();
    const GradientView search_view = make_view(ds, Split::search);
    const GradientView val_view = make_view(ds, Split::validation);
    if (search_view.count == 0) throw std::invalid_argument("evolve: empty search split");
    const int dim = ds.header.d;

    Rng rng = make_rng(derive_seed(cfg.seed, 0x5ea4c4ULL));

    std::map<int, Individual> hof;  // best seen per complexity, by search fitness
    std::set<int> touched;          // buckets improved in the current generation

    auto admit = [&](Expr ex) -> Individual {
        ex = fold_constants(std::move(ex));
        Individual ind{std::move(ex), 0.0};
        ind.fit = fitness(ind.e, search_view);
        if (std::isfinite(ind.fit)) {
            const int c = ind.e.complexity();
            auto it = hof.find(c);
            if (it == hof.end() || ind.fit < it->second.fit) {
                hof[c] = ind;
                touched.insert(c);
            }
        }
        return ind;
    };

    auto best_fit = [&] {
        double b = kInf;
        for (const auto& [c, ind] : hof) b = std::min(b, ind.fit);
        return b;
    };

    std::vector<Individual> pop;
    pop.reserve(std::size_t(cfg.population_size));
    for (int i = 0; i < cfg.population_size; ++i)
        pop.push_back(admit(random_expr(cfg, dim, rng)));

    auto refine_budget = [](const Expr& e) {
        int constants = 0;
        for (const Node& n : e.nodes) constants += n.op == Op::constant;
        return constants == 0 ? 0 : std::max(3, 24 / constants);
    };
    auto refine_touched = [&] {
        if (!cfg.constant_refinement) return;
        const std::set<int> buckets = std::exchange(touched, {});
        for (int c : buckets) {
            auto it = hof.find(c);
            if (it == hof.end()) continue;
            const int iters = refine_budget(it->second.e);
            if (iters == 0) continue;
            Expr refined = optimize_constants(it->second.e, search_view, iters);
            admit(std::move(refined));
        }
    };

    for (int gen = 0; gen < cfg.generations; ++gen) {
        // refining every improved bucket each generation would dominate the
        // budget early on; a coarse cadence gets the same constants
        if (gen % 5 == 0) refine_touched();
        if (best_fit() <= cfg.stop_mse) break;
        std::vector<Individual> next;
        next.reserve(std::size_t(cfg.population_size));
        for (const auto& [c, ind] : hof) {
            if (int(next.size()) >= cfg.population_size / 2) break;
            next.push_back(ind);  // per-complexity elitism
        }
        while (int(next.size()) < cfg.population_size) {
            const double r = uniform(rng, 0.0, 1.0);
            if (r < cfg.crossover_rate) {
                const auto& pa = pop[tournament(pop, cfg.tournament_size, rng)];
                const auto& pb = pop[tournament(pop, cfg.tournament_size, rng)];
                auto [c1, c2] = crossover(pa.e, pb.e, cfg, rng);
                next.push_back(admit(std::move(c1)));
                if (int(next.size()) < cfg.population_size)
                    next.push_back(admit(std::move(c2)));
            } else if (r < cfg.crossover_rate + cfg.mutation_rate) {
                const auto& pa = pop[tournament(pop, cfg.tournament_size, rng)];
                next.push_back(admit(mutate(pa.e, cfg, dim, rng)));
            } else {
                next.push_back(pop[tournament(pop, cfg.tournament_size, rng)]);
            }
        }
        pop = std::move(next);
    }
    refine_touched();

    if (cfg.constant_refinement) {
        // one deeper pass over the whole front before re-scoring
        const std::map<int, Individual> snapshot = hof;
        for (const auto& [c, ind] : snapshot) admit(optimize_constants(ind.e, search_view, 60));
    }

    std::vector<ParetoEntry> front;
    double best_so_far = kInf;
    for (const auto& [c, ind] : hof) {
        if (!(ind.fit < best_so_far)) continue;
        const double val = fitness(ind.e, val_view);
        if (!std::isfinite(val)) continue;  // fails off-split points, not usable
        best_so_far = ind.fit;
        front.push_back(ParetoEntry{c, ind.fit, val, format_expr(ind.e)});
    }
    return front;
}

ParetoEntry knee_point(std::span<const ParetoEntry> front) {
    if (front.empty()) throw std::invalid_argument("knee_point: empty front");
    if (front.size() == 1) return front[0];
    std::size_t best = 1;
    double best_drop = -kInf;
    for (std::size_t i = 1; i < front.size(); ++i) {
        const double prev = std::max(front[i - 1].mse_val, kLogFloor);
        const double cur = std::max(front[i].mse_val, kLogFloor);
        const double drop = std::log10(prev) - std::log10(cur);
        if (drop > best_drop) {
            best_drop = drop;
            best = i;
        }
    }
    return front[best];
}

void save_front_csv(const std::string& path, std::span<const ParetoEntry> front,
                    const std::string& input_hash) {
    std::string out = "# input_hash=" + input_hash + "\n";
    out += "complexity,mse_search,mse_val,expression\n";
    for (const ParetoEntry& p : front) {
        out += std::to_string(p.complexity) + ",";
        append_double(out, p.mse_search);
        out += ",";
        append_double(out, p.mse_val);
        out += ",\"" + p.expression + "\"\n";
    }
    write_text_file(path, out);
}

std::vector<ParetoEntry> load_front_csv(const std::string& path, std::string* input_hash) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<ParetoEntry> front;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string tag = "# input_hash=";
            if (input_hash && line.rfind(tag, 0) == 0) *input_hash = line.substr(tag.size());
            continue;
        }
        if (!header_seen) {
            if (line != "complexity,mse_search,mse_val,expression")
                throw std::runtime_error("bad front header in " + path);
            header_seen = true;
            continue;
        }
        ParetoEntry p;
        std::size_t pos = 0;
        auto field = [&]() {
            const std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos)
                throw std::runtime_error("bad front row in " + path);
            std::string f = line.substr(pos, comma - pos);
            pos = comma + 1;
            return f;
        };
        p.complexity = std::stoi(field());
        p.mse_search = std::stod(field());
        p.mse_val = std::stod(field());
        std::string expr = line.substr(pos);
        if (expr.size() >= 2 && expr.front() == '"' && expr.back() == '"')
            expr = expr.substr(1, expr.size() - 2);
        p.expression = expr;
        front.push_back(std::move(p));
    }
    if (!header_seen) throw std::runtime_error("missing front header in " + path);
    return front;
}

}  // namespace symgrad::symsearch
