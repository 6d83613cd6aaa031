#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "symgrad/dataset.hpp"
#include "symgrad/expr.hpp"
#include "symgrad/rng.hpp"

namespace symgrad::symsearch {

std::vector<Op> default_operators();
std::vector<Op> parse_operators(const std::string& comma_list);
std::string format_operators(std::span<const Op> ops);

struct SearchConfig {
    int population_size = 500;
    int generations = 200;
    int tournament_size = 7;
    double mutation_rate = 0.3;
    double crossover_rate = 0.7;
    int max_complexity = 25;
    std::vector<Op> operator_set = default_operators();
    double constant_range = 3.0;
    std::uint64_t seed = 0;
    bool constant_refinement = true;
    // Stop once the search-split fitness reaches this level; the front up to
    // the winning complexity is already final at that point.
    double stop_mse = 1e-12;

    void validate() const;  // throws on out-of-range settings
};

struct ParetoEntry {
    int complexity = 0;
    double mse_search = 0.0;
    double mse_val = 0.0;
    std::string expression;
};

// Unit-normalize, except an exactly zero gradient passes through unchanged.
void normalize_symbolic(std::span<double> gradient);

// Mean squared distance between the candidate's normalized gradients and the
// stored field; +inf as soon as any point is a domain failure.
double fitness(const Expr& e, const GradientView& view);
double fitness(const Expr& e, const GradientDataset& ds, Split split);

Expr random_expr(const SearchConfig& cfg, int dim, Rng& rng);
Expr mutate(const Expr& e, const SearchConfig& cfg, int dim, Rng& rng);
std::pair<Expr, Expr> crossover(const Expr& a, const Expr& b, const SearchConfig& cfg,
                                Rng& rng);

// Coordinate pattern search over the expression's constants against the
// given view; never returns something worse than the input.
Expr optimize_constants(const Expr& e, const GradientView& view, int iterations);

// Generational GP with tournament selection, per-complexity elitism and a
// hall-of-fame front, re-scored on the validation split.
std::vector<ParetoEntry> evolve(const GradientDataset& ds, const SearchConfig& cfg);

// Entry with the steepest drop in log10 validation MSE from the previous
// complexity level; ties go to the lower complexity.
ParetoEntry knee_point(std::span<const ParetoEntry> front);

void save_front_csv(const std::string& path, std::span<const ParetoEntry> front,
                    const std::string& input_hash);
std::vector<ParetoEntry> load_front_csv(const std::string& path,
                                        std::string* input_hash = nullptr);

}  // namespace symgrad::symsearch
