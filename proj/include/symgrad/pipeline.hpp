#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "symgrad/dataset.hpp"
#include "symgrad/experiments.hpp"
#include "symgrad/gradfield.hpp"
#include "symgrad/io.hpp"
#include "symgrad/micronet.hpp"
#include "symgrad/symsearch.hpp"

namespace symgrad::pipeline {

struct ExperimentConfig {
    Experiment experiment = Experiment::exp1;
    std::uint64_t seed = 42;
    std::string out_dir = ".";

    // datagen
    std::size_t count = 50000;
    double range = 0.0;  // 0 = experiment default
    int gen_threads = 1;

    // architecture + training
    std::vector<int> hidden = {64, 64};
    int latent_width = 1;
    int target_neuron = 0;
    net::Activation activation = net::Activation::tanh;
    net::TrainConfig train;

    // gradient extraction
    double epsilon = gradfield::kDefaultEpsilon;
    std::size_t eval_count = 10000;

    // symbolic search + verdict
    symsearch::SearchConfig search;
    std::size_t probe_count = 10000;

    double effective_range() const {
        return range > 0 ? range : experiment_info(experiment).default_range;
    }
};

// Defaults for one experiment, optionally overridden from a config file.
ExperimentConfig default_config(Experiment e);
ExperimentConfig config_from_file(const std::string& path,
                                  std::optional<Experiment> experiment_override = {});
ExperimentConfig apply_config(const KeyValueConfig& kv, ExperimentConfig base);

// Effective settings in the same sectioned key=value format.
std::string config_to_text(const ExperimentConfig& cfg);

struct VerdictResult {
    double alignment = 0.0;         // mean |cos| between gradient fields
    double rank_corr = 0.0;         // |Spearman| of values
    double sign_consistency = 0.0;  // majority-sign fraction of cosines
    std::size_t usable_probes = 0;
    bool conclusive = false;  // >= 100 usable probes
    bool equivalent = false;
    std::string invariant;  // which oracle this was scored against
};

constexpr double kAlignmentThreshold = 0.99;
constexpr double kRankCorrThreshold = 0.999;
constexpr double kSignThreshold = 0.999;
constexpr std::size_t kMinProbes = 100;

// Score an expression against one explicit oracle.
VerdictResult verdict_against_oracle(const symsearch::Expr& expr,
                                     const InvariantOracle& oracle,
                                     std::span<const std::vector<double>> probes);

// Against the experiment's targeted invariant.
VerdictResult equivalence_verdict(const symsearch::Expr& expr, Experiment e,
                                  std::span<const std::vector<double>> probes);

// Against every known invariant of the system; returns the best result,
// preferring one that passes.
VerdictResult verdict_any_invariant(const symsearch::Expr& expr, Experiment e,
                                    std::span<const std::vector<double>> probes);

// Spearman rank correlation, ties averaged.
double spearman(std::span<const double> a, std::span<const double> b);

// CSV rows (g_truth(x), latent(x)); returns the rank-correlation magnitude.
double emit_correlation(const net::LatentModel& model, Experiment e,
                        std::span<const std::vector<double>> inputs,
                        const std::string& path, const std::string& model_hash);

struct StageTimes {
    double gen_s = 0, train_s = 0, grads_s = 0, search_s = 0, report_s = 0;
};

struct FrontVerdict {
    symsearch::ParetoEntry entry;
    VerdictResult verdict;
};

struct RunReport {
    std::string experiment;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    std::size_t gradient_count = 0;
    std::size_t gradient_dropped = 0;
    std::vector<symsearch::ParetoEntry> front;
    std::string knee_expression;
    VerdictResult knee_verdict;
    bool any_front_pass = false;
    std::string passing_expression;  // first front entry that passed, if any
    std::vector<FrontVerdict> front_verdicts;
    double correlation = 0.0;  // rank-correlation magnitude, truth vs latent
    StageTimes times;
    std::string triplets_hash, eval_hash, model_hash, grads_hash, front_hash;
};

// gen -> train -> grads -> search -> report, everything written to
// cfg.out_dir; deterministic given (config, seed).
RunReport run_experiment(const ExperimentConfig& cfg);

void write_report(const std::string& dir, const RunReport& r);
std::string report_summary_text(const RunReport& r);

struct SuiteRow {
    std::string experiment;
    std::uint64_t seed = 0;
    bool ok = false;          // run completed
    bool success = false;     // some front entry passed the verdict
    std::string knee_expression;
    std::string error;
};

struct SuiteResult {
    std::vector<SuiteRow> rows;
    std::string summary_text;
};

// Runs experiments x seeds (failures recorded, never fatal); jobs > 1 runs
// them as independent parallel tasks.
SuiteResult run_suite(const std::vector<Experiment>& experiments,
                      const std::vector<std::uint64_t>& seeds,
                      const ExperimentConfig& base, const std::string& out_root,
                      int jobs = 1);

}  // namespace symgrad::pipeline
