#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "symgrad/datagen.hpp"
#include "symgrad/pipeline.hpp"

using namespace symgrad;
using namespace symgrad::pipeline;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(Experiment e, const std::string& out) {
    ExperimentConfig cfg = default_config(e);
    cfg.out_dir = out;
    cfg.seed = 5;
    cfg.count = 1200;
    cfg.eval_count = 600;
    cfg.hidden = {24, 24};
    cfg.train.epochs = 6;
    cfg.search.population_size = 150;
    cfg.search.generations = 25;
    cfg.probe_count = 1500;
    return cfg;
}

}  // namespace

TEST_CASE("spearman: exact ranks, ties, and constant input") {
    const std::vector<double> a = {1, 2, 3, 4, 5};
    const std::vector<double> b = {10, 20, 30, 40, 50};
    CHECK(spearman(a, b) == doctest::Approx(1.0));
    const std::vector<double> c = {5, 4, 3, 2, 1};
    CHECK(spearman(a, c) == doctest::Approx(-1.0));
    const std::vector<double> mono = {1, 8, 27, 64, 125};  // monotone, nonlinear
    CHECK(spearman(a, mono) == doctest::Approx(1.0));
    const std::vector<double> flat = {1, 1, 1, 1, 1};
    CHECK(spearman(a, flat) == doctest::Approx(0.0));
    const std::vector<double> tied_a = {1, 1, 2, 2};
    const std::vector<double> tied_b = {3, 3, 7, 7};
    CHECK(spearman(tied_a, tied_b) == doctest::Approx(1.0));
}

TEST_CASE("equivalence_verdict: truth, scaled truth, unrelated, inconclusive") {
    const auto probes = datagen::sample_anchors(Experiment::exp1, 2000, 1.0, 17);
    const symsearch::Expr truth =
        symsearch::parse_expr(ground_truth_expression(Experiment::exp1));

    const VerdictResult v = equivalence_verdict(truth, Experiment::exp1, probes);
    CHECK(v.alignment == doctest::Approx(1.0));
    CHECK(v.rank_corr == doctest::Approx(1.0));
    CHECK(v.sign_consistency == doctest::Approx(1.0));
    CHECK(v.equivalent);

    // a decreasing reparameterization is still the same concept
    const symsearch::Expr scaled = symsearch::parse_expr("(mul -2 (add x0 x3))");
    const VerdictResult vs = equivalence_verdict(scaled, Experiment::exp1, probes);
    CHECK(vs.alignment == doctest::Approx(1.0));
    CHECK(vs.rank_corr == doctest::Approx(1.0));
    CHECK(vs.sign_consistency == doctest::Approx(1.0));
    CHECK(vs.equivalent);

    const auto probes7 = datagen::sample_anchors(Experiment::exp7, 2000, 2.0, 18);
    const symsearch::Expr lone = symsearch::parse_expr("x0");
    const VerdictResult vu = equivalence_verdict(lone, Experiment::exp7, probes7);
    CHECK(vu.alignment < 0.9);
    CHECK(!vu.equivalent);

    const auto few = datagen::sample_anchors(Experiment::exp1, 50, 1.0, 19);
    const VerdictResult vf = equivalence_verdict(truth, Experiment::exp1, few);
    CHECK(!vf.conclusive);
    CHECK(!vf.equivalent);
}

TEST_CASE("verdict: scaling the truth side changes nothing") {
    const auto probes = datagen::sample_anchors(Experiment::exp7, 1500, 2.0, 23);
    const symsearch::Expr e = symsearch::parse_expr("(add (square x0) (square x1))");
    const VerdictResult base = equivalence_verdict(e, Experiment::exp7, probes);

    for (const double c : {3.0, -0.5}) {
        InvariantOracle scaled;
        scaled.name = "scaled";
        scaled.value = [c](std::span<const double> x) {
            return c * ground_truth_value(Experiment::exp7, x);
        };
        scaled.gradient = [c](std::span<const double> x) {
            auto g = ground_truth_gradient(Experiment::exp7, x);
            for (double& v : g) v *= c;
            return g;
        };
        // run the verdict against the scaled oracle through the multi-invariant
        // path by constructing it directly
        const VerdictResult r = verdict_against_oracle(e, scaled, probes);
        CHECK(r.alignment == doctest::Approx(base.alignment).epsilon(1e-12));
        CHECK(r.rank_corr == doctest::Approx(base.rank_corr).epsilon(1e-12));
    }
}

TEST_CASE("verdict_any_invariant: exp11 energy form matches the second oracle") {
    const auto probes = datagen::sample_anchors(Experiment::exp11, 1500, 2.0, 29);
    const symsearch::Expr energy = symsearch::parse_expr(
        "(sub (mul 0.5 (add (square x2) (square x3))) "
        "(div 1 (add (square x0) (square x1))))");
    const VerdictResult r = verdict_any_invariant(energy, Experiment::exp11, probes);
    CHECK(r.equivalent);
    CHECK(r.invariant == "energy");
    // the targeted-only verdict must reject it
    CHECK(!equivalence_verdict(energy, Experiment::exp11, probes).equivalent);
}

TEST_CASE("emit_correlation: exact linear encoder and constant encoder") {
    fs::create_directories("tmp_pipeline");
    net::LatentModel linear;
    linear.layer_dims = {4, 1};
    linear.weights = {{1, 0, 0, 1}};  // the trace itself
    linear.biases = {{0.0}};

    const auto inputs = datagen::sample_anchors(Experiment::exp1, 500, 1.0, 31);
    const double corr = emit_correlation(linear, Experiment::exp1, inputs,
                                         "tmp_pipeline/corr.csv", "h");
    CHECK(corr >= 0.999);

    const std::string text = read_text_file("tmp_pipeline/corr.csv");
    std::size_t rows = 0;
    for (char ch : text) rows += ch == '\n';
    CHECK(rows == 502);  // comment + header + 500 data rows

    net::LatentModel constant;
    constant.layer_dims = {4, 1};
    constant.weights = {{0, 0, 0, 0}};
    constant.biases = {{2.5}};
    const double corr0 = emit_correlation(constant, Experiment::exp1, inputs,
                                          "tmp_pipeline/corr0.csv", "h");
    CHECK(corr0 == doctest::Approx(0.0));
}

TEST_CASE("config file: parse, apply, and print round trip") {
    const std::string text = R"(
# comment
[experiment]
id = exp7
seed = 9
count = 333
[train]
hidden = 8,4
epochs = 2
optimizer = sgd
[search]
operators = add,mul,square
population = 44
[report]
probes = 123
)";
    const KeyValueConfig kv = KeyValueConfig::parse(text);
    const ExperimentConfig cfg = apply_config(kv, default_config(Experiment::exp1));
    CHECK(cfg.experiment == Experiment::exp7);
    CHECK(cfg.seed == 9);
    CHECK(cfg.count == 333);
    CHECK(cfg.hidden == std::vector<int>{8, 4});
    CHECK(cfg.train.epochs == 2);
    CHECK(cfg.train.optimizer == net::Optimizer::sgd);
    CHECK(cfg.search.population_size == 44);
    CHECK(cfg.search.operator_set.size() == 3);
    CHECK(cfg.probe_count == 123);

    // effective-config text reparses to the same settings
    const ExperimentConfig back =
        apply_config(KeyValueConfig::parse(config_to_text(cfg)),
                     default_config(Experiment::exp1));
    CHECK(back.experiment == cfg.experiment);
    CHECK(back.count == cfg.count);
    CHECK(back.hidden == cfg.hidden);
    CHECK(back.search.population_size == cfg.search.population_size);
    CHECK(symsearch::format_operators(back.search.operator_set) ==
          symsearch::format_operators(cfg.search.operator_set));

    CHECK_THROWS(KeyValueConfig::parse("no_equals_sign_here\n"));
    CHECK_THROWS(parse_experiment("exp13"));
}

TEST_CASE("run_experiment: end to end at reduced scale, idempotent bytes") {
    const std::string dir = "tmp_pipeline/run_exp7";
    fs::remove_all(dir);
    const ExperimentConfig cfg = tiny_config(Experiment::exp7, dir);
    const RunReport rep = run_experiment(cfg);

    CHECK(rep.experiment == "exp7");
    for (const char* f : {"triplets.jsonl", "eval_triplets.jsonl", "model.json",
                          "grads.jsonl", "pareto.csv", "correlation.csv", "report.json",
                          "report.txt"})
        CHECK(fs::exists(dir + "/" + std::string(f)));
    CHECK(rep.gradient_count + rep.gradient_dropped == cfg.eval_count);
    CHECK(!rep.front.empty());
    CHECK(!rep.knee_expression.empty());

    // stage determinism: byte-identical artifacts on rerun
    const std::string t1 = hash_file(dir + "/triplets.jsonl");
    const std::string m1 = hash_file(dir + "/model.json");
    const std::string g1 = hash_file(dir + "/grads.jsonl");
    const std::string p1 = hash_file(dir + "/pareto.csv");
    const RunReport rep2 = run_experiment(cfg);
    CHECK(hash_file(dir + "/triplets.jsonl") == t1);
    CHECK(hash_file(dir + "/model.json") == m1);
    CHECK(hash_file(dir + "/grads.jsonl") == g1);
    CHECK(hash_file(dir + "/pareto.csv") == p1);
    CHECK(rep2.front.size() == rep.front.size());
}

TEST_CASE("run_suite: empty input and a two-seed miniature") {
    const SuiteResult empty = run_suite({}, {1, 2}, default_config(Experiment::exp1),
                                        "tmp_pipeline/suite_empty", 1);
    CHECK(empty.rows.empty());

    ExperimentConfig base = tiny_config(Experiment::exp1, "");
    base.count = 700;
    base.eval_count = 400;
    base.train.epochs = 4;
    base.search.generations = 12;
    base.probe_count = 800;
    const SuiteResult r =
        run_suite({Experiment::exp1}, {1, 2}, base, "tmp_pipeline/suite_mini", 2);
    REQUIRE(r.rows.size() == 2);
    CHECK(r.rows[0].ok);
    CHECK(r.rows[1].ok);
    CHECK(r.summary_text.find("exp1") != std::string::npos);
    CHECK(fs::exists("tmp_pipeline/suite_mini/exp1/seed1/report.json"));
    CHECK(fs::exists("tmp_pipeline/suite_mini/exp1/seed2/report.json"));
}
