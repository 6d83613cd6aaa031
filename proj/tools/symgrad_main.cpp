// Command-line front end: data generation, training, gradient extraction,
// symbolic search, and the full per-experiment pipeline.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "symgrad/datagen.hpp"
#include "symgrad/pipeline.hpp"

using namespace symgrad;

namespace {

pipeline::ExperimentConfig load_config(const std::string& config_path,
                                       const std::string& experiment_id) {
    pipeline::ExperimentConfig cfg = pipeline::default_config(Experiment::exp1);
    if (!config_path.empty())
        cfg = pipeline::apply_config(KeyValueConfig::parse_file(config_path), cfg);
    if (!experiment_id.empty()) cfg.experiment = parse_experiment(experiment_id);
    return cfg;
}

int cmd_gen(const std::string& experiment_id, std::size_t count, std::uint64_t seed,
            double range, int threads, const std::string& out) {
    const Experiment e = parse_experiment(experiment_id);
    const double r = range > 0 ? range : experiment_info(e).default_range;
    const TripletDataset ds = datagen::gen_dataset(e, count, r, seed, threads);
    save_triplets(out, ds);
    std::printf("wrote %zu triplets to %s\n", ds.triplets.size(), out.c_str());
    return 0;
}

int cmd_train(const std::string& experiment_id, const std::string& triplets_path,
              const std::string& config_path, std::optional<std::uint64_t> seed,
              const std::string& out) {
    const TripletDataset data = load_triplets(triplets_path);
    if (!experiment_id.empty() && experiment_id != data.header.experiment)
        throw std::runtime_error("--experiment " + experiment_id +
                                 " does not match the triplet file (" +
                                 data.header.experiment + ")");
    pipeline::ExperimentConfig cfg = load_config(config_path, data.header.experiment);
    if (seed) cfg.seed = *seed;

    std::vector<int> dims;
    dims.push_back(data.header.d);
    dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    dims.push_back(cfg.latent_width);
    net::LatentModel model =
        net::init_model(dims, cfg.activation, derive_seed(cfg.seed, 103));
    model.target_neuron = cfg.target_neuron;
    net::TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, 104);
    const net::TrainResult result = net::train(model, data, tc);
    net::save_model(out, model, hash_file(triplets_path));
    std::printf("trained %d epochs, final mean loss %.6f, model at %s\n", tc.epochs,
                result.final_loss(), out.c_str());
    return 0;
}

int cmd_grads(const std::string& model_path, const std::string& inputs_path,
              double epsilon, const std::string& out) {
    const net::LatentModel model = net::load_model(model_path);
    const TripletDataset inputs = load_triplets(inputs_path);
    std::vector<std::vector<double>> anchors;
    anchors.reserve(inputs.triplets.size());
    for (const Triplet& t : inputs.triplets) anchors.push_back(t.anchor);

    GradientDataset ds = gradfield::extract_gradients(model, anchors, epsilon);
    ds.header.experiment = inputs.header.experiment;
    ds.header.model_hash = hash_file(model_path);
    ds.header.input_hash = hash_file(inputs_path);
    save_gradients(out, ds);
    std::printf("extracted %zu gradients (%llu dropped%s) to %s\n", ds.samples.size(),
                (unsigned long long)ds.header.dropped,
                ds.header.drop_warning ? ", over 1%: check the model" : "", out.c_str());
    return 0;
}

symsearch::SearchConfig search_config(const std::string& config_path,
                                      const std::string& operators,
                                      std::optional<std::uint64_t> seed) {
    pipeline::ExperimentConfig cfg = load_config(config_path, "");
    if (!operators.empty())
        cfg.search.operator_set = symsearch::parse_operators(operators);
    if (seed) cfg.search.seed = derive_seed(*seed, 105);
    return cfg.search;
}

int cmd_search(const std::string& grads_path, const std::string& config_path,
               const std::string& operators, std::optional<std::uint64_t> seed,
               const std::string& out) {
    const GradientDataset ds = load_gradients(grads_path);
    const auto front = symsearch::evolve(ds, search_config(config_path, operators, seed));
    symsearch::save_front_csv(out, front, hash_file(grads_path));
    std::printf("front with %zu entries at %s\n", front.size(), out.c_str());
    for (const auto& p : front)
        std::printf("  c=%-3d mse_val=%-12.4g %s\n", p.complexity, p.mse_val,
                    p.expression.c_str());
    return 0;
}

int cmd_oracle_search(const std::string& experiment_id, std::size_t count,
                      std::uint64_t seed, const std::string& config_path,
                      const std::string& operators, const std::string& out,
                      const std::string& grads_out) {
    const Experiment e = parse_experiment(experiment_id);
    const GradientDataset ds = gradfield::oracle_gradient_dataset(
        e, count, experiment_info(e).default_range, derive_seed(seed, 102));
    if (!grads_out.empty()) save_gradients(grads_out, ds);
    const auto front = symsearch::evolve(ds, search_config(config_path, operators, seed));
    symsearch::save_front_csv(out, front, "oracle");
    const auto probes = datagen::sample_anchors(
        e, 10000, experiment_info(e).default_range, derive_seed(seed, 106));
    std::printf("oracle front for %s (%zu entries):\n", experiment_id.c_str(),
                front.size());
    for (const auto& p : front) {
        const auto expr = symsearch::parse_expr(p.expression, experiment_info(e).d);
        const auto v = pipeline::verdict_any_invariant(expr, e, probes);
        std::printf("  c=%-3d mse_val=%-12.4g %s %s\n", p.complexity, p.mse_val,
                    v.equivalent ? "PASS" : "    ", p.expression.c_str());
    }
    if (!front.empty()) {
        const auto knee = symsearch::knee_point(front);
        std::printf("knee: %s\n", knee.expression.c_str());
    }
    return 0;
}

int cmd_run(const std::string& experiment_id, const std::string& config_path,
            std::optional<std::uint64_t> seed, const std::string& out,
            bool print_config) {
    pipeline::ExperimentConfig cfg = load_config(config_path, experiment_id);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out_dir = out;
    if (print_config) {
        std::fputs(pipeline::config_to_text(cfg).c_str(), stdout);
        return 0;
    }
    const pipeline::RunReport rep = pipeline::run_experiment(cfg);
    std::fputs(pipeline::report_summary_text(rep).c_str(), stdout);
    return rep.any_front_pass ? 0 : 2;
}

int cmd_suite(const std::string& experiments_list, const std::string& seeds_list,
              const std::string& config_path, const std::string& out, int jobs) {
    std::vector<Experiment> experiments;
    for (const std::string& id : split_list(experiments_list))
        experiments.push_back(parse_experiment(id));
    std::vector<std::uint64_t> seeds;
    for (const std::string& s : split_list(seeds_list))
        seeds.push_back(std::strtoull(s.c_str(), nullptr, 10));
    const pipeline::ExperimentConfig base = load_config(config_path, "");
    const pipeline::SuiteResult r = pipeline::run_suite(experiments, seeds, base, out, jobs);
    std::fputs(r.summary_text.c_str(), stdout);
    write_text_file(out + "/suite_summary.txt", r.summary_text);
    return 0;
}

int cmd_verdict(const std::string& expr_text, const std::string& experiment_id,
                std::size_t probe_count, std::uint64_t seed, bool any_invariant,
                const std::string& front_path, const std::string& grads_path) {
    const Experiment e = parse_experiment(experiment_id);
    if (!front_path.empty() && !grads_path.empty()) {
        std::string recorded;
        (void)symsearch::load_front_csv(front_path, &recorded);
        if (recorded != hash_file(grads_path)) {
            std::fprintf(stderr,
                         "provenance mismatch: front built from input %s, but %s hashes "
                         "to %s\n",
                         recorded.c_str(), grads_path.c_str(),
                         hash_file(grads_path).c_str());
            return 1;
        }
    }
    const auto expr = symsearch::parse_expr(expr_text, experiment_info(e).d);
    const auto probes = datagen::sample_anchors(
        e, probe_count, experiment_info(e).default_range, derive_seed(seed, 106));
    const auto v = any_invariant ? pipeline::verdict_any_invariant(expr, e, probes)
                                 : pipeline::equivalence_verdict(expr, e, probes);
    std::printf("alignment=%.6f rank_corr=%.6f sign_consistency=%.6f probes=%zu\n",
                v.alignment, v.rank_corr, v.sign_consistency, v.usable_probes);
    if (!v.conclusive) {
        std::printf("verdict: inconclusive (fewer than 100 usable probes)\n");
        return 3;
    }
    std::printf("verdict: %s (vs %s)\n", v.equivalent ? "equivalent" : "not equivalent",
                v.invariant.c_str());
    return v.equivalent ? 0 : 2;
}

int cmd_correlate(const std::string& model_path, const std::string& experiment_id,
                  const std::string& inputs_path, const std::string& out) {
    const Experiment e = parse_experiment(experiment_id);
    const net::LatentModel model = net::load_model(model_path);
    const TripletDataset inputs = load_triplets(inputs_path);
    std::vector<std::vector<double>> xs;
    xs.reserve(inputs.triplets.size());
    for (const Triplet& t : inputs.triplets) xs.push_back(t.anchor);
    const double corr =
        pipeline::emit_correlation(model, e, xs, out, hash_file(model_path));
    std::printf("wrote %zu rows to %s, rank correlation magnitude %.6f\n", xs.size(),
                out.c_str(), corr);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-form interpretation of latent-space neurons via "
                 "gradient-matched symbolic search"};
    app.require_subcommand(1);

    std::string experiment, out, config_path, triplets, model_path, inputs, grads_path;
    std::string operators, expr_text, experiments_list, seeds_list, front_path, grads_out;
    std::size_t count = 50000, probe_count = 10000;
    std::uint64_t seed = 42;
    bool has_seed = false, print_config = false, any_invariant = false;
    double range = 0.0, epsilon = gradfield::kDefaultEpsilon;
    int threads = 1, jobs = 1;

    auto* gen = app.add_subcommand("gen", "generate a triplet dataset");
    gen->add_option("--experiment", experiment)->required();
    gen->add_option("--count", count);
    gen->add_option("--seed", seed);
    gen->add_option("--range", range);
    gen->add_option("--threads", threads);
    gen->add_option("--out", out)->required();

    auto* train = app.add_subcommand("train", "train a Siamese latent model on triplets");
    train->add_option("--experiment", experiment);
    train->add_option("--triplets", triplets)->required();
    train->add_option("--config", config_path);
    train->add_option("--seed", seed)->each([&](const std::string&) { has_seed = true; });
    train->add_option("--out", out)->required();

    auto* grads = app.add_subcommand(
        "grads", "extract normalized input gradients at the target neuron");
    grads->add_option("--model", model_path)->required();
    grads->add_option("--inputs", inputs)->required();
    grads->add_option("--epsilon", epsilon);
    grads->add_option("--out", out)->required();

    auto* search =
        app.add_subcommand("search", "genetic symbolic search over a gradient file");
    search->add_option("--grads", grads_path)->required();
    search->add_option("--config", config_path);
    search->add_option("--operators", operators);
    search->add_option("--seed", seed)->each([&](const std::string&) { has_seed = true; });
    search->add_option("--out", out)->required();

    auto* oracle = app.add_subcommand(
        "oracle-search", "symbolic search against analytic gradient oracles");
    oracle->add_option("--experiment", experiment)->required();
    oracle->add_option("--count", count)->default_val(std::size_t(4000));
    oracle->add_option("--seed", seed);
    oracle->add_option("--config", config_path);
    oracle->add_option("--operators", operators);
    oracle->add_option("--grads-out", grads_out);
    oracle->add_option("--out", out)->required();

    auto* run =
        app.add_subcommand("run", "full pipeline: gen, train, grads, search, report");
    run->add_option("--experiment", experiment)->required();
    run->add_option("--config", config_path);
    run->add_option("--seed", seed)->each([&](const std::string&) { has_seed = true; });
    run->add_option("--out", out);
    run->add_flag("--print-config", print_config);

    auto* suite = app.add_subcommand("suite", "run experiments x seeds and summarize");
    suite->add_option("--experiments", experiments_list)->required();
    suite->add_option("--seeds", seeds_list)->required();
    suite->add_option("--config", config_path);
    suite->add_option("--jobs", jobs);
    suite->add_option("--out", out)->required();

    auto* verdict = app.add_subcommand(
        "verdict", "equivalence verdict for an expression vs ground truth");
    verdict->add_option("--expr", expr_text)->required();
    verdict->add_option("--experiment", experiment)->required();
    verdict->add_option("--probes", probe_count);
    verdict->add_option("--seed", seed);
    verdict->add_flag("--any-invariant", any_invariant);
    verdict->add_option("--front", front_path);
    verdict->add_option("--grads", grads_path);

    auto* correlate =
        app.add_subcommand("correlate", "emit (truth, latent) correlation table");
    correlate->add_option("--model", model_path)->required();
    correlate->add_option("--experiment", experiment)->required();
    correlate->add_option("--inputs", inputs)->required();
    correlate->add_option("--out", out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen(experiment, count, seed, range, threads, out);
        if (train->parsed())
            return cmd_train(experiment, triplets, config_path,
                             has_seed ? std::optional(seed) : std::nullopt, out);
        if (grads->parsed()) return cmd_grads(model_path, inputs, epsilon, out);
        if (search->parsed())
            return cmd_search(grads_path, config_path, operators,
                              has_seed ? std::optional(seed) : std::nullopt, out);
        if (oracle->parsed())
            return cmd_oracle_search(experiment, count, seed, config_path, operators, out,
                                     grads_out);
        if (run->parsed())
            return cmd_run(experiment, config_path,
                           has_seed ? std::optional(seed) : std::nullopt, out,
                           print_config);
        if (suite->parsed())
            return cmd_suite(experiments_list, seeds_list, config_path, out, jobs);
        if (verdict->parsed())
            return cmd_verdict(expr_text, experiment, probe_count, seed, any_invariant,
                               front_path, grads_path);
        if (correlate->parsed()) return cmd_correlate(model_path, experiment, inputs, out);
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 1;
}
