#include "symgrad/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "symgrad/datagen.hpp"
#include "symgrad/linalg.hpp"

namespace symgrad::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using symsearch::Expr;
using symsearch::ParetoEntry;

// --- configuration -------------------------------------------------------------

ExperimentConfig default_config(Experiment e) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    return cfg;
}

ExperimentConfig apply_config(const KeyValueConfig& kv, ExperimentConfig base) {
    ExperimentConfig& c = base;
    if (kv.has("experiment.id")) c.experiment = parse_experiment(kv.get("experiment.id", ""));
    c.seed = std::uint64_t(kv.get_int("experiment.seed", std::int64_t(c.seed)));
    c.out_dir = kv.get("experiment.out", c.out_dir);
    c.count = std::size_t(kv.get_int("experiment.count", std::int64_t(c.count)));
    c.range = kv.get_double("experiment.range", c.range);
    c.gen_threads = int(kv.get_int("experiment.threads", c.gen_threads));

    if (kv.has("train.hidden")) {
        c.hidden.clear();
        for (const std::string& tok : split_list(kv.get("train.hidden", "")))
            c.hidden.push_back(std::stoi(tok));
    }
    c.latent_width = int(kv.get_int("train.latent", c.latent_width));
    c.target_neuron = int(kv.get_int("train.target_neuron", c.target_neuron));
    if (kv.has("train.activation"))
        c.activation = net::parse_activation(kv.get("train.activation", ""));
    c.train.margin = kv.get_double("train.margin", c.train.margin);
    c.train.learning_rate = kv.get_double("train.learning_rate", c.train.learning_rate);
    c.train.batch_size = int(kv.get_int("train.batch_size", c.train.batch_size));
    c.train.epochs = int(kv.get_int("train.epochs", c.train.epochs));
    if (kv.has("train.optimizer"))
        c.train.optimizer = net::parse_optimizer(kv.get("train.optimizer", ""));

    c.epsilon = kv.get_double("grads.epsilon", c.epsilon);
    c.eval_count = std::size_t(kv.get_int("grads.eval_count", std::int64_t(c.eval_count)));

    c.search.population_size = int(kv.get_int("search.population", c.search.population_size));
    c.search.generations = int(kv.get_int("search.generations", c.search.generations));
    c.search.tournament_size = int(kv.get_int("search.tournament", c.search.tournament_size));
    c.search.mutation_rate = kv.get_double("search.mutation_rate", c.search.mutation_rate);
    c.search.crossover_rate = kv.get_double("search.crossover_rate", c.search.crossover_rate);
    c.search.max_complexity = int(kv.get_int("search.max_complexity", c.search.max_complexity));
    if (kv.has("search.operators"))
        c.search.operator_set = symsearch::parse_operators(kv.get("search.operators", ""));
    c.search.constant_range = kv.get_double("search.constant_range", c.search.constant_range);
    c.search.constant_refinement =
        kv.get_bool("search.constant_refinement", c.search.constant_refinement);
    c.search.stop_mse = kv.get_double("search.stop_mse", c.search.stop_mse);

    c.probe_count = std::size_t(kv.get_int("report.probes", std::int64_t(c.probe_count)));
    return base;
}

ExperimentConfig config_from_file(const std::string& path,
                                  std::optional<Experiment> experiment_override) {
    const KeyValueConfig kv = KeyValueConfig::parse_file(path);
    ExperimentConfig cfg = default_config(Experiment::exp1);
    cfg = apply_config(kv, cfg);
    if (experiment_override) cfg.experiment = *experiment_override;
    return cfg;
}

std::string config_to_text(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "[experiment]\n";
    out << "id = " << to_string(c.experiment) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "out = " << c.out_dir << "\n";
    out << "count = " << c.count << "\n";
    out << "range = " << format_double(c.effective_range()) << "\n";
    out << "threads = " << c.gen_threads << "\n";
    out << "\n[train]\n";
    out << "hidden = ";
    for (std::size_t i = 0; i < c.hidden.size(); ++i)
        out << (i ? "," : "") << c.hidden[i];
    out << "\n";
    out << "latent = " << c.latent_width << "\n";
    out << "target_neuron = " << c.target_neuron << "\n";
    out << "activation = " << net::to_string(c.activation) << "\n";
    out << "margin = " << format_double(c.train.margin) << "\n";
    out << "learning_rate = " << format_double(c.train.learning_rate) << "\n";
    out << "batch_size = " << c.train.batch_size << "\n";
    out << "epochs = " << c.train.epochs << "\n";
    out << "optimizer = " << net::to_string(c.train.optimizer) << "\n";
    out << "\n[grads]\n";
    out << "epsilon = " << format_double(c.epsilon) << "\n";
    out << "eval_count = " << c.eval_count << "\n";
    out << "\n[search]\n";
    out << "population = " << c.search.population_size << "\n";
    out << "generations = " << c.search.generations << "\n";
    out << "tournament = " << c.search.tournament_size << "\n";
    out << "mutation_rate = " << format_double(c.search.mutation_rate) << "\n";
    out << "crossover_rate = " << format_double(c.search.crossover_rate) << "\n";
    out << "max_complexity = " << c.search.max_complexity << "\n";
    out << "operators = " << symsearch::format_operators(c.search.operator_set) << "\n";
    out << "constant_range = " << format_double(c.search.constant_range) << "\n";
    out << "constant_refinement = " << (c.search.constant_refinement ? "true" : "false")
        << "\n";
    out << "stop_mse = " << format_double(c.search.stop_mse) << "\n";
    out << "\n[report]\n";
    out << "probes = " << c.probe_count << "\n";
    return out.str();
}

// --- statistics ----------------------------------------------------------------

namespace {

std::vector<double> rank_vector(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = 0.5 * (double(i) + double(j)) + 1.0;  // average tied ranks
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    const std::vector<double> ra = rank_vector(a);
    const std::vector<double> rb = rank_vector(b);
    return pearson(ra, rb);
}

// --- equivalence verdict ---------------------------------------------------------

namespace {
constexpr double kGradFloor = 1e-12;
}

VerdictResult verdict_against_oracle(const Expr& expr, const InvariantOracle& oracle,
                                     std::span<const std::vector<double>> probes) {
    VerdictResult r;
    r.invariant = oracle.name;
    std::vector<double> expr_vals, truth_vals;
    std::size_t pos = 0, neg = 0;
    double align_sum = 0.0;
    std::vector<double> grad;
    for (const auto& x : probes) {
        grad.resize(x.size());
        double value = 0.0;
        if (!symsearch::eval_with_gradient(expr, x, value, grad)) continue;
        const std::vector<double> gt = oracle.gradient(x);
        const double ng = norm(grad), nt = norm(gt);
        if (!(ng > kGradFloor) || !(nt > kGradFloor)) continue;
        const double cosine = dot(grad, gt) / (ng * nt);
        align_sum += std::fabs(cosine);
        if (cosine > 0)
            ++pos;
        else if (cosine < 0)
            ++neg;
        expr_vals.push_back(value);
        truth_vals.push_back(oracle.value(x));
    }
    r.usable_probes = expr_vals.size();
    r.conclusive = r.usable_probes >= kMinProbes;
    if (r.usable_probes == 0) return r;
    r.alignment = align_sum / double(r.usable_probes);
    r.rank_corr = std::fabs(spearman(expr_vals, truth_vals));
    r.sign_consistency = double(std::max(pos, neg)) / double(r.usable_probes);
    r.equivalent = r.conclusive && r.alignment >= kAlignmentThreshold &&
                   r.rank_corr >= kRankCorrThreshold &&
                   r.sign_consistency >= kSignThreshold;
    return r;
}

VerdictResult equivalence_verdict(const Expr& expr, Experiment e,
                                  std::span<const std::vector<double>> probes) {
    return verdict_against_oracle(expr, known_invariants(e).front(), probes);
}

VerdictResult verdict_any_invariant(const Expr& expr, Experiment e,
                                    std::span<const std::vector<double>> probes) {
    VerdictResult best;
    bool first = true;
    for (const InvariantOracle& oracle : known_invariants(e)) {
        VerdictResult r = verdict_against_oracle(expr, oracle, probes);
        if (r.equivalent) return r;
        if (first || r.alignment > best.alignment) best = r;
        first = false;
    }
    return best;
}

double emit_correlation(const net::LatentModel& model, Experiment e,
                        std::span<const std::vector<double>> inputs,
                        const std::string& path, const std::string& model_hash) {
    std::vector<double> truth, latent;
    truth.reserve(inputs.size());
    latent.reserve(inputs.size());
    std::string out = "# model_hash=" + model_hash + "\n";
    out += "truth,latent\n";
    for (const auto& x : inputs) {
        const double t = ground_truth_value(e, x);
        const double l =
            net::forward(model, x)[std::size_t(model.target_neuron)];
        truth.push_back(t);
        latent.push_back(l);
        append_double(out, t);
        out += ",";
        append_double(out, l);
        out += "\n";
    }
    write_text_file(path, out);
    return std::fabs(spearman(truth, latent));
}

// --- full pipeline ---------------------------------------------------------------

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::vector<double>> anchors_of(const TripletDataset& ds) {
    std::vector<std::vector<double>> out;
    out.reserve(ds.triplets.size());
    for (const Triplet& t : ds.triplets) out.push_back(t.anchor);
    return out;
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const std::string triplets_path = cfg.out_dir + "/triplets.jsonl";
    const std::string eval_path = cfg.out_dir + "/eval_triplets.jsonl";
    const std::string model_path = cfg.out_dir + "/model.json";
    const std::string grads_path = cfg.out_dir + "/grads.jsonl";
    const std::string front_path = cfg.out_dir + "/pareto.csv";
    const std::string corr_path = cfg.out_dir + "/correlation.csv";

    RunReport rep;
    rep.experiment = to_string(cfg.experiment);
    rep.seed = cfg.seed;
    const double range = cfg.effective_range();

    // gen: training triplets plus a held-out file whose anchors become the
    // gradient evaluation set
    auto t0 = std::chrono::steady_clock::now();
    const TripletDataset train_ds = datagen::gen_dataset(
        cfg.experiment, cfg.count, range, derive_seed(cfg.seed, 101), cfg.gen_threads);
    save_triplets(triplets_path, train_ds);
    const TripletDataset eval_ds = datagen::gen_dataset(
        cfg.experiment, cfg.eval_count, range, derive_seed(cfg.seed, 102), cfg.gen_threads);
    save_triplets(eval_path, eval_ds);
    rep.triplets_hash = hash_file(triplets_path);
    rep.eval_hash = hash_file(eval_path);
    rep.times.gen_s = seconds_since(t0);

    // train
    t0 = std::chrono::steady_clock::now();
    std::vector<int> layer_dims;
    layer_dims.push_back(experiment_info(cfg.experiment).d);
    layer_dims.insert(layer_dims.end(), cfg.hidden.begin(), cfg.hidden.end());
    layer_dims.push_back(cfg.latent_width);
    net::LatentModel model =
        net::init_model(layer_dims, cfg.activation, derive_seed(cfg.seed, 103));
    model.target_neuron = cfg.target_neuron;
    net::TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, 104);
    const net::TrainResult tr = net::train(model, train_ds, tc);
    rep.final_loss = tr.final_loss();
    net::save_model(model_path, model, rep.triplets_hash);
    rep.model_hash = hash_file(model_path);
    rep.times.train_s = seconds_since(t0);

    // grads
    t0 = std::chrono::steady_clock::now();
    const auto anchors = anchors_of(eval_ds);
    GradientDataset grad_ds = gradfield::extract_gradients(model, anchors, cfg.epsilon);
    grad_ds.header.experiment = rep.experiment;
    grad_ds.header.model_hash = rep.model_hash;
    grad_ds.header.input_hash = rep.eval_hash;
    save_gradients(grads_path, grad_ds);
    rep.grads_hash = hash_file(grads_path);
    rep.gradient_count = grad_ds.samples.size();
    rep.gradient_dropped = grad_ds.header.dropped;
    rep.times.grads_s = seconds_since(t0);

    // search
    t0 = std::chrono::steady_clock::now();
    symsearch::SearchConfig sc = cfg.search;
    sc.seed = derive_seed(cfg.seed, 105);
    rep.front = symsearch::evolve(grad_ds, sc);
    symsearch::save_front_csv(front_path, rep.front, rep.grads_hash);
    rep.front_hash = hash_file(front_path);
    rep.times.search_s = seconds_since(t0);

    // report: provenance chain, verdicts, correlation artifact
    t0 = std::chrono::steady_clock::now();
    {
        std::string model_input;
        (void)net::load_model(model_path, &model_input);
        std::string front_input;
        (void)symsearch::load_front_csv(front_path, &front_input);
        const GradientDataset reread = load_gradients(grads_path);
        if (model_input != rep.triplets_hash || reread.header.model_hash != rep.model_hash ||
            reread.header.input_hash != rep.eval_hash || front_input != rep.grads_hash)
            throw std::runtime_error("run_experiment: provenance chain mismatch in " +
                                     cfg.out_dir);
    }

    const auto probes = datagen::sample_anchors(cfg.experiment, cfg.probe_count, range,
                                                derive_seed(cfg.seed, 106));
    const int d = experiment_info(cfg.experiment).d;
    for (const ParetoEntry& entry : rep.front) {
        const Expr expr = symsearch::parse_expr(entry.expression, d);
        FrontVerdict fv{entry, verdict_any_invariant(expr, cfg.experiment, probes)};
        if (fv.verdict.equivalent && !rep.any_front_pass) {
            rep.any_front_pass = true;
            rep.passing_expression = entry.expression;
        }
        rep.front_verdicts.push_back(std::move(fv));
    }
    if (!rep.front.empty()) {
        const ParetoEntry knee = symsearch::knee_point(rep.front);
        rep.knee_expression = knee.expression;
        for (const FrontVerdict& fv : rep.front_verdicts)
            if (fv.entry.expression == knee.expression) rep.knee_verdict = fv.verdict;
    }
    rep.correlation =
        emit_correlation(model, cfg.experiment, anchors, corr_path, rep.model_hash);
    rep.times.report_s = seconds_since(t0);

    write_report(cfg.out_dir, rep);
    return rep;
}

namespace {

json verdict_to_json(const VerdictResult& v) {
    return json{{"alignment", v.alignment},
                {"rank_corr", v.rank_corr},
                {"sign_consistency", v.sign_consistency},
                {"usable_probes", v.usable_probes},
                {"conclusive", v.conclusive},
                {"equivalent", v.equivalent},
                {"invariant", v.invariant}};
}

}  // namespace

void write_report(const std::string& dir, const RunReport& r) {
    json j;
    j["experiment"] = r.experiment;
    j["seed"] = r.seed;
    j["final_loss"] = r.final_loss;
    j["gradients"] = {{"count", r.gradient_count}, {"dropped", r.gradient_dropped}};
    json front = json::array();
    for (const auto& fv : r.front_verdicts)
        front.push_back(json{{"complexity", fv.entry.complexity},
                             {"mse_search", fv.entry.mse_search},
                             {"mse_val", fv.entry.mse_val},
                             {"expression", fv.entry.expression},
                             {"verdict", verdict_to_json(fv.verdict)}});
    j["front"] = front;
    j["knee_expression"] = r.knee_expression;
    j["knee_verdict"] = verdict_to_json(r.knee_verdict);
    j["any_front_pass"] = r.any_front_pass;
    j["passing_expression"] = r.passing_expression;
    j["correlation"] = r.correlation;
    j["stage_seconds"] = {{"gen", r.times.gen_s},
                          {"train", r.times.train_s},
                          {"grads", r.times.grads_s},
                          {"search", r.times.search_s},
                          {"report", r.times.report_s}};
    j["hashes"] = {{"triplets", r.triplets_hash},
                   {"eval_triplets", r.eval_hash},
                   {"model", r.model_hash},
                   {"grads", r.grads_hash},
                   {"front", r.front_hash}};
    write_text_file(dir + "/report.json", j.dump(2) + "\n");
    write_text_file(dir + "/report.txt", report_summary_text(r));
}

std::string report_summary_text(const RunReport& r) {
    std::ostringstream out;
    const Experiment e = parse_experiment(r.experiment);
    out << "experiment      " << r.experiment << " (" << experiment_info(e).name
        << "), seed " << r.seed << "\n";
    out << "final loss      " << format_double(r.final_loss) << "\n";
    out << "gradients       " << r.gradient_count << " kept, " << r.gradient_dropped
        << " dropped\n";
    out << "front           " << r.front.size() << " entries\n";
    char buf[256];
    for (const auto& fv : r.front_verdicts) {
        std::snprintf(buf, sizeof buf, "  c=%-3d mse_val=%-12.4g align=%.4f rank=%.4f %s %s\n",
                      fv.entry.complexity, fv.entry.mse_val, fv.verdict.alignment,
                      fv.verdict.rank_corr, fv.verdict.equivalent ? "PASS" : "    ",
                      fv.entry.expression.c_str());
        out << buf;
    }
    out << "knee            " << (r.knee_expression.empty() ? "-" : r.knee_expression)
        << "\n";
    std::snprintf(buf, sizeof buf,
                  "knee verdict    align=%.4f rank=%.4f sign=%.4f -> %s (vs %s)\n",
                  r.knee_verdict.alignment, r.knee_verdict.rank_corr,
                  r.knee_verdict.sign_consistency,
                  r.knee_verdict.equivalent ? "equivalent" : "not equivalent",
                  r.knee_verdict.invariant.c_str());
    out << buf;
    out << "any front pass  " << (r.any_front_pass ? "yes" : "no") << "\n";
    out << "correlation     " << format_double(r.correlation) << "\n";
    std::snprintf(buf, sizeof buf,
                  "stage seconds   gen %.1f  train %.1f  grads %.1f  search %.1f  report %.1f\n",
                  r.times.gen_s, r.times.train_s, r.times.grads_s, r.times.search_s,
                  r.times.report_s);
    out << buf;
    return out.str();
}

SuiteResult run_suite(const std::vector<Experiment>& experiments,
                      const std::vector<std::uint64_t>& seeds,
                      const ExperimentConfig& base, const std::string& out_root,
                      int jobs) {
    struct Task {
        Experiment e;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (Experiment e : experiments)
        for (std::uint64_t s : seeds) tasks.push_back({e, s});

    SuiteResult result;
    result.rows.resize(tasks.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& t = tasks[i];
            SuiteRow row;
            row.experiment = to_string(t.e);
            row.seed = t.seed;
            try {
                ExperimentConfig cfg = base;
                cfg.experiment = t.e;
                cfg.seed = t.seed;
                if (jobs > 1) cfg.gen_threads = 1;
                cfg.out_dir = out_root + "/" + to_string(t.e) + "/seed" +
                              std::to_string(t.seed);
                const RunReport rep = run_experiment(cfg);
                row.ok = true;
                row.success = rep.any_front_pass;
                row.knee_expression = rep.knee_expression;
            } catch (const std::exception& ex) {
                row.ok = false;
                row.error = ex.what();
            }
            result.rows[i] = std::move(row);
        }
    };

    const int n_threads = std::max(1, std::min<int>(jobs, int(tasks.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::ostringstream out;
    out << "experiment  successes/seeds\n";
    for (Experiment e : experiments) {
        int ok = 0, total = 0;
        for (const SuiteRow& row : result.rows)
            if (row.experiment == to_string(e)) {
                ++total;
                ok += row.success;
            }
        char buf[128];
        std::snprintf(buf, sizeof buf, "%-10s  %d/%d\n", to_string(e).c_str(), ok, total);
        out << buf;
    }
    out << "\nrows:\n";
    for (const SuiteRow& row : result.rows) {
        out << "  " << row.experiment << " seed " << row.seed << ": "
            << (row.ok ? (row.success ? "success" : "no match") : "FAILED " + row.error);
        if (!row.knee_expression.empty()) out << "  knee " << row.knee_expression;
        out << "\n";
    }
    result.summary_text = out.str();
    return result;
}

}  // namespace symgrad::pipeline
