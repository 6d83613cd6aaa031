#include "symgrad/gradfield.hpp"

#include <cmath>
#include <stdexcept>

#include "symgrad/datagen.hpp"
#include "symgrad/linalg.hpp"

namespace symgrad::gradfield {

std::vector<double> normalize(std::span<const double> v, double epsilon) {
    if (epsilon <= 0) throw std::invalid_argument("normalize: epsilon must be > 0");
    const double scale = 1.0 / (norm(v) + epsilon);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * scale;
    return out;
}

namespace {

// Keep the stored-norm invariant: either exactly zero or within 1e-6 of unit.
bool keepable(std::span<const double> raw, double epsilon, double raw_norm) {
    if (!all_finite(raw)) return false;
    if (raw_norm == 0.0) return true;
    return epsilon / raw_norm <= 1e-6;
}

GradientDataset assemble(std::span<const std::vector<double>> inputs,
                         std::span<const std::vector<double>> raw_gradients,
                         double epsilon) {
    GradientDataset ds;
    ds.header.epsilon = epsilon;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto& raw = raw_gradients[i];
        const double raw_norm = norm(raw);
        if (!keepable(raw, epsilon, raw_norm)) {
            ++ds.header.dropped;
            continue;
        }
        GradientSample s;
        s.x = inputs[i];
        s.g = raw_norm == 0.0 ? raw : normalize(raw, epsilon);
        s.split = split_for_index(i);
        ds.samples.push_back(std::move(s));
    }
    ds.header.drop_warning = ds.header.dropped * 100 > inputs.size();
    return ds;
}

}  // namespace

GradientDataset extract_gradients(const net::LatentModel& model,
                                  std::span<const std::vector<double>> inputs,
                                  double epsilon) {
    if (inputs.empty()) throw std::invalid_argument("extract_gradients: empty input set");
    std::vector<std::vector<double>> raw(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (int(inputs[i].size()) != model.input_dim())
            throw std::invalid_argument("extract_gradients: input dimension mismatch");
        raw[i] = net::input_gradient(model, inputs[i], model.target_neuron);
    }
    GradientDataset ds = assemble(inputs, raw, epsilon);
    ds.header.d = model.input_dim();
    return ds;
}

GradientDataset oracle_gradient_dataset(Experiment e, std::size_t count, double range,
                                        std::uint64_t seed, double epsilon) {
    const auto inputs = datagen::sample_anchors(e, count, range, seed);
    std::vector<std::vector<double>> raw(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i)
        raw[i] = ground_truth_gradient(e, inputs[i]);
    GradientDataset ds = assemble(inputs, raw, epsilon);
    ds.header.experiment = to_string(e);
    ds.header.d = experiment_info(e).d;
    ds.header.model_hash = "oracle";
    return ds;
}

}  // namespace symgrad::gradfield
