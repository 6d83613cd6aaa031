#include "symgrad/micronet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "symgrad/io.hpp"
#include "symgrad/linalg.hpp"
#include "symgrad/rng.hpp"

namespace symgrad::net {

using nlohmann::json;

Activation parse_activation(const std::string& name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "softplus") return Activation::softplus;
    throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation a) {
    return a == Activation::tanh ? "tanh" : "softplus";
}

Optimizer parse_optimizer(const std::string& name) {
    if (name == "sgd") return Optimizer::sgd;
    if (name == "adam") return Optimizer::adam;
    throw std::invalid_argument("unknown optimizer: " + name);
}

std::string to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

LatentModel init_model(const std::vector<int>& layer_dims, Activation activation,
                       std::uint64_t seed) {
    if (layer_dims.size() < 2)
        throw std::invalid_argument("init_model: need at least input and latent layers");
    for (int w : layer_dims)
        if (w < 1) throw std::invalid_argument("init_model: zero-width layer");

    LatentModel m;
    m.layer_dims = layer_dims;
    m.activation = activation;
    Rng rng = make_rng(seed);
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const int fan_in = layer_dims[l];
        const int fan_out = layer_dims[l + 1];
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::vector<double> w(std::size_t(fan_in) * fan_out);
        for (double& v : w) v = uniform(rng, -limit, limit);
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(std::size_t(fan_out), 0.0);
    }
    return m;
}

namespace {

inline double act_value(Activation a, double z) {
    return a == Activation::tanh ? std::tanh(z) : std::log1p(std::exp(-std::fabs(z))) +
                                                      std::max(z, 0.0);
}

// derivative computed from the activation output
inline double act_deriv_from_out(Activation a, double out) {
    return a == Activation::tanh ? 1.0 - out * out : 1.0 - std::exp(-out);
}

struct Workspace {
    std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer l output
};

void ensure(Workspace& w, const LatentModel& m) {
    w.act.resize(m.layer_dims.size());
    for (std::size_t i = 0; i < m.layer_dims.size(); ++i)
        w.act[i].resize(std::size_t(m.layer_dims[i]));
}

void forward_into(const LatentModel& m, std::span<const double> x, Workspace& w) {
    ensure(w, m);
    std::copy(x.begin(), x.end(), w.act[0].begin());
    const std::size_t layers = m.layer_count();
    for (std::size_t l = 0; l < layers; ++l) {
        const auto& in = w.act[l];
        auto& out = w.act[l + 1];
        const int n_in = m.layer_dims[l];
        const int n_out = m.layer_dims[l + 1];
        const double* wrow = m.weights[l].data();
        const bool hidden = l + 1 < layers;
        for (int j = 0; j < n_out; ++j, wrow += n_in) {
            double z = m.biases[l][std::size_t(j)];
            for (int k = 0; k < n_in; ++k) z += wrow[k] * in[std::size_t(k)];
            out[std::size_t(j)] = hidden ? act_value(m.activation, z) : z;
        }
    }
}

// Backpropagate an output delta down to the input; optionally accumulate
// parameter gradients (scaled) into gw/gb.
void backward(const LatentModel& m, const Workspace& w, std::vector<double>& delta,
              std::vector<double>& scratch, double scale,
              std::vector<std::vector<double>>* gw, std::vector<std::vector<double>>* gb) {
    const std::size_t layers = m.layer_count();
    for (std::size_t l = layers; l-- > 0;) {
        const auto& in = w.act[l];
        const int n_in = m.layer_dims[l];
        const int n_out = m.layer_dims[l + 1];
        if (gw) {
            double* gwl = (*gw)[l].data();
            double* gbl = (*gb)[l].data();
            for (int j = 0; j < n_out; ++j, gwl += n_in) {
                const double dj = scale * delta[std::size_t(j)];
                gbl[j] += dj;
                for (int k = 0; k < n_in; ++k) gwl[k] += dj * in[std::size_t(k)];
            }
        }
        scratch.assign(std::size_t(n_in), 0.0);
        const double* wrow = m.weights[l].data();
        for (int j = 0; j < n_out; ++j, wrow += n_in) {
            const double dj = delta[std::size_t(j)];
            for (int k = 0; k < n_in; ++k) scratch[std::size_t(k)] += dj * wrow[k];
        }
        if (l > 0)
            for (int k = 0; k < n_in; ++k)
                scratch[std::size_t(k)] *=
                    act_deriv_from_out(m.activation, w.act[l][std::size_t(k)]);
        delta.swap(scratch);
    }
}

}  // namespace

std::vector<double> forward(const LatentModel& m, std::span<const double> x) {
    if (int(x.size()) != m.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    thread_local Workspace w;
    forward_into(m, x, w);
    return w.act.back();
}

std::vector<double> input_gradient(const LatentModel& m, std::span<const double> x,
                                   int neuron_index) {
    if (int(x.size()) != m.input_dim())
        throw std::invalid_argument("input_gradient: input dimension mismatch");
    if (neuron_index < 0 || neuron_index >= m.latent_dim())
        throw std::invalid_argument("input_gradient: neuron index out of range");
    thread_local Workspace w;
    thread_local std::vector<double> delta, scratch;
    forward_into(m, x, w);
    delta.assign(std::size_t(m.latent_dim()), 0.0);
    delta[std::size_t(neuron_index)] = 1.0;
    backward(m, w, delta, scratch, 0.0, nullptr, nullptr);
    return delta;
}

double triplet_loss(std::span<const double> fa, std::span<const double> fp,
                    std::span<const double> fn, double margin) {
    if (fa.size() != fp.size() || fa.size() != fn.size())
        throw std::invalid_argument("triplet_loss: embedding size mismatch");
    double dp = 0.0, dn = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
        const double ep = fa[i] - fp[i];
        const double en = fa[i] - fn[i];
        dp += ep * ep;
        dn += en * en;
    }
    return std::max(0.0, dp - dn + margin);
}

TrainResult train(LatentModel& model, const TripletDataset& data, const TrainConfig& cfg) {
    if (data.triplets.empty()) throw std::invalid_argument("train: empty dataset");
    if (cfg.margin <= 0) throw std::invalid_argument("train: margin must be positive");
    if (cfg.batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    for (const Triplet& t : data.triplets)
        if (int(t.anchor.size()) != model.input_dim() ||
            int(t.positive.size()) != model.input_dim() ||
            int(t.negative.size()) != model.input_dim())
            throw std::invalid_argument("train: triplet dimension mismatch");

    const std::size_t n = data.triplets.size();
    const std::size_t layers = model.layer_count();

    std::vector<std::vector<double>> gw(layers), gb(layers);
    std::vector<std::vector<double>> mw(layers), vw(layers), mb(layers), vb(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        gw[l].assign(model.weights[l].size(), 0.0);
        gb[l].assign(model.biases[l].size(), 0.0);
        mw[l] = vw[l] = gw[l];
        mb[l] = vb[l] = gb[l];
    }

    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
    long step = 0;

    auto apply_update = [&] {
        ++step;
        for (std::size_t l = 0; l < layers; ++l) {
            auto update = [&](std::vector<double>& theta, std::vector<double>& g,
                              std::vector<double>& m1, std::vector<double>& m2) {
                if (cfg.optimizer == Optimizer::sgd) {
                    for (std::size_t i = 0; i < theta.size(); ++i)
                        theta[i] -= cfg.learning_rate * g[i];
                    return;
                }
                const double c1 = 1.0 - std::pow(kBeta1, double(step));
                const double c2 = 1.0 - std::pow(kBeta2, double(step));
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    m1[i] = kBeta1 * m1[i] + (1.0 - kBeta1) * g[i];
                    m2[i] = kBeta2 * m2[i] + (1.0 - kBeta2) * g[i] * g[i];
                    theta[i] -= cfg.learning_rate * (m1[i] / c1) /
                                (std::sqrt(m2[i] / c2) + kAdamEps);
                }
            };
            update(model.weights[l], gw[l], mw[l], vw[l]);
            update(model.biases[l], gb[l], mb[l], vb[l]);
        }
    };

    Rng rng = make_rng(derive_seed(cfg.seed, 0xbadc0ffeULL));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    Workspace wa, wp, wn;
    std::vector<double> delta, scratch;
    const int latent = model.latent_dim();

    TrainResult result;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        for (std::size_t begin = 0; begin < n; begin += std::size_t(cfg.batch_size)) {
            const std::size_t end = std::min(n, begin + std::size_t(cfg.batch_size));
            const double inv_batch = 1.0 / double(end - begin);
            for (std::size_t l = 0; l < layers; ++l) {
                std::fill(gw[l].begin(), gw[l].end(), 0.0);
                std::fill(gb[l].begin(), gb[l].end(), 0.0);
            }
            double batch_sum = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                const Triplet& t = data.triplets[order[i]];
                forward_into(model, t.anchor, wa);
                forward_into(model, t.positive, wp);
                forward_into(model, t.negative, wn);
                const auto& fa = wa.act.back();
                const auto& fp = wp.act.back();
                const auto& fn = wn.act.back();
                const double loss = triplet_loss(fa, fp, fn, cfg.margin);
                batch_sum += loss;
                if (loss <= 0.0) continue;  // hinge inactive, zero gradient
                // d/dfa = 2(fn-fp), d/dfp = -2(fa-fp), d/dfn = 2(fa-fn)
                delta.resize(std::size_t(latent));
                for (int k = 0; k < latent; ++k)
                    delta[std::size_t(k)] =
                        2.0 * (fn[std::size_t(k)] - fp[std::size_t(k)]);
                backward(model, wa, delta, scratch, inv_batch, &gw, &gb);
                delta.resize(std::size_t(latent));
                for (int k = 0; k < latent; ++k)
                    delta[std::size_t(k)] =
                        -2.0 * (fa[std::size_t(k)] - fp[std::size_t(k)]);
                backward(model, wp, delta, scratch, inv_batch, &gw, &gb);
                delta.resize(std::size_t(latent));
                for (int k = 0; k < latent; ++k)
                    delta[std::size_t(k)] = 2.0 * (fa[std::size_t(k)] - fn[std::size_t(k)]);
                backward(model, wn, delta, scratch, inv_batch, &gw, &gb);
            }
            if (!std::isfinite(batch_sum))
                throw std::runtime_error("train: non-finite loss at epoch " +
                                         std::to_string(epoch) + ", batch starting at " +
                                         std::to_string(begin));
            epoch_sum += batch_sum;
            apply_update();
        }
        result.epoch_loss.push_back(epoch_sum / double(n));
    }
    return result;
}

void save_model(const std::string& path, const LatentModel& m,
                const std::string& input_hash) {
    json j;
    j["layer_dims"] = m.layer_dims;
    j["activation"] = to_string(m.activation);
    j["target_neuron"] = m.target_neuron;
    j["weights"] = m.weights;
    j["biases"] = m.biases;
    j["input_hash"] = input_hash;
    write_text_file(path, j.dump() + "\n");
}

LatentModel load_model(const std::string& path, std::string* input_hash) {
    const json j = json::parse(read_text_file(path));
    LatentModel m;
    m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
    m.activation = parse_activation(j.at("activation").get<std::string>());
    m.target_neuron = j.at("target_neuron").get<int>();
    m.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    if (input_hash) *input_hash = j.value("input_hash", "");

    if (m.layer_dims.size() < 2 || m.weights.size() != m.layer_dims.size() - 1 ||
        m.biases.size() != m.weights.size())
        throw std::runtime_error("load_model: inconsistent layer structure in " + path);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const std::size_t rows = std::size_t(m.layer_dims[l + 1]);
        const std::size_t cols = std::size_t(m.layer_dims[l]);
        if (m.weights[l].size() != rows * cols || m.biases[l].size() != rows)
            throw std::runtime_error("load_model: bad layer shape in " + path);
    }
    if (m.target_neuron < 0 || m.target_neuron >= m.latent_dim())
        throw std::runtime_error("load_model: target neuron out of range in " + path);
    return m;
}

}  // namespace symgrad::net
