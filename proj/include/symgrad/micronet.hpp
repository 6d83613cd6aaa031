#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "symgrad/dataset.hpp"

namespace symgrad::net {

enum class Activation { tanh, softplus };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

// Fully-connected network; hidden layers carry the (C^1) activation, the
// latent layer is affine so gradients are unconstrained in sign. One latent
// neuron is the interpretation target.
struct LatentModel {
    std::vector<int> layer_dims;                // input d, hidden..., latent L
    std::vector<std::vector<double>> weights;   // layer l: layer_dims[l+1] x layer_dims[l], row-major
    std::vector<std::vector<double>> biases;    // layer l: layer_dims[l+1]
    Activation activation = Activation::tanh;
    int target_neuron = 0;

    int input_dim() const { return layer_dims.front(); }
    int latent_dim() const { return layer_dims.back(); }
    std::size_t layer_count() const { return weights.size(); }
};

// Glorot-uniform weights, zero biases, deterministic per seed.
LatentModel init_model(const std::vector<int>& layer_dims, Activation activation,
                       std::uint64_t seed);

std::vector<double> forward(const LatentModel& m, std::span<const double> x);

// Exact reverse-mode gradient of one latent neuron w.r.t. the input.
std::vector<double> input_gradient(const LatentModel& m, std::span<const double> x,
                                   int neuron_index);

// max(0, |fa-fp|^2 - |fa-fn|^2 + margin)
double triplet_loss(std::span<const double> fa, std::span<const double> fp,
                    std::span<const double> fn, double margin);

enum class Optimizer { sgd, adam };

Optimizer parse_optimizer(const std::string& name);
std::string to_string(Optimizer o);

struct TrainConfig {
    double margin = 1.0;
    double learning_rate = 1e-3;
    int batch_size = 128;
    int epochs = 50;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::adam;
};

struct TrainResult {
    std::vector<double> epoch_loss;  // mean triplet loss per epoch

    double final_loss() const { return epoch_loss.empty() ? 0.0 : epoch_loss.back(); }
};

// Mini-batched training over shuffled triplets; single-threaded and
// bit-reproducible per (seed, config, data). Throws on non-finite loss.
TrainResult train(LatentModel& model, const TripletDataset& data, const TrainConfig& cfg);

// JSON model file; numeric fields round-trip bit-exactly.
void save_model(const std::string& path, const LatentModel& m,
                const std::string& input_hash = "");
LatentModel load_model(const std::string& path, std::string* input_hash = nullptr);

}  // namespace symgrad::net
