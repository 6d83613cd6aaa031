#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "symgrad/dataset.hpp"
#include "symgrad/experiments.hpp"
#include "symgrad/micronet.hpp"

namespace symgrad::gradfield {

constexpr double kDefaultEpsilon = 1e-12;

// v / (|v| + epsilon)
std::vector<double> normalize(std::span<const double> v, double epsilon);

// Evaluate the target neuron's input gradient over X, normalize, and split
// 80/20 by index hash. Non-finite gradients are dropped and counted, as are
// nonzero gradients too small for the epsilon form to keep unit norm.
GradientDataset extract_gradients(const net::LatentModel& model,
                                  std::span<const std::vector<double>> inputs,
                                  double epsilon = kDefaultEpsilon);

// The same construction with analytic ground-truth gradients standing in for
// the network; evaluation points follow the anchor distribution.
GradientDataset oracle_gradient_dataset(Experiment e, std::size_t count, double range,
                                        std::uint64_t seed,
                                        double epsilon = kDefaultEpsilon);

}  // namespace symgrad::gradfield
