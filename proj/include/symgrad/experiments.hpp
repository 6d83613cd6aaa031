#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace symgrad {

enum class Experiment {
    exp1,   // 2x2 similarity, trace
    exp2,   // 2x2 similarity at fixed trace, determinant
    exp3,   // 3x3 similarity, trace
    exp4,   // 3x3 antisymmetric similarity, sum of principal minors
    exp5,   // 4x4 similarity, trace
    exp6,   // field strength tensor under Lorentz, E.B
    exp7,   // harmonic potential, energy
    exp8,   // pendulum potential, energy
    exp9,   // anharmonic potential, energy
    exp10,  // exponential potential, energy
    exp11,  // central potential, angular momentum
    exp12,  // Minkowski event under Lorentz, interval
};

constexpr int kExperimentCount = 12;

Experiment parse_experiment(const std::string& id);  // throws on unknown id
std::string to_string(Experiment e);
std::vector<Experiment> all_experiments();

enum class Potential { harmonic, pendulum, anharmonic, exponential, central };

Potential parse_potential(const std::string& name);
std::string to_string(Potential p);

enum class MatrixMode { free_sampling, fixed_trace, antisymmetric };

MatrixMode parse_matrix_mode(const std::string& name);
std::string to_string(MatrixMode m);

enum class ExperimentKind { matrix, field_tensor, trajectory, spacetime };

struct ExperimentInfo {
    Experiment id;
    int d;                  // network input dimension
    ExperimentKind kind;
    std::string name;
    std::string invariant;  // targeted invariant
    double default_range;   // sampling half-width
    int matrix_n;           // matrix experiments only
    MatrixMode mode;        // matrix experiments only
    Potential potential;    // trajectory experiments only
    // Minimum |invariant(anchor) - invariant(negative)|. A buffer of a few
    // percent of the invariant's range lets the hinge close completely;
    // hairline separations leave permanently active pairs that fold the
    // learned encoder into a non-monotone map.
    double negative_separation;
};

const ExperimentInfo& experiment_info(Experiment e);

// Targeted invariant evaluated at a flattened input vector.
double ground_truth_value(Experiment e, std::span<const double> x);

// Exact analytic gradient of ground_truth_value.
std::vector<double> ground_truth_gradient(Experiment e, std::span<const double> x);

// Targeted invariant as a prefix-grammar expression over x0..x{d-1}.
std::string ground_truth_expression(Experiment e);

// Every invariant the generated data actually preserves, targeted one first.
// The equivalence verdict accepts a match against any of them.
struct InvariantOracle {
    std::string name;
    std::string expression;
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;
};

std::vector<InvariantOracle> known_invariants(Experiment e);

}  // namespace symgrad
