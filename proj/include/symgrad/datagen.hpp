#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "symgrad/dataset.hpp"
#include "symgrad/experiments.hpp"
#include "symgrad/linalg.hpp"
#include "symgrad/rng.hpp"

namespace symgrad::datagen {

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Resample caps and soundness tolerances shared by all generators.
constexpr int kResampleCap = 1000;
constexpr double kDetFloor = 1e-3;
constexpr double kNegativeSeparation = 1e-3;
constexpr double kInvariantTol = 1e-8;

// Integrator defaults, sized to hold the 1e-6 conservation gate.
constexpr double kDt = 1e-3;
constexpr double kHorizon = 10.0;
constexpr double kEnergyDriftGate = 1e-6;

// Boost magnitude used when building triplets. Positives produced by wilder
// maps land far outside the anchor box, where keeping them latent-close to
// the anchor rewards folded (non-monotone) encoders over faithful ones.
constexpr double kTripletBoostCap = 0.5;

// --- matrices ---------------------------------------------------------------

SquareMatrix random_matrix(int n, double range, Rng& rng);
SquareMatrix random_invertible(int n, double range, Rng& rng);
SquareMatrix random_antisymmetric(int n, double range, Rng& rng);

// MAM^-1 via linear solve; throws on singular M.
SquareMatrix similarity_conjugate(const SquareMatrix& a, const SquareMatrix& m);

// Second principal invariant (tr(A)^2 - tr(A^2)) / 2 for any square matrix.
double principal_invariant2(const SquareMatrix& a);

Triplet make_similarity_triplet(int n, MatrixMode mode, double range, Rng& rng,
                                double separation = kNegativeSeparation);

// --- Lorentz ----------------------------------------------------------------

// Boost with velocity beta, |beta| < 1; metric diag(-1,1,1,1).
SquareMatrix lorentz_boost(const std::array<double, 3>& beta);

// Uniform 3D rotation (unit quaternion) embedded in the spatial block.
SquareMatrix random_spatial_rotation(Rng& rng);

// rotation . boost . rotation, |beta| uniform in [0, max_speed].
SquareMatrix random_lorentz(Rng& rng, double max_speed = 0.8);

// max |L^T eta L - eta| entrywise; group-membership measure used in tests.
double lorentz_defect(const SquareMatrix& lambda);

// Field strength tensor from E and B; stored contravariantly so it maps as
// F -> L F L^T. Inputs to the network are the six upper off-diagonal entries
// (F01,F02,F03,F12,F13,F23) = (E1,E2,E3,-B3,B2,-B1).
SquareMatrix field_tensor(const std::array<double, 3>& e_field,
                          const std::array<double, 3>& b_field);
std::array<double, 6> upper_entries(const SquareMatrix& f);

Triplet make_field_tensor_triplet(double range, Rng& rng,
                                  double separation = kNegativeSeparation);
Triplet make_spacetime_triplet(double range, Rng& rng,
                               double separation = kNegativeSeparation);

// --- Hamiltonian trajectories -------------------------------------------------

struct Trajectory {
    Potential potential = Potential::harmonic;
    int dim = 1;        // spatial dimension
    double dt = kDt;
    bool truncated = false;            // hit a non-finite / unsafe state
    std::vector<double> states;        // (x..., v...) per step, flattened

    std::size_t state_count() const { return states.size() / (2 * std::size_t(dim)); }
    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * 2 * std::size_t(dim), 2 * std::size_t(dim)};
    }
};

double potential_energy(Potential p, std::span<const double> x);
double total_energy(Potential p, std::span<const double> state);
double angular_momentum2d(std::span<const double> state);

// Fixed-step RK4 on (x' = v, v' = -grad V). Truncates instead of emitting
// non-finite states; callers resample.
Trajectory integrate_trajectory(Potential p, std::span<const double> x0,
                                std::span<const double> v0, double dt,
                                std::size_t steps);

// Max of |E(t)-E(0)| / (1+|E(0)|) over stored states.
double energy_drift(const Trajectory& t);

Triplet make_potential_triplet(Potential p, double range, Rng& rng,
                               double separation = kNegativeSeparation);

// --- dataset-level entry points ----------------------------------------------

Triplet make_triplet(Experiment e, double range, Rng& rng);

// A point from the same distribution as triplet anchors (the data manifold).
std::vector<double> sample_anchor(Experiment e, double range, Rng& rng);

std::vector<std::vector<double>> sample_anchors(Experiment e, std::size_t count,
                                                double range, std::uint64_t seed);

// Triplets are generated from per-index derived RNG streams, so the result is
// identical for any thread count.
TripletDataset gen_dataset(Experiment e, std::size_t count, double range,
                           std::uint64_t seed, int threads = 1);

}  // namespace symgrad::datagen
