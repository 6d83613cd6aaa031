#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace symgrad {

// One contrastive training example: anchor/positive share the targeted
// invariant, the negative differs in it by construction.
struct Triplet {
    std::vector<double> anchor;
    std::vector<double> positive;
    std::vector<double> negative;
};

struct TripletHeader {
    std::string experiment;
    int d = 0;
    std::uint64_t seed = 0;
    double range = 0.0;
    std::string mode;
    std::uint64_t count = 0;
};

struct TripletDataset {
    TripletHeader header;
    std::vector<Triplet> triplets;
};

void save_triplets(const std::string& path, const TripletDataset& ds);
TripletDataset load_triplets(const std::string& path);

enum class Split : std::uint8_t { search, validation };

// Deterministic 80/20 assignment by sample index.
Split split_for_index(std::uint64_t index);

struct GradientSample {
    std::vector<double> x;  // input point
    std::vector<double> g;  // unit-normalized gradient at x (zero iff raw was zero)
    Split split = Split::search;
};

struct GradientHeader {
    std::string experiment;
    int d = 0;
    double epsilon = 0.0;
    std::string model_hash;  // hash of the producing model file; "oracle" for analytic data
    std::string input_hash;  // hash of the file the evaluation points came from
    std::uint64_t dropped = 0;
    bool drop_warning = false;
};

struct GradientDataset {
    GradientHeader header;
    std::vector<GradientSample> samples;

    std::size_t count(Split s) const;
};

// Flattened per-split storage for tight fitness loops.
struct GradientView {
    int d = 0;
    std::size_t count = 0;
    std::vector<double> x;  // count*d, row-major
    std::vector<double> g;  // count*d, row-major
};

GradientView make_view(const GradientDataset& ds, Split split);

void save_gradients(const std::string& path, const GradientDataset& ds);
GradientDataset load_gradients(const std::string& path);

}  // namespace symgrad
