#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "symgrad/gradfield.hpp"
#include "symgrad/io.hpp"
#include "symgrad/linalg.hpp"
#include "symgrad/rng.hpp"

using namespace symgrad;
using namespace symgrad::gradfield;

namespace {

std::vector<std::vector<double>> random_inputs(int d, std::size_t n, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    std::vector<std::vector<double>> xs(n, std::vector<double>(std::size_t(d)));
    for (auto& x : xs)
        for (double& c : x) c = uniform(rng, -2, 2);
    return xs;
}

}  // namespace

TEST_CASE("normalize: zero vector, unit direction, epsilon effect") {
    const std::vector<double> zero = {0.0, 0.0};
    CHECK(normalize(zero, 1e-12) == zero);

    const std::vector<double> v = {3.0, 4.0};
    const auto tiny_eps = normalize(v, 1e-300);
    CHECK(tiny_eps[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(tiny_eps[1] == doctest::Approx(0.8).epsilon(1e-14));

    const auto g = normalize(v, 1e-8);
    CHECK(std::fabs(norm(g) - 1.0) <= 1e-8);

    CHECK_THROWS(normalize(v, 0.0));
}

TEST_CASE("extract_gradients: affine model maps every point to the same direction") {
    net::LatentModel m;
    m.layer_dims = {3, 1};
    m.weights = {{1.0, -2.0, 2.0}};
    m.biases = {{0.5}};
    const auto xs = random_inputs(3, 50, 3);
    const GradientDataset ds = extract_gradients(m, xs, 1e-12);
    REQUIRE(ds.samples.size() == 50);
    CHECK(ds.header.dropped == 0);
    const std::vector<double> w = {1.0, -2.0, 2.0};
    const auto expected = normalize(w, 1e-12);
    for (const auto& s : ds.samples)
        for (int k = 0; k < 3; ++k)
            CHECK(s.g[std::size_t(k)] == doctest::Approx(expected[std::size_t(k)]));
}

TEST_CASE("extract_gradients: non-finite gradients are dropped and counted") {
    net::LatentModel m;
    m.layer_dims = {2, 1};
    m.weights = {{std::numeric_limits<double>::infinity(), 0.0}};
    m.biases = {{0.0}};
    const auto xs = random_inputs(2, 40, 4);
    const GradientDataset ds = extract_gradients(m, xs, 1e-12);
    CHECK(ds.samples.empty());
    CHECK(ds.header.dropped == 40);
    CHECK(ds.header.drop_warning);
}

TEST_CASE("extract_gradients: stored norms honor the unit-or-zero invariant") {
    const net::LatentModel m = net::init_model({4, 24, 1}, net::Activation::tanh, 8);
    const auto xs = random_inputs(4, 400, 5);
    const GradientDataset ds = extract_gradients(m, xs, 1e-12);
    CHECK(ds.samples.size() + ds.header.dropped == xs.size());
    for (const auto& s : ds.samples) {
        const double n = norm(s.g);
        CHECK((n == 0.0 || (n >= 1.0 - 1e-6 && n <= 1.0 + 1e-6)));
    }
}

TEST_CASE("split: deterministic and close to 80/20") {
    std::size_t val = 0;
    const std::size_t n = 10000;
    for (std::size_t i = 0; i < n; ++i) {
        const Split s = split_for_index(i);
        CHECK(s == split_for_index(i));  // stable
        val += s == Split::validation;
    }
    CHECK(double(val) / double(n) == doctest::Approx(0.2).epsilon(0.15));
}

TEST_CASE("reparameterization invariance of the extracted field") {
    // phi' scaling of the raw gradient cannot change its normalized direction
    const net::LatentModel m = net::init_model({3, 32, 32, 1}, net::Activation::tanh, 21);
    Rng rng = make_rng(22);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x = {uniform(rng, -2, 2), uniform(rng, -2, 2),
                                 uniform(rng, -2, 2)};
        const double f = net::forward(m, x)[0];
        const auto raw = net::input_gradient(m, x, 0);
        const auto base = normalize(raw, 1e-12);

        for (const double scale : {3.0 * f * f + 1.0,                      // u^3 + u
                                   2.0 * (1.0 - std::pow(std::tanh(f), 2)) + 3.0}) {
            std::vector<double> scaled(raw.size());
            for (std::size_t k = 0; k < raw.size(); ++k) scaled[k] = scale * raw[k];
            const auto warped = normalize(scaled, 1e-12);
            for (std::size_t k = 0; k < raw.size(); ++k)
                CHECK(std::fabs(warped[k] - base[k]) <= 1e-6);
        }

        // phi(u) = -u flips every component exactly
        std::vector<double> negated(raw.size());
        for (std::size_t k = 0; k < raw.size(); ++k) negated[k] = -raw[k];
        const auto flipped = normalize(negated, 1e-12);
        for (std::size_t k = 0; k < raw.size(); ++k) CHECK(flipped[k] == -base[k]);
    }
}

TEST_CASE("oracle_gradient_dataset: exp4 evaluation points are antisymmetric anchors") {
    const GradientDataset ds = oracle_gradient_dataset(Experiment::exp4, 200, 1.0, 31);
    REQUIRE(!ds.samples.empty());
    CHECK(ds.header.model_hash == "oracle");
    CHECK(ds.header.d == 9);
    for (const auto& s : ds.samples) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(s.x[std::size_t(r) * 3 + c] == -s.x[std::size_t(c) * 3 + r]);
        const double n = norm(s.g);
        CHECK((n == 0.0 || std::fabs(n - 1.0) <= 1e-6));
    }
}

TEST_CASE("gradient file round trip preserves bytes and content") {
    std::filesystem::create_directories("tmp_gradfield");
    GradientDataset ds = oracle_gradient_dataset(Experiment::exp7, 100, 2.0, 7);
    ds.header.input_hash = "cafe1234";
    save_gradients("tmp_gradfield/g.jsonl", ds);
    const GradientDataset back = load_gradients("tmp_gradfield/g.jsonl");
    REQUIRE(back.samples.size() == ds.samples.size());
    CHECK(back.header.epsilon == ds.header.epsilon);
    CHECK(back.header.model_hash == "oracle");
    CHECK(back.header.input_hash == "cafe1234");
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(back.samples[i].x == ds.samples[i].x);
        CHECK(back.samples[i].g == ds.samples[i].g);
        CHECK(back.samples[i].split == ds.samples[i].split);
    }
    save_gradients("tmp_gradfield/g2.jsonl", back);
    CHECK(read_text_file("tmp_gradfield/g.jsonl") == read_text_file("tmp_gradfield/g2.jsonl"));
}
