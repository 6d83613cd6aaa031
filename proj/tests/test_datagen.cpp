#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "symgrad/datagen.hpp"
#include "symgrad/io.hpp"

using namespace symgrad;
using namespace symgrad::datagen;

namespace {

double trace_of(std::span<const double> flat, int n) {
    double t = 0;
    for (int i = 0; i < n; ++i) t += flat[std::size_t(i) * n + i];
    return t;
}

double det2(std::span<const double> flat) {
    return flat[0] * flat[3] - flat[1] * flat[2];
}

// independent I2 oracle: evaluate (tr(A)^2 - tr(A^2)) / 2 by explicit loops
double i2_direct(std::span<const double> flat, int n) {
    double tr = 0, tr2 = 0;
    for (int i = 0; i < n; ++i) tr += flat[std::size_t(i) * n + i];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            tr2 += flat[std::size_t(i) * n + j] * flat[std::size_t(j) * n + i];
    return 0.5 * (tr * tr - tr2);
}

SquareMatrix from_flat(std::span<const double> flat, int n) {
    SquareMatrix m(n);
    m.entries.assign(flat.begin(), flat.end());
    return m;
}

}  // namespace

TEST_CASE("random_matrix: degenerate range gives the zero matrix") {
    Rng rng = make_rng(1);
    const SquareMatrix m = random_matrix(2, 0.0, rng);
    for (double e : m.entries) CHECK(e == 0.0);
}

TEST_CASE("random_matrix: identical seeds give identical matrices") {
    Rng a = make_rng(77), b = make_rng(77);
    const SquareMatrix ma = random_matrix(2, 1.0, a);
    const SquareMatrix mb = random_matrix(2, 1.0, b);
    CHECK(ma.entries == mb.entries);
}

TEST_CASE("random_matrix: uniform sampler range and mean") {
    Rng rng = make_rng(5);
    double sum = 0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const SquareMatrix m = random_matrix(3, 2.0, rng);
        for (double e : m.entries) {
            CHECK(std::fabs(e) <= 2.0);
            sum += e;
        }
    }
    // 9e5 samples of U[-2,2]: sigma_mean = (4/sqrt(12))/sqrt(9e5)
    const double sigma_mean = (4.0 / std::sqrt(12.0)) / std::sqrt(9.0 * draws);
    CHECK(std::fabs(sum / (9.0 * draws)) <= 3.0 * sigma_mean);
}

TEST_CASE("random_invertible: determinant floor holds") {
    Rng rng = make_rng(11);
    for (int i = 0; i < 200; ++i) {
        const SquareMatrix m = random_invertible(3, 1.0, rng);
        CHECK(std::fabs(det(m)) >= 1e-3);
    }
    const SquareMatrix one = random_invertible(1, 1.0, rng);
    CHECK(std::fabs(one.entries[0]) >= 1e-3);
    // a zero sampling range can never clear the determinant floor
    CHECK_THROWS_AS(random_invertible(2, 0.0, rng), GenerationError);
}

TEST_CASE("random_invertible: condition numbers stay finite over 1e4 samples") {
    Rng rng = make_rng(12);
    for (int i = 0; i < 10000; ++i) {
        const SquareMatrix m = random_invertible(3, 1.0, rng);
        const SquareMatrix inv = inverse(m);
        double norm_m = 0, norm_inv = 0;  // max-row norms
        for (int r = 0; r < 3; ++r) {
            double sm = 0, si = 0;
            for (int c = 0; c < 3; ++c) {
                sm += std::fabs(m.at(r, c));
                si += std::fabs(inv.at(r, c));
            }
            norm_m = std::max(norm_m, sm);
            norm_inv = std::max(norm_inv, si);
        }
        CHECK(std::isfinite(norm_m * norm_inv));
    }
}

TEST_CASE("similarity_conjugate: identity M returns A") {
    Rng rng = make_rng(3);
    const SquareMatrix a = random_matrix(3, 1.0, rng);
    const SquareMatrix p = similarity_conjugate(a, SquareMatrix::identity(3));
    for (std::size_t i = 0; i < a.entries.size(); ++i)
        CHECK(p.entries[i] == doctest::Approx(a.entries[i]).epsilon(1e-12));
}

TEST_CASE("similarity_conjugate: trace and determinant preserved") {
    Rng rng = make_rng(4);
    for (int i = 0; i < 500; ++i) {
        const SquareMatrix a = random_matrix(3, 1.0, rng);
        const SquareMatrix m = random_invertible(3, 1.0, rng);
        const SquareMatrix p = similarity_conjugate(a, m);
        CHECK(std::fabs(p.trace() - a.trace()) <= 1e-8 * (1.0 + std::fabs(a.trace())));
    }
    for (int i = 0; i < 500; ++i) {
        const SquareMatrix a = random_matrix(2, 1.0, rng);
        const SquareMatrix m = random_invertible(2, 1.0, rng);
        const SquareMatrix p = similarity_conjugate(a, m);
        // direct 2x2 determinant as the independent check
        const double da = det2(a.entries);
        const double dp = det2(p.entries);
        CHECK(std::fabs(dp - da) <= 1e-8 * (1.0 + std::fabs(da)));
    }
}

TEST_CASE("similarity_conjugate: singular M is rejected") {
    const SquareMatrix a = SquareMatrix::identity(2);
    SquareMatrix m(2);  // zero matrix
    CHECK_THROWS(similarity_conjugate(a, m));
}

TEST_CASE("make_similarity_triplet: free mode shares the trace") {
    Rng rng = make_rng(21);
    for (int i = 0; i < 100; ++i) {
        const Triplet t = make_similarity_triplet(2, MatrixMode::free_sampling, 1.0, rng);
        const double ta = trace_of(t.anchor, 2);
        CHECK(std::fabs(trace_of(t.positive, 2) - ta) <= 1e-8 * (1.0 + std::fabs(ta)));
        CHECK(std::fabs(trace_of(t.negative, 2) - ta) > 1e-3);
    }
}

TEST_CASE("make_similarity_triplet: fixed trace pins all members to zero") {
    Rng rng = make_rng(22);
    for (int i = 0; i < 100; ++i) {
        const Triplet t = make_similarity_triplet(2, MatrixMode::fixed_trace, 1.0, rng);
        CHECK(std::fabs(trace_of(t.anchor, 2)) <= 1e-8);
        CHECK(std::fabs(trace_of(t.positive, 2)) <= 1e-8);
        CHECK(std::fabs(trace_of(t.negative, 2)) <= 1e-8);
        CHECK(std::fabs(det2(t.negative) - det2(t.anchor)) > 1e-3);
    }
}

TEST_CASE("make_similarity_triplet: antisymmetric mode") {
    Rng rng = make_rng(23);
    for (int i = 0; i < 100; ++i) {
        const Triplet t =
            make_similarity_triplet(3, MatrixMode::antisymmetric, 1.0, rng);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(t.anchor[std::size_t(r) * 3 + c] ==
                      doctest::Approx(-t.anchor[std::size_t(c) * 3 + r]));
        const double ia = i2_direct(t.anchor, 3);
        CHECK(std::fabs(i2_direct(t.positive, 3) - ia) <= 1e-8 * (1.0 + std::fabs(ia)));
        CHECK(std::fabs(i2_direct(t.negative, 3) - ia) > 1e-3);
    }
}

TEST_CASE("lorentz_boost: zero velocity is the identity") {
    const SquareMatrix l = lorentz_boost({0, 0, 0});
    const SquareMatrix id = SquareMatrix::identity(4);
    for (std::size_t i = 0; i < 16; ++i) CHECK(l.entries[i] == id.entries[i]);
}

TEST_CASE("lorentz_boost: beta 0.6 maps (1,0,0,0) to (1.25,-0.75,0,0)") {
    const SquareMatrix l = lorentz_boost({0.6, 0, 0});
    const double ev[4] = {1, 0, 0, 0};
    double out[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out[i] += l.at(i, j) * ev[j];
    CHECK(out[0] == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(out[1] == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(out[2] == doctest::Approx(0.0));
    CHECK(out[3] == doctest::Approx(0.0));
    // interval oracle: 1.25^2 - 0.75^2 = 1
    CHECK(out[0] * out[0] - out[1] * out[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lorentz_boost: group defect below 1e-12, superluminal rejected") {
    Rng rng = make_rng(31);
    for (int i = 0; i < 200; ++i) {
        const double b = uniform(rng, 0, 0.95);
        const SquareMatrix l = lorentz_boost({b, 0.1 * (1 - b), -0.2 * (1 - b)});
        CHECK(lorentz_defect(l) <= 1e-12);
    }
    CHECK_THROWS(lorentz_boost({1.0, 0, 0}));
}

TEST_CASE("random_spatial_rotation: proper rotation in the spatial block") {
    Rng rng = make_rng(32);
    for (int i = 0; i < 200; ++i) {
        const SquareMatrix r = random_spatial_rotation(rng);
        SquareMatrix block(3);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) block.at(a, b) = r.at(a + 1, b + 1);
        CHECK(std::fabs(det(block) - 1.0) <= 1e-12);
        CHECK(r.at(0, 0) == 1.0);
    }
}

TEST_CASE("random_lorentz: group membership and interval preservation") {
    Rng rng = make_rng(33);
    for (int i = 0; i < 200; ++i) {
        const SquareMatrix l = random_lorentz(rng);
        CHECK(lorentz_defect(l) <= 1e-11);
        double ev[4], out[4] = {0, 0, 0, 0};
        for (double& c : ev) c = uniform(rng, -2, 2);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) out[r] += l.at(r, c) * ev[c];
        const double s_in = ev[0] * ev[0] - ev[1] * ev[1] - ev[2] * ev[2] - ev[3] * ev[3];
        const double s_out =
            out[0] * out[0] - out[1] * out[1] - out[2] * out[2] - out[3] * out[3];
        CHECK(std::fabs(s_out - s_in) <= 1e-9 * (1.0 + std::fabs(s_in)));
    }
}

TEST_CASE("field tensor: component conventions and invariant transport") {
    // identity transformation keeps the six entries
    const SquareMatrix f = field_tensor({1, 0, 0}, {1, 0, 0});
    const auto six = upper_entries(f);
    const std::vector<double> anchor(six.begin(), six.end());
    CHECK(ground_truth_value(Experiment::exp6, anchor) == doctest::Approx(1.0));
    const SquareMatrix id = SquareMatrix::identity(4);
    const auto same = upper_entries(matmul(id, matmul(f, transpose(id))));
    for (int i = 0; i < 6; ++i) CHECK(six[std::size_t(i)] == same[std::size_t(i)]);

    Rng rng = make_rng(34);
    for (int i = 0; i < 100; ++i) {
        const SquareMatrix lam = random_lorentz(rng);
        const auto moved = upper_entries(matmul(lam, matmul(f, transpose(lam))));
        const std::vector<double> pos(moved.begin(), moved.end());
        CHECK(ground_truth_value(Experiment::exp6, pos) ==
              doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("make_field_tensor_triplet: soundness") {
    Rng rng = make_rng(35);
    for (int i = 0; i < 100; ++i) {
        const Triplet t = make_field_tensor_triplet(1.0, rng);
        const double ia = ground_truth_value(Experiment::exp6, t.anchor);
        const double ip = ground_truth_value(Experiment::exp6, t.positive);
        const double in = ground_truth_value(Experiment::exp6, t.negative);
        CHECK(std::fabs(ip - ia) <= 1e-8 * (1.0 + std::fabs(ia)));
        CHECK(std::fabs(in - ia) > 1e-3);
    }
}

TEST_CASE("integrate_trajectory: harmonic solution matches cos(t)") {
    const double x0[1] = {1.0}, v0[1] = {0.0};
    const Trajectory t = integrate_trajectory(Potential::harmonic, x0, v0, 1e-3, 1000);
    REQUIRE(t.state_count() == 1001);
    CHECK(!t.truncated);
    CHECK(t.state(1000)[0] == doctest::Approx(std::cos(1.0)).epsilon(1e-5));
    CHECK(energy_drift(t) <= 1e-6);
}

TEST_CASE("integrate_trajectory: energy conserved across all potentials") {
    Rng rng = make_rng(41);
    for (const Potential p : {Potential::harmonic, Potential::pendulum,
                              Potential::anharmonic, Potential::exponential}) {
        for (int i = 0; i < 3; ++i) {
            const double x0[1] = {uniform(rng, -2, 2)};
            const double v0[1] = {uniform(rng, -2, 2)};
            const Trajectory t = integrate_trajectory(p, x0, v0, 1e-3, 10000);
            REQUIRE(!t.truncated);
            CHECK(energy_drift(t) <= 1e-6);
        }
    }
}

TEST_CASE("integrate_trajectory: central potential conserves angular momentum") {
    const double x0[2] = {1.5, 0.0};
    const double v0[2] = {0.0, 1.2};
    const Trajectory t = integrate_trajectory(Potential::central, x0, v0, 1e-3, 10000);
    REQUIRE(!t.truncated);
    const double l0 = angular_momentum2d(t.state(0));
    for (std::size_t i = 0; i < t.state_count(); i += 100) {
        CHECK(std::fabs(angular_momentum2d(t.state(i)) - l0) <=
              1e-6 * (1.0 + std::fabs(l0)));
    }
    CHECK(energy_drift(t) <= 1e-6);
}

TEST_CASE("integrate_trajectory: plunging central orbit truncates") {
    const double x0[2] = {0.3, 0.0};
    const double v0[2] = {-1.0, 0.0};  // radial infall, zero angular momentum
    const Trajectory t = integrate_trajectory(Potential::central, x0, v0, 1e-3, 10000);
    CHECK(t.truncated);
    CHECK_THROWS(integrate_trajectory(Potential::harmonic, x0, v0, 0.0, 10));
}

TEST_CASE("make_potential_triplet: soundness for 1D energies and exp11") {
    Rng rng = make_rng(42);
    for (int i = 0; i < 10; ++i) {
        const Triplet t = make_potential_triplet(Potential::harmonic, 2.0, rng);
        const double ea = total_energy(Potential::harmonic, t.anchor);
        const double ep = total_energy(Potential::harmonic, t.positive);
        const double en = total_energy(Potential::harmonic, t.negative);
        CHECK(std::fabs(ep - ea) <= 1e-6 * (1.0 + std::fabs(ea)));
        CHECK(std::fabs(en - ea) > 1e-3);
    }
    for (int i = 0; i < 10; ++i) {
        const Triplet t = make_potential_triplet(Potential::central, 2.0, rng);
        const double la = angular_momentum2d(t.anchor);
        const double lp = angular_momentum2d(t.positive);
        const double ln = angular_momentum2d(t.negative);
        CHECK(std::fabs(lp - la) <= 1e-6 * (1.0 + std::fabs(la)));
        CHECK(std::fabs(ln - la) > 1e-3);
    }
}

TEST_CASE("make_spacetime_triplet: interval invariance") {
    Rng rng = make_rng(43);
    for (int i = 0; i < 100; ++i) {
        const Triplet t = make_spacetime_triplet(2.0, rng);
        const double sa = ground_truth_value(Experiment::exp12, t.anchor);
        const double sp = ground_truth_value(Experiment::exp12, t.positive);
        const double sn = ground_truth_value(Experiment::exp12, t.negative);
        CHECK(std::fabs(sp - sa) <= 1e-9 * (1.0 + std::fabs(sa)));
        CHECK(std::fabs(sn - sa) > 1e-3);
    }
    const std::vector<double> unit_time = {1, 0, 0, 0};
    CHECK(ground_truth_value(Experiment::exp12, unit_time) == doctest::Approx(1.0));
}

TEST_CASE("ground_truth_value: table expressions") {
    const std::vector<double> m2 = {1, 2, 3, 4};
    CHECK(ground_truth_value(Experiment::exp1, m2) == doctest::Approx(5.0));
    CHECK(ground_truth_value(Experiment::exp2, m2) == doctest::Approx(-2.0));
    const std::vector<double> e7 = {1, 0};
    CHECK(ground_truth_value(Experiment::exp7, e7) == doctest::Approx(0.5));
    // antisymmetric with A12=1, A23=2, A13=3
    const std::vector<double> anti = {0, 1, 3, -1, 0, 2, -3, -2, 0};
    CHECK(ground_truth_value(Experiment::exp4, anti) == doctest::Approx(14.0));
    CHECK_THROWS(ground_truth_value(Experiment::exp1, e7));
}

TEST_CASE("ground_truth_gradient: pinned values and finite differences") {
    const std::vector<double> x1 = {0.3, -0.7, 1.1, 0.2};
    const auto g1 = ground_truth_gradient(Experiment::exp1, x1);
    CHECK(g1 == std::vector<double>{1, 0, 0, 1});
    const std::vector<double> x7 = {1, 2};
    const auto g7 = ground_truth_gradient(Experiment::exp7, x7);
    CHECK(g7[0] == doctest::Approx(1.0));
    CHECK(g7[1] == doctest::Approx(2.0));
    const std::vector<double> x12 = {1, 1, 1, 1};
    const auto g12 = ground_truth_gradient(Experiment::exp12, x12);
    CHECK(g12 == std::vector<double>{2, -2, -2, -2});

    // central differences of ground_truth_value as the oracle
    Rng rng = make_rng(44);
    for (const Experiment e : all_experiments()) {
        const int d = experiment_info(e).d;
        for (int probe = 0; probe < 20; ++probe) {
            std::vector<double> x(static_cast<std::size_t>(d));
            for (double& c : x) c = uniform(rng, 0.4, 1.6);  // keep exp11 away from r=0
            const auto grad = ground_truth_gradient(e, x);
            for (int k = 0; k < d; ++k) {
                const double h = 1e-6 * (1.0 + std::fabs(x[std::size_t(k)]));
                std::vector<double> xp = x, xm = x;
                xp[std::size_t(k)] += h;
                xm[std::size_t(k)] -= h;
                const double fd = (ground_truth_value(e, xp) - ground_truth_value(e, xm)) /
                                  (2 * h);
                CHECK(grad[std::size_t(k)] ==
                      doctest::Approx(fd).epsilon(1e-7).scale(1.0 + std::fabs(fd)));
            }
        }
    }
}

TEST_CASE("sample_anchor: exp4 anchors are antisymmetric") {
    Rng rng = make_rng(45);
    for (int i = 0; i < 50; ++i) {
        const auto x = sample_anchor(Experiment::exp4, 1.0, rng);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                CHECK(x[std::size_t(r) * 3 + c] == -x[std::size_t(c) * 3 + r]);
    }
}

TEST_CASE("gen_dataset: deterministic bytes, thread-count independent") {
    namespace fs = std::filesystem;
    fs::create_directories("tmp_datagen");
    const TripletDataset a = gen_dataset(Experiment::exp1, 200, 1.0, 99, 1);
    const TripletDataset b = gen_dataset(Experiment::exp1, 200, 1.0, 99, 2);
    save_triplets("tmp_datagen/a.jsonl", a);
    save_triplets("tmp_datagen/b.jsonl", b);
    CHECK(read_text_file("tmp_datagen/a.jsonl") == read_text_file("tmp_datagen/b.jsonl"));
    CHECK(hash_file("tmp_datagen/a.jsonl") == hash_file("tmp_datagen/b.jsonl"));

    const TripletDataset reread = load_triplets("tmp_datagen/a.jsonl");
    REQUIRE(reread.triplets.size() == a.triplets.size());
    CHECK(reread.header.experiment == "exp1");
    CHECK(reread.header.d == 4);
    for (std::size_t i = 0; i < a.triplets.size(); ++i)
        CHECK(reread.triplets[i].anchor == a.triplets[i].anchor);
}

TEST_CASE("gen_dataset: triplet soundness across every experiment") {
    for (const Experiment e : all_experiments()) {
        const ExperimentInfo& info = experiment_info(e);
        const auto invariants = known_invariants(e);
        const auto& targeted = invariants.front();
        const TripletDataset ds = gen_dataset(e, 8, info.default_range, 7, 1);
        const double tol = info.kind == ExperimentKind::trajectory ? 1e-6 : 1e-8;
        for (const Triplet& t : ds.triplets) {
            const double ia = targeted.value(t.anchor);
            const double ip = targeted.value(t.positive);
            const double in = targeted.value(t.negative);
            CHECK(std::fabs(ip - ia) <= tol * (1.0 + std::fabs(ia)));
            CHECK(std::fabs(in - ia) > 1e-3);
        }
    }
}
