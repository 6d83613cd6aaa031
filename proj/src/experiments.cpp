#include "symgrad/experiments.hpp"

#include <cmath>
#include <stdexcept>

namespace symgrad {

Experiment parse_experiment(const std::string& id) {
    for (Experiment e : all_experiments())
        if (to_string(e) == id) return e;
    throw std::invalid_argument("unknown experiment id: " + id);
}

std::string to_string(Experiment e) {
    return "exp" + std::to_string(static_cast<int>(e) + 1);
}

std::vector<Experiment> all_experiments() {
    std::vector<Experiment> v;
    for (int i = 0; i < kExperimentCount; ++i) v.push_back(static_cast<Experiment>(i));
    return v;
}

Potential parse_potential(const std::string& name) {
    if (name == "harmonic") return Potential::harmonic;
    if (name == "pendulum") return Potential::pendulum;
    if (name == "anharmonic") return Potential::anharmonic;
    if (name == "exponential") return Potential::exponential;
    if (name == "central") return Potential::central;
    throw std::invalid_argument("unknown potential: " + name);
}

std::string to_string(Potential p) {
    switch (p) {
        case Potential::harmonic: return "harmonic";
        case Potential::pendulum: return "pendulum";
        case Potential::anharmonic: return "anharmonic";
        case Potential::exponential: return "exponential";
        case Potential::central: return "central";
    }
    return "?";
}

MatrixMode parse_matrix_mode(const std::string& name) {
    if (name == "free") return MatrixMode::free_sampling;
    if (name == "fixed_trace") return MatrixMode::fixed_trace;
    if (name == "antisymmetric") return MatrixMode::antisymmetric;
    throw std::invalid_argument("unknown matrix mode: " + name);
}

std::string to_string(MatrixMode m) {
    switch (m) {
        case MatrixMode::free_sampling: return "free";
        case MatrixMode::fixed_trace: return "fixed_trace";
        case MatrixMode::antisymmetric: return "antisymmetric";
    }
    return "?";
}

const ExperimentInfo& experiment_info(Experiment e) {
    static const std::vector<ExperimentInfo> table = {
        {Experiment::exp1, 4, ExperimentKind::matrix, "2x2 similarity", "trace", 1.0, 2,
         MatrixMode::free_sampling, Potential::harmonic, 0.25},
        {Experiment::exp2, 4, ExperimentKind::matrix, "2x2 similarity, fixed trace",
         "determinant", 1.0, 2, MatrixMode::fixed_trace, Potential::harmonic, 0.2},
        {Experiment::exp3, 9, ExperimentKind::matrix, "3x3 similarity", "trace", 1.0, 3,
         MatrixMode::free_sampling, Potential::harmonic, 0.3},
        {Experiment::exp4, 9, ExperimentKind::matrix, "3x3 antisymmetric similarity",
         "sum of principal minors", 1.0, 3, MatrixMode::antisymmetric, Potential::harmonic, 0.2},
        {Experiment::exp5, 16, ExperimentKind::matrix, "4x4 similarity", "trace", 1.0, 4,
         MatrixMode::free_sampling, Potential::harmonic, 0.35},
        {Experiment::exp6, 6, ExperimentKind::field_tensor, "field strength tensor",
         "E.B", 1.0, 0, MatrixMode::free_sampling, Potential::harmonic, 0.3},
        {Experiment::exp7, 2, ExperimentKind::trajectory, "harmonic potential", "energy",
         2.0, 0, MatrixMode::free_sampling, Potential::harmonic, 0.25},
        {Experiment::exp8, 2, ExperimentKind::trajectory, "pendulum potential", "energy",
         2.0, 0, MatrixMode::free_sampling, Potential::pendulum, 0.25},
        {Experiment::exp9, 2, ExperimentKind::trajectory, "anharmonic potential", "energy",
         3.0, 0, MatrixMode::free_sampling, Potential::anharmonic, 0.6},
        {Experiment::exp10, 2, ExperimentKind::trajectory, "exponential potential",
         "energy", 3.0, 0, MatrixMode::free_sampling, Potential::exponential, 1.0},
        {Experiment::exp11, 4, ExperimentKind::trajectory, "central potential",
         "angular momentum", 2.0, 0, MatrixMode::free_sampling, Potential::central, 0.3},
        {Experiment::exp12, 4, ExperimentKind::spacetime, "spacetime event", "interval",
         2.0, 0, MatrixMode::free_sampling, Potential::harmonic, 0.5},
    };
    return table[static_cast<std::size_t>(e)];
}

static void check_dim(Experiment e, std::span<const double> x) {
    const int d = experiment_info(e).d;
    if (int(x.size()) != d)
        throw std::invalid_argument("experiment " + to_string(e) + " expects dimension " +
                                    std::to_string(d) + ", got " + std::to_string(x.size()));
}

double ground_truth_value(Experiment e, std::span<const double> x) {
    check_dim(e, x);
    switch (e) {
        case Experiment::exp1:
            return x[0] + x[3];
        case Experiment::exp2:
            return x[0] * x[3] - x[1] * x[2];
        case Experiment::exp3:
            return x[0] + x[4] + x[8];
        case Experiment::exp4:
            // second principal invariant of a 3x3 matrix; reduces to
            // A12^2 + A23^2 + A13^2 on the antisymmetric anchors
            return x[0] * x[4] + x[4] * x[8] + x[0] * x[8] - x[1] * x[3] - x[5] * x[7] -
                   x[2] * x[6];
        case Experiment::exp5:
            return x[0] + x[5] + x[10] + x[15];
        case Experiment::exp6:
            // inputs are (F01,F02,F03,F12,F13,F23) = (E1,E2,E3,-B3,B2,-B1)
            return -x[0] * x[5] + x[1] * x[4] - x[2] * x[3];
        case Experiment::exp7:
            return 0.5 * x[1] * x[1] + 0.5 * x[0] * x[0];
        case Experiment::exp8:
            return 0.5 * x[1] * x[1] + std::sin(x[0]);
        case Experiment::exp9:
            return 0.5 * x[1] * x[1] + 0.5 * x[0] * x[0] + 0.25 * std::pow(x[0], 4);
        case Experiment::exp10:
            return 0.5 * x[1] * x[1] + 0.5 * x[0] * x[0] + std::exp(x[0] + 1.0);
        case Experiment::exp11:
            return x[0] * x[3] - x[1] * x[2];
        case Experiment::exp12:
            return x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3];
    }
    throw std::logic_error("unreachable");
}

std::vector<double> ground_truth_gradient(Experiment e, std::span<const double> x) {
    check_dim(e, x);
    switch (e) {
        case Experiment::exp1:
            return {1, 0, 0, 1};
        case Experiment::exp2:
            return {x[3], -x[2], -x[1], x[0]};
        case Experiment::exp3:
            return {1, 0, 0, 0, 1, 0, 0, 0, 1};
        case Experiment::exp4:
            return {x[4] + x[8], -x[3], -x[6], -x[1], x[0] + x[8], -x[7], -x[2], -x[5],
                    x[0] + x[4]};
        case Experiment::exp5: {
            std::vector<double> g(16, 0.0);
            g[0] = g[5] = g[10] = g[15] = 1.0;
            return g;
        }
        case Experiment::exp6:
            return {-x[5], x[4], -x[3], -x[2], x[1], -x[0]};
        case Experiment::exp7:
            return {x[0], x[1]};
        case Experiment::exp8:
            return {std::cos(x[0]), x[1]};
        case Experiment::exp9:
            return {x[0] + x[0] * x[0] * x[0], x[1]};
        case Experiment::exp10:
            return {x[0] + std::exp(x[0] + 1.0), x[1]};
        case Experiment::exp11:
            return {x[3], -x[2], -x[1], x[0]};
        case Experiment::exp12:
            return {2 * x[0], -2 * x[1], -2 * x[2], -2 * x[3]};
    }
    throw std::logic_error("unreachable");
}

std::string ground_truth_expression(Experiment e) {
    switch (e) {
        case Experiment::exp1:
            return "(add x0 x3)";
        case Experiment::exp2:
            return "(sub (mul x0 x3) (mul x1 x2))";
        case Experiment::exp3:
            return "(add x0 (add x4 x8))";
        case Experiment::exp4:
            return "(sub (add (mul x0 x4) (add (mul x4 x8) (mul x0 x8))) "
                   "(add (mul x1 x3) (add (mul x5 x7) (mul x2 x6))))";
        case Experiment::exp5:
            return "(add x0 (add x5 (add x10 x15)))";
        case Experiment::exp6:
            return "(sub (mul x1 x4) (add (mul x0 x5) (mul x2 x3)))";
        case Experiment::exp7:
            return "(add (mul 0.5 (square x1)) (mul 0.5 (square x0)))";
        case Experiment::exp8:
            return "(add (mul 0.5 (square x1)) (sin x0))";
        case Experiment::exp9:
            return "(add (mul 0.5 (square x1)) (add (mul 0.5 (square x0)) "
                   "(mul 0.25 (square (square x0)))))";
        case Experiment::exp10:
            return "(add (mul 0.5 (square x1)) (add (mul 0.5 (square x0)) "
                   "(exp (add x0 1))))";
        case Experiment::exp11:
            return "(sub (mul x0 x3) (mul x1 x2))";
        case Experiment::exp12:
            return "(sub (square x0) (add (square x1) (add (square x2) (square x3))))";
    }
    throw std::logic_error("unreachable");
}

std::vector<InvariantOracle> known_invariants(Experiment e) {
    auto oracle = [](Experiment id, std::string name, std::string expr) {
        InvariantOracle o;
        o.name = std::move(name);
        o.expression = std::move(expr);
        o.value = [id](std::span<const double> x) { return ground_truth_value(id, x); };
        o.gradient = [id](std::span<const double> x) { return ground_truth_gradient(id, x); };
        return o;
    };

    std::vector<InvariantOracle> out;
    out.push_back(oracle(e, experiment_info(e).invariant, ground_truth_expression(e)));

    if (e == Experiment::exp6) {
        // |B|^2 - |E|^2, the second Lorentz invariant of the field tensor
        InvariantOracle o;
        o.name = "B2-E2";
        o.expression =
            "(sub (add (square x3) (add (square x4) (square x5))) "
            "(add (square x0) (add (square x1) (square x2))))";
        o.value = [](std::span<const double> x) {
            return x[3] * x[3] + x[4] * x[4] + x[5] * x[5] - x[0] * x[0] - x[1] * x[1] -
                   x[2] * x[2];
        };
        o.gradient = [](std::span<const double> x) {
            return std::vector<double>{-2 * x[0], -2 * x[1], -2 * x[2],
                                       2 * x[3],  2 * x[4],  2 * x[5]};
        };
        out.push_back(std::move(o));
    }
    if (e == Experiment::exp11) {
        // energy of the central-potential system, also conserved along trajectories
        InvariantOracle o;
        o.name = "energy";
        o.expression =
            "(sub (mul 0.5 (add (square x2) (square x3))) "
            "(div 1 (add (square x0) (square x1))))";
        o.value = [](std::span<const double> x) {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            return 0.5 * (x[2] * x[2] + x[3] * x[3]) - 1.0 / r2;
        };
        o.gradient = [](std::span<const double> x) {
            const double r2 = x[0] * x[0] + x[1] * x[1];
            const double c = 2.0 / (r2 * r2);
            return std::vector<double>{c * x[0], c * x[1], x[2], x[3]};
        };
        out.push_back(std::move(o));
    }
    return out;
}

}  // namespace symgrad
