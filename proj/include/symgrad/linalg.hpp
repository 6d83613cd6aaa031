#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace symgrad {

// ---------------------------------------------------------------------------
// small vector helpers
// ---------------------------------------------------------------------------

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// small square matrices, row-major
// ---------------------------------------------------------------------------

struct SquareMatrix {
    int n = 0;
    std::vector<double> entries;  // n*n, row-major

    SquareMatrix() = default;
    explicit SquareMatrix(int side) : n(side), entries(std::size_t(side) * side, 0.0) {
        if (side < 1) throw std::invalid_argument("SquareMatrix: side must be >= 1");
    }

    double& at(int i, int j) { return entries[std::size_t(i) * n + j]; }
    double at(int i, int j) const { return entries[std::size_t(i) * n + j]; }

    static SquareMatrix identity(int side) {
        SquareMatrix m(side);
        for (int i = 0; i < side; ++i) m.at(i, i) = 1.0;
        return m;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n; ++i) t += at(i, i);
        return t;
    }
};

inline SquareMatrix matmul(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.n != b.n) throw std::invalid_argument("matmul: dimension mismatch");
    SquareMatrix c(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int k = 0; k < a.n; ++k) {
            const double aik = a.at(i, k);
            for (int j = 0; j < a.n; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

inline SquareMatrix transpose(const SquareMatrix& a) {
    SquareMatrix t(a.n);
    for (int i = 0; i < a.n; ++i)
        for (int j = 0; j < a.n; ++j) t.at(j, i) = a.at(i, j);
    return t;
}

// LU factorization with partial pivoting.
struct LuFactors {
    SquareMatrix lu;
    std::vector<int> piv;
    int sign = 1;
    bool singular = false;
};

inline LuFactors lu_factor(SquareMatrix a) {
    const int n = a.n;
    LuFactors f{std::move(a), std::vector<int>(n), 1, false};
    for (int i = 0; i < n; ++i) f.piv[i] = i;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::fabs(f.lu.at(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::fabs(f.lu.at(i, k));
            if (v > best) { best = v; p = i; }
        }
        if (best == 0.0) { f.singular = true; return f; }
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu.at(k, j), f.lu.at(p, j));
            std::swap(f.piv[k], f.piv[p]);
            f.sign = -f.sign;
        }
        const double inv = 1.0 / f.lu.at(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = f.lu.at(i, k) * inv;
            f.lu.at(i, k) = m;
            for (int j = k + 1; j < n; ++j) f.lu.at(i, j) -= m * f.lu.at(k, j);
        }
    }
    return f;
}

inline double lu_det(const LuFactors& f) {
    if (f.singular) return 0.0;
    double d = f.sign;
    for (int i = 0; i < f.lu.n; ++i) d *= f.lu.at(i, i);
    return d;
}

inline double det(const SquareMatrix& a) { return lu_det(lu_factor(a)); }

// Solve A x = b in place given the factorization of A.
inline void lu_solve_vec(const LuFactors& f, std::span<const double> b, std::span<double> x) {
    const int n = f.lu.n;
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = b[std::size_t(f.piv[i])];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) y[i] -= f.lu.at(i, j) * y[j];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) y[i] -= f.lu.at(i, j) * y[j];
        y[i] /= f.lu.at(i, i);
    }
    for (int i = 0; i < n; ++i) x[i] = y[i];
}

// Solve A X = B column by column.
inline SquareMatrix lu_solve_mat(const LuFactors& f, const SquareMatrix& b) {
    if (f.singular) throw std::runtime_error("lu_solve_mat: singular matrix");
    const int n = b.n;
    SquareMatrix x(n);
    std::vector<double> col(n), sol(n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) col[i] = b.at(i, j);
        lu_solve_vec(f, col, sol);
        for (int i = 0; i < n; ++i) x.at(i, j) = sol[i];
    }
    return x;
}

inline SquareMatrix inverse(const SquareMatrix& a) {
    return lu_solve_mat(lu_factor(a), SquareMatrix::identity(a.n));
}

}  // namespace symgrad
