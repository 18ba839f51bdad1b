#include "keyterrain/linalg.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "keyterrain/errors.hpp"

namespace keyterrain {

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * x[c];
        y[r] = acc;
    }
    return y;
}

std::vector<double> solve_dense(DenseMatrix a, std::vector<double> b, double singular_tol) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw SolverError("solve_dense: dimension mismatch");

    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        for (double v : a.row(r)) scale = std::max(scale, std::abs(v));
    }
    if (scale == 0.0) throw SolverError("solve_dense: zero matrix");

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(a(r, k)) > std::abs(a(pivot, k))) pivot = r;
        }
        if (std::abs(a(pivot, k)) <= singular_tol * scale) {
            throw SolverError("solve_dense: singular matrix at column " + std::to_string(k));
        }
        if (pivot != k) {
            auto rk = a.row(k);
            auto rp = a.row(pivot);
            std::swap_ranges(rk.begin(), rk.end(), rp.begin());
            std::swap(b[k], b[pivot]);
        }
        const double inv = 1.0 / a(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a(r, k) * inv;
            if (f == 0.0) continue;
            auto rr = a.row(r);
            auto rk = a.row(k);
            for (std::size_t c = k; c < n; ++c) rr[c] -= f * rk[c];
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double acc = b[k];
        for (std::size_t c = k + 1; c < n; ++c) acc -= a(k, c) * x[c];
        x[k] = acc / a(k, k);
    }
    return x;
}

}  // namespace keyterrain
