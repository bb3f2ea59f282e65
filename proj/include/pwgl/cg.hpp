#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "parallel.hpp"

namespace pwgl {

/// Square sparse matrix in CSR form (used for the reduced SPD systems).
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    /// y = A x; rows are independent so the result does not depend on threading.
    void apply(std::span<const double> x, std::span<double> y) const {
        parallel_for(n, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double s = 0.0;
                for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[col[p]];
                y[i] = s;
            }
        });
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
                if (col[p] == i) d[i] += val[p];
        return d;
    }
};

enum class Preconditioner { none, jacobi };

struct CgOptions {
    double tol = 1e-10;
    std::size_t max_iter = 0; // 0: 10 sqrt(n) + 1000
    Preconditioner preconditioner = Preconditioner::jacobi;
};

struct CgResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double residual = 0.0; // ||b - A x|| / ||b||
    std::vector<double> history; // relative residual after each iteration
};

inline std::size_t default_max_iter(std::size_t n) {
    return static_cast<std::size_t>(10.0 * std::sqrt(static_cast<double>(n))) + 1000;
}

namespace detail {
inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}
} // namespace detail

/// Preconditioned conjugate gradient for an SPD operator.
///
/// `Op` needs `n`, `apply(x, y)` and `diagonal()`. Convergence is declared on
/// the true residual: when the recursive residual drops below tolerance the
/// residual is recomputed from scratch and iteration resumes if it is not.
template <typename Op>
CgResult cg_solve(const Op& A, std::span<const double> b, const CgOptions& options = {},
                  std::span<const double> x0 = {}) {
    const std::size_t n = A.n;
    if (b.size() != n) throw DataError("cg_solve: right-hand side has wrong length");
    const std::size_t max_iter = options.max_iter ? options.max_iter : default_max_iter(n);

    CgResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) res.x.assign(x0.begin(), x0.end());

    const double bnorm = std::sqrt(detail::dot(b, b));
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }

    std::vector<double> inv_diag(n, 1.0);
    if (options.preconditioner == Preconditioner::jacobi) {
        const auto d = A.diagonal();
        for (std::size_t i = 0; i < n; ++i) {
            if (!(d[i] > 0.0)) throw SolverError("cg_solve: nonpositive diagonal, operator is not SPD", 1.0);
            inv_diag[i] = 1.0 / d[i];
        }
    }

    std::vector<double> r(n), z(n), p(n), q(n);
    auto true_residual = [&] {
        A.apply(res.x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        return std::sqrt(detail::dot(r, r)) / bnorm;
    };

    double rel = true_residual();
    res.history.push_back(rel);
    while (rel > options.tol && res.iterations < max_iter) {
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        p = z;
        double rz = detail::dot(r, z);
        while (res.iterations < max_iter) {
            A.apply(p, q);
            const double pq = detail::dot(p, q);
            if (!(pq > 0.0)) throw SolverError("cg_solve: operator is not positive definite", rel);
            const double step = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                res.x[i] += step * p[i];
                r[i] -= step * q[i];
            }
            ++res.iterations;
            rel = std::sqrt(detail::dot(r, r)) / bnorm;
            res.history.push_back(rel);
            if (rel <= options.tol) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
            const double rz_next = detail::dot(r, z);
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        rel = true_residual();
    }
    res.residual = rel;
    if (rel > options.tol) {
        std::ostringstream msg;
        msg << "conjugate gradient did not converge in " << max_iter << " iterations (relative residual " << rel
            << ", tolerance " << options.tol << ")";
        throw SolverError(msg.str(), rel, std::move(res.history));
    }
    return res;
}

} // namespace pwgl
