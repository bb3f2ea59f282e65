#pragma once

#include <Eigen/Dense>

#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "laplacian.hpp"

namespace pwgl {

/// Dense direct solve of the constrained problems for small graphs.
///
/// The Hessian is built term by term from the objective as written (ordered
/// pairs, one-sided gamma for pw) into a dense matrix and the pinned block is
/// eliminated before an LDLT factorization. It shares no assembly code with the
/// sparse path, so it serves as the reference for the CG solves.
inline std::vector<double> dense_reference_solve(Method method, const SparseGraph& g, const PointCloud& cloud,
                                                 const EnergyWeights* ew = nullptr, double wnll_mu = 0.0) {
    const std::size_t n = g.n;
    if (n > 2000) throw ConfigError("dense reference solve is limited to 2000 nodes");
    if (method == Method::pw && (!ew || ew->node_gamma.size() != n))
        throw ConfigError("dense pw solve needs energy weights");
    const auto labeled = cloud.labeled_mask();
    std::vector<double> gval(n, 0.0);
    for (std::size_t k = 0; k < cloud.label_count(); ++k) gval[cloud.label_indices()[k]] = cloud.label_values()[k];
    const double mu = wnll_mu > 0.0 ? wnll_mu : (method == Method::wnll ? default_wnll_mu(cloud) : 0.0);

    // objective = sum of c (u_a - u_b)^2 and c (gx - u_b)^2 terms; H is half its Hessian
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    auto pair_term = [&](std::size_t a, std::size_t b, double c) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        H(ia, ia) += c;
        H(ib, ib) += c;
        H(ia, ib) -= c;
        H(ib, ia) -= c;
    };
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            const double w = g.weight(x, y);
            if (w == 0.0) continue;
            switch (method) {
            case Method::pw:
                if (std::isinf(ew->node_gamma[x])) throw ConfigError("dense reference solve needs finite gamma");
                pair_term(x, y, ew->node_gamma[x] * w);
                break;
            case Method::standard: pair_term(x, y, w); break;
            case Method::wnll:
                if (labeled[x]) {
                    // mu w (g_x - u_y)^2: quadratic in u_y only
                    H(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) += mu * w;
                    lin(static_cast<Eigen::Index>(y)) += mu * w * gval[x];
                } else {
                    pair_term(x, y, w);
                }
                break;
            }
        }
    }

    std::vector<Eigen::Index> free_nodes;
    for (std::size_t i = 0; i < n; ++i)
        if (!labeled[i]) free_nodes.push_back(static_cast<Eigen::Index>(i));
    const auto m = static_cast<Eigen::Index>(free_nodes.size());
    Eigen::MatrixXd A(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        b(r) = lin(free_nodes[static_cast<std::size_t>(r)]);
        for (std::size_t k = 0; k < n; ++k)
            if (labeled[k]) b(r) -= H(free_nodes[static_cast<std::size_t>(r)], static_cast<Eigen::Index>(k)) * gval[k];
        for (Eigen::Index c = 0; c < m; ++c)
            A(r, c) = H(free_nodes[static_cast<std::size_t>(r)], free_nodes[static_cast<std::size_t>(c)]);
    }
    const Eigen::VectorXd x = A.ldlt().solve(b);
    std::vector<double> u = gval;
    for (Eigen::Index r = 0; r < m; ++r) u[static_cast<std::size_t>(free_nodes[static_cast<std::size_t>(r)])] = x(r);
    return u;
}

} // namespace pwgl
