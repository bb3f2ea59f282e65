#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cg.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "kernels.hpp"

namespace pwgl {

enum class Method { pw, standard, wnll };

inline std::string method_name(Method m) {
    switch (m) {
    case Method::pw: return "pw";
    case Method::standard: return "standard";
    case Method::wnll: return "wnll";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "pw") return Method::pw;
    if (s == "standard") return Method::standard;
    if (s == "wnll") return Method::wnll;
    throw ConfigError("unknown method '" + s + "' (expected pw, standard or wnll)");
}

/// Values on all nodes; labeled entries are pinned to the label values.
struct NodeFunction {
    std::vector<double> values;
    std::vector<char> pinned;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct SolveReport {
    Method method = Method::pw;
    std::size_t iterations = 0;
    double residual = 0.0;
    double energy = 0.0;
    double wall_time_ms = 0.0;
};

struct SolveResult {
    NodeFunction u;
    SolveReport report;
};

struct WnllParams {
    /// <= 0 selects the default ratio (#unlabeled) / (#labeled).
    double mu = 0.0;
};

struct SolveOptions {
    CgOptions cg;
    /// Refuse graphs with a label-free component (otherwise the system is singular).
    bool check_components = true;
};

namespace detail {

/// c * diff^2 with the convention inf * 0 = 0.
inline double weighted_square(double c, double diff) noexcept { return diff == 0.0 ? 0.0 : c * diff * diff; }

} // namespace detail

// ---------------------------------------------------------------------------
// Energies and the operator

/// scale * sum_{x,y} gamma(x) w_xy |u(x) - u(y)|^2, summed over ordered pairs
/// exactly as written (one-sided gamma).
inline double dirichlet_energy_one_sided(const SparseGraph& g, const EnergyWeights& ew, std::span<const double> u) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p)
            s += detail::weighted_square(ew.node_gamma[i] * g.val[p], u[i] - u[g.col[p]]);
    return ew.energy_scale * s;
}

/// The same energy through the symmetric weight (gamma(x) + gamma(y)) w_xy / 2,
/// each undirected edge visited once.
inline double dirichlet_energy(const SparseGraph& g, const EnergyWeights& ew, std::span<const double> u) {
    if (u.size() != g.n) throw DataError("dirichlet_energy: function length does not match graph");
    double s = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
            const std::size_t j = g.col[p];
            if (j <= i) continue;
            s += detail::weighted_square(ew.combined(i, j, g.val[p]), u[i] - u[j]);
        }
    return ew.energy_scale * 2.0 * s;
}

/// Standard-Laplacian energy sum_{x,y} w_xy |u(x) - u(y)|^2 (unscaled).
inline double standard_energy(const SparseGraph& g, std::span<const double> u) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
            const double d = u[i] - u[g.col[p]];
            s += g.val[p] * d * d;
        }
    return s;
}

inline double default_wnll_mu(const PointCloud& cloud) {
    const double labeled = static_cast<double>(cloud.label_count());
    if (labeled == 0.0) throw DataError("no labeled points");
    return (static_cast<double>(cloud.size()) - labeled) / labeled;
}

/// Weighted nonlocal Laplacian objective
/// sum_{x not in G} sum_y w (u_x - u_y)^2 + mu sum_{x in G} sum_y w (g_x - u_y)^2.
inline double wnll_objective(const SparseGraph& g, const PointCloud& cloud, std::span<const double> u, double mu) {
    const auto labeled = cloud.labeled_mask();
    std::vector<double> gval(g.n, 0.0);
    for (std::size_t k = 0; k < cloud.label_count(); ++k) gval[cloud.label_indices()[k]] = cloud.label_values()[k];
    double s = 0.0;
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
            const std::size_t j = g.col[p];
            if (labeled[i]) {
                const double d = gval[i] - u[j];
                s += mu * g.val[p] * d * d;
            } else {
                const double d = u[i] - u[j];
                s += g.val[p] * d * d;
            }
        }
    return s;
}

/// (Lu)(x) = operator_scale * sum_y (gamma(x) + gamma(y)) w_xy (u(y) - u(x)).
inline double apply_laplacian(const SparseGraph& g, const EnergyWeights& ew, std::span<const double> u, std::size_t x) {
    double s = 0.0;
    for (std::size_t p = g.row_ptr[x]; p < g.row_ptr[x + 1]; ++p) {
        const std::size_t y = g.col[p];
        const double diff = u[y] - u[x];
        if (diff != 0.0) s += (ew.node_gamma[x] + ew.node_gamma[y]) * g.val[p] * diff;
    }
    return ew.operator_scale * s;
}

/// Row scale of the operator at x: operator_scale * sum_y (gamma(x) + gamma(y)) w_xy.
inline double laplacian_row_scale(const SparseGraph& g, const EnergyWeights& ew, std::size_t x) {
    double s = 0.0;
    for (std::size_t p = g.row_ptr[x]; p < g.row_ptr[x + 1]; ++p)
        s += (ew.node_gamma[x] + ew.node_gamma[g.col[p]]) * g.val[p];
    return ew.operator_scale * s;
}

// ---------------------------------------------------------------------------
// Constrained solves

/// SPD system in the free (unpinned) unknowns after eliminating pinned values.
struct ReducedSystem {
    CsrMatrix A;
    std::vector<double> b;
    std::vector<NodeIndex> free_nodes;
};

/// Assembles sum_y c_xy (u_x - u_y) = 0 over free x, where c_xy = edge_weight(x, y, w_xy)
/// is symmetric. Pinned neighbors move to the right-hand side.
template <typename EdgeWeight>
ReducedSystem assemble_reduced(const SparseGraph& g, const std::vector<char>& pinned, std::span<const double> values,
                               EdgeWeight&& edge_weight) {
    ReducedSystem sys;
    std::vector<std::int64_t> position(g.n, -1);
    for (std::size_t i = 0; i < g.n; ++i)
        if (!pinned[i]) {
            position[i] = static_cast<std::int64_t>(sys.free_nodes.size());
            sys.free_nodes.push_back(static_cast<NodeIndex>(i));
        }
    const std::size_t m = sys.free_nodes.size();
    sys.A.n = m;
    sys.A.row_ptr.assign(m + 1, 0);
    sys.b.assign(m, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = sys.free_nodes[r];
        std::size_t c = 1; // diagonal
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p)
            if (!pinned[g.col[p]]) ++c;
        sys.A.row_ptr[r + 1] = sys.A.row_ptr[r] + c;
    }
    sys.A.col.resize(sys.A.row_ptr[m]);
    sys.A.val.resize(sys.A.row_ptr[m]);
    parallel_for(m, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            const std::size_t i = sys.free_nodes[r];
            std::size_t out = sys.A.row_ptr[r];
            double diag = 0.0, rhs = 0.0;
            bool diag_written = false;
            std::size_t diag_slot = 0;
            for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
                const std::size_t j = g.col[p];
                const double c = edge_weight(i, j, g.val[p]);
                diag += c;
                if (pinned[j]) {
                    rhs += c * values[j];
                    continue;
                }
                if (!diag_written && j > i) {
                    diag_slot = out++;
                    diag_written = true;
                }
                sys.A.col[out] = static_cast<std::uint32_t>(position[j]);
                sys.A.val[out] = -c;
                ++out;
            }
            if (!diag_written) diag_slot = out++;
            sys.A.col[diag_slot] = static_cast<std::uint32_t>(r);
            sys.A.val[diag_slot] = diag;
            sys.b[r] = rhs;
        }
    });
    return sys;
}

namespace detail {

inline void check_labels(const SparseGraph& g, const PointCloud& cloud, const SolveOptions& options) {
    if (g.n != cloud.size()) throw DataError("graph/cloud size mismatch");
    if (cloud.label_count() == 0) throw DataError("no labeled points");
    for (double v : cloud.label_values())
        if (!std::isfinite(v)) throw DataError("label values must be finite");
    if (!options.check_components) return;
    const auto bad = unlabeled_components(g, cloud.label_indices());
    if (!bad.empty()) {
        const auto comp = connected_components(g);
        std::ostringstream msg;
        msg << bad.size() << " connected component(s) contain no labeled node:";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 10); ++k) {
            const auto sz = std::count(comp.begin(), comp.end(), bad[k]);
            msg << " #" << bad[k] << " (" << sz << " nodes)";
        }
        if (bad.size() > 10) msg << " ...";
        msg << "; restrict to the labeled component (--largest-component)";
        throw DataError(msg.str());
    }
}

/// Pinned mask and values from the labels.
inline std::pair<std::vector<char>, std::vector<double>> label_constraints(const PointCloud& cloud) {
    std::vector<char> pinned(cloud.size(), 0);
    std::vector<double> values(cloud.size(), 0.0);
    for (std::size_t k = 0; k < cloud.label_count(); ++k) {
        pinned[cloud.label_indices()[k]] = 1;
        values[cloud.label_indices()[k]] = cloud.label_values()[k];
    }
    return {pinned, values};
}

/// All labels equal: the constant function is the exact minimizer.
inline bool constant_labels(const PointCloud& cloud) {
    const auto& v = cloud.label_values();
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

template <typename EdgeWeight>
SolveResult solve_constrained(const SparseGraph& g, std::vector<char> pinned, std::vector<double> values,
                              EdgeWeight&& edge_weight, Method method, const SolveOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult out;
    out.report.method = method;
    const ReducedSystem sys = assemble_reduced(g, pinned, values, edge_weight);
    if (sys.A.n > 0) {
        const CgResult cg = cg_solve(sys.A, sys.b, options.cg);
        for (std::size_t r = 0; r < sys.free_nodes.size(); ++r) values[sys.free_nodes[r]] = cg.x[r];
        out.report.iterations = cg.iterations;
        out.report.residual = cg.residual;
    }
    out.u.values = std::move(values);
    out.u.pinned = std::move(pinned);
    out.report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline SolveResult constant_solution(const PointCloud& cloud, Method method) {
    SolveResult out;
    out.report.method = method;
    out.u.values.assign(cloud.size(), cloud.label_values().front());
    out.u.pinned = cloud.labeled_mask();
    return out;
}

} // namespace detail

/// Properly-weighted Laplacian learning: minimize the weighted Dirichlet energy
/// subject to u = g on the labels.
///
/// Nodes with gamma = +inf (zeta = inf, two-region radius 0) impose hard
/// equalities on their neighbors: each such node and every neighbor is pinned
/// to the label value nearest to it.
inline SolveResult solve_pw(const SparseGraph& g, const EnergyWeights& ew, const PointCloud& cloud,
                            const SolveOptions& options = {}) {
    detail::check_labels(g, cloud, options);
    if (ew.node_gamma.size() != g.n) throw DataError("energy weights do not match graph");
    if (detail::constant_labels(cloud)) return detail::constant_solution(cloud, Method::pw);
    auto [pinned, values] = detail::label_constraints(cloud);
    std::vector<char> hard(g.n, 0);
    for (std::size_t x = 0; x < g.n; ++x) {
        if (!std::isinf(ew.node_gamma[x])) continue;
        // value of the nearest label (the node itself when labeled)
        double v = values[x];
        if (!pinned[x]) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < cloud.label_count(); ++k) {
                const double d2 = squared_distance(cloud.point(x), cloud.point(cloud.label_indices()[k]));
                if (d2 < best) {
                    best = d2;
                    v = cloud.label_values()[k];
                }
            }
        }
        auto pin = [&](std::size_t y) {
            if ((pinned[y] || hard[y]) && values[y] != v)
                throw DataError("conflicting hard constraints at node " + std::to_string(y) +
                                " (infinite label weight next to different label values)");
            if (!pinned[y]) {
                hard[y] = 1;
                values[y] = v;
            }
        };
        pin(x);
        for (std::size_t p = g.row_ptr[x]; p < g.row_ptr[x + 1]; ++p) pin(g.col[p]);
    }
    for (std::size_t i = 0; i < g.n; ++i)
        if (hard[i]) pinned[i] = 1;
    auto result = detail::solve_constrained(
        g, pinned, values, [&](std::size_t i, std::size_t j, double w) { return (ew.node_gamma[i] + ew.node_gamma[j]) * w; },
        Method::pw, options);
    for (std::size_t i = 0; i < g.n; ++i)
        if (hard[i]) result.u.pinned[i] = 0; // pinned reports labels only
    result.report.energy = dirichlet_energy(g, ew, result.u.values);
    return result;
}

/// Standard Laplacian learning: gamma == 1.
inline SolveResult solve_standard(const SparseGraph& g, const PointCloud& cloud, const SolveOptions& options = {}) {
    detail::check_labels(g, cloud, options);
    const EnergyWeights uniform = uniform_energy_weights(g);
    if (detail::constant_labels(cloud)) return detail::constant_solution(cloud, Method::standard);
    auto [pinned, values] = detail::label_constraints(cloud);
    auto result = detail::solve_constrained(
        g, pinned, values, [](std::size_t, std::size_t, double w) { return w; }, Method::standard, options);
    result.report.energy = dirichlet_energy(g, uniform, result.u.values);
    return result;
}

/// Weighted nonlocal Laplacian. The stationarity condition of its objective at
/// a free node i is sum_{y free} 2 w_iy (u_i - u_y) + (1 + mu) sum_{y in G} w_iy (u_i - g_y) = 0,
/// which is a symmetric system with modified edge weights.
inline SolveResult solve_wnll(const SparseGraph& g, const PointCloud& cloud, WnllParams params = {},
                              const SolveOptions& options = {}) {
    detail::check_labels(g, cloud, options);
    const double mu = params.mu > 0.0 ? params.mu : default_wnll_mu(cloud);
    if (!(mu > 0.0)) throw ConfigError("wnll mu must be positive");
    if (detail::constant_labels(cloud)) return detail::constant_solution(cloud, Method::wnll);
    auto [pinned, values] = detail::label_constraints(cloud);
    const auto labeled = cloud.labeled_mask();
    auto result = detail::solve_constrained(
        g, pinned, values,
        [&](std::size_t i, std::size_t j, double w) { return (labeled[i] || labeled[j]) ? (1.0 + mu) * w : 2.0 * w; },
        Method::wnll, options);
    result.report.energy = wnll_objective(g, cloud, result.u.values, mu);
    return result;
}

/// Dispatch helper used by the classifier and the experiment drivers.
/// `ew` is only read for the pw method.
inline SolveResult solve(Method method, const SparseGraph& g, const EnergyWeights& ew, const PointCloud& cloud,
                         const WnllParams& wnll = {}, const SolveOptions& options = {}) {
    switch (method) {
    case Method::pw: return solve_pw(g, ew, cloud, options);
    case Method::standard: return solve_standard(g, cloud, options);
    case Method::wnll: return solve_wnll(g, cloud, wnll, options);
    }
    throw ConfigError("unknown method");
}

} // namespace pwgl
