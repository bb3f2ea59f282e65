#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "kernels.hpp"
#include "parallel.hpp"

namespace pwgl {

struct EpsBallConstruction {
    double eps = 0.0;
    KernelProfile kernel;
};

struct KnnConstruction {
    std::size_t k = 0;
    std::size_t sigma_neighbor = 0;
};

struct LoadedConstruction {};

using GraphConstruction = std::variant<EpsBallConstruction, KnnConstruction, LoadedConstruction>;

/// Symmetric nonnegative weight matrix in compressed sparse rows.
///
/// Columns are sorted within each row, there are no diagonal entries and no
/// stored zeros, and w(i, j) == w(j, i) bitwise.
struct SparseGraph {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<NodeIndex> col;
    std::vector<double> val;
    GraphConstruction construction = LoadedConstruction{};
    bool symmetric = false;

    std::size_t nnz() const noexcept { return col.size(); }
    std::size_t edge_count() const noexcept { return col.size() / 2; }
    std::size_t degree(std::size_t i) const noexcept { return row_ptr[i + 1] - row_ptr[i]; }

    /// Weight of edge (i, j), 0 if absent.
    double weight(std::size_t i, std::size_t j) const {
        const auto b = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
        const auto e = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
        const auto it = std::lower_bound(b, e, static_cast<NodeIndex>(j));
        return (it != e && *it == j) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
    }

    bool is_eps_ball() const noexcept { return std::holds_alternative<EpsBallConstruction>(construction); }
    double eps() const noexcept { return is_eps_ball() ? std::get<EpsBallConstruction>(construction).eps : 0.0; }

    /// Checks the storage invariants; throws DataError on the first violation.
    void check_invariants() const {
        if (row_ptr.size() != n + 1) throw DataError("graph: row pointer length mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
                const NodeIndex j = col[p];
                if (j >= n) throw DataError("graph: column out of range");
                if (j == i) throw DataError("graph: self edge");
                if (p > row_ptr[i] && col[p - 1] >= j) throw DataError("graph: unsorted row");
                if (!(val[p] > 0.0) || !std::isfinite(val[p])) throw DataError("graph: nonpositive weight");
                if (weight(j, i) != val[p]) throw DataError("graph: asymmetric weight");
            }
        }
    }
};

namespace detail {

struct Row {
    std::vector<NodeIndex> col;
    std::vector<double> val;
};

inline SparseGraph assemble_rows(std::size_t n, std::vector<Row>&& rows) {
    SparseGraph g;
    g.n = n;
    g.row_ptr.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.row_ptr[i + 1] = g.row_ptr[i] + rows[i].col.size();
    g.col.reserve(g.row_ptr[n]);
    g.val.reserve(g.row_ptr[n]);
    for (auto& r : rows) {
        g.col.insert(g.col.end(), r.col.begin(), r.col.end());
        g.val.insert(g.val.end(), r.val.begin(), r.val.end());
        r = Row{};
    }
    return g;
}

/// Drops entries below rel * max(rowmax_i, rowmax_j); symmetric by construction.
inline void prune(SparseGraph& g, double rel) {
    if (rel <= 0.0) return;
    std::vector<double> rowmax(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) rowmax[i] = std::max(rowmax[i], g.val[p]);
    std::vector<Row> rows(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
            const NodeIndex j = g.col[p];
            if (g.val[p] >= rel * std::max(rowmax[i], rowmax[j])) {
                rows[i].col.push_back(j);
                rows[i].val.push_back(g.val[p]);
            }
        }
    }
    auto construction = g.construction;
    g = assemble_rows(g.n, std::move(rows));
    g.construction = construction;
    g.symmetric = true;
}

} // namespace detail

struct GraphOptions {
    /// Relative pruning threshold; 0 disables pruning.
    double prune_relative = 1e-12;
    std::size_t leaf_size = 16;
};

/// eps-ball graph: edge (x, y) iff |x - y| <= support * eps and eta > 0, with
/// weight eta_eps(x - y).
inline SparseGraph build_eps_graph(const PointCloud& cloud, double eps, const KernelProfile& kernel,
                                   const GraphOptions& options = {}) {
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    kernel.validate();
    const std::size_t n = cloud.size();
    const KdTree index(cloud, options.leaf_size);
    const double radius = kernel.support_radius() * eps;
    std::vector<detail::Row> rows(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto xi = cloud.point(i);
            for (NodeIndex j : index.range_query(xi, radius)) {
                if (j == i) continue;
                const double w = eta_eps_at(kernel, distance(xi, cloud.point(j)), cloud.dim(), eps);
                if (w > 0.0) {
                    rows[i].col.push_back(j);
                    rows[i].val.push_back(w);
                }
            }
        }
    });
    SparseGraph g = detail::assemble_rows(n, std::move(rows));
    g.construction = EpsBallConstruction{eps, kernel};
    g.symmetric = true;
    detail::prune(g, options.prune_relative);
    if (g.nnz() == 0 && n > 1)
        std::cerr << "warning: eps = " << eps << " produced a graph with no edges\n";
    return g;
}

/// Symmetrizes a directed weight list: W <- (W^T + W) / 2.
inline SparseGraph symmetrize(std::size_t n, const std::vector<detail::Row>& directed) {
    std::vector<std::map<NodeIndex, double>> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < directed[i].col.size(); ++p) {
            const NodeIndex j = directed[i].col[p];
            if (j == i) continue;
            const double half = directed[i].val[p] / 2.0;
            acc[i][j] += half;
            acc[j][static_cast<NodeIndex>(i)] += half;
        }
    }
    // each pair holds at most two halves, and a + b == b + a exactly
    std::vector<detail::Row> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto [j, w] : acc[i]) {
            if (w > 0.0) {
                rows[i].col.push_back(j);
                rows[i].val.push_back(w);
            }
        }
    }
    SparseGraph g = detail::assemble_rows(n, std::move(rows));
    g.symmetric = true;
    return g;
}

/// Symmetrizes an already stored graph (idempotent on symmetric input).
inline SparseGraph symmetrize(const SparseGraph& g) {
    std::vector<detail::Row> rows(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        rows[i].col.assign(g.col.begin() + static_cast<std::ptrdiff_t>(g.row_ptr[i]),
                           g.col.begin() + static_cast<std::ptrdiff_t>(g.row_ptr[i + 1]));
        rows[i].val.assign(g.val.begin() + static_cast<std::ptrdiff_t>(g.row_ptr[i]),
                           g.val.begin() + static_cast<std::ptrdiff_t>(g.row_ptr[i + 1]));
    }
    SparseGraph out = symmetrize(g.n, rows);
    out.construction = g.construction;
    return out;
}

/// Above this dimension kNN queries scan linearly instead of using the kd-tree.
inline constexpr std::size_t brute_force_dim = 24;

/// Directed self-tuning Gaussian weights over each node's k nearest neighbors.
///
/// sigma_x is the distance to the sigma_neighbor-th nearest neighbor (self
/// excluded); w_xy = exp(-|x - y|^2 / sigma_x^2). The caller symmetrizes.
inline std::vector<detail::Row> knn_directed_weights(const PointCloud& cloud, std::size_t k, std::size_t sigma_neighbor,
                                                     std::size_t leaf_size = 16) {
    const std::size_t n = cloud.size();
    if (k == 0 || k >= n) throw ConfigError("knn graph requires 0 < k < n");
    if (sigma_neighbor == 0 || sigma_neighbor > k) throw ConfigError("knn graph requires 0 < sigma_neighbor <= k");
    const bool brute = cloud.dim() > brute_force_dim;
    std::optional<KdTree> index;
    if (!brute) index.emplace(cloud, leaf_size);
    std::vector<detail::Row> rows(n);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto nb = brute ? brute_knn(cloud, cloud.point(i), k + 1) : index->knn_query(cloud.point(i), k + 1);
            // drop self (it need not come first when duplicates exist)
            auto self = std::find_if(nb.begin(), nb.end(), [i](const Neighbor& x) { return x.index == i; });
            if (self != nb.end()) nb.erase(self);
            nb.resize(k);
            double sigma = nb[sigma_neighbor - 1].distance;
            if (sigma == 0.0) {
                sigma = 0.0;
                for (const auto& x : nb) {
                    if (x.distance > 0.0) {
                        sigma = x.distance;
                        break;
                    }
                }
                if (sigma == 0.0)
                    throw DataError("knn graph: node " + std::to_string(i) + " has an all-identical neighborhood");
            }
            const double s2 = sigma * sigma;
            std::sort(nb.begin(), nb.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
            for (const auto& x : nb) {
                rows[i].col.push_back(x.index);
                rows[i].val.push_back(std::exp(-(x.distance * x.distance) / s2));
            }
        }
    });
    return rows;
}

inline SparseGraph build_knn_graph(const PointCloud& cloud, std::size_t k, std::size_t sigma_neighbor,
                                   const GraphOptions& options = {}) {
    auto directed = knn_directed_weights(cloud, k, sigma_neighbor, options.leaf_size);
    SparseGraph g = symmetrize(cloud.size(), directed);
    g.construction = KnnConstruction{k, sigma_neighbor};
    detail::prune(g, options.prune_relative);
    return g;
}

// ---------------------------------------------------------------------------

/// Per-node label weights gamma_zeta(x_i) plus the normalization constants of
/// the energy and the operator. Base graph weights are never modified.
struct EnergyWeights {
    std::vector<double> node_gamma;
    double energy_scale = 1.0;   // 1 / (n^2 eps^2) on eps-ball graphs, 1 otherwise
    double operator_scale = 0.5; // 1 / (2 n eps^2) on eps-ball graphs, 1/2 otherwise

    /// Symmetric combined weight (gamma(x) + gamma(y)) w_xy / 2.
    double combined(std::size_t i, std::size_t j, double w) const noexcept {
        return (node_gamma[i] + node_gamma[j]) * w / 2.0;
    }
};

/// Normalizations for a graph with `n` nodes (the node count of the graph).
inline void set_scales(EnergyWeights& ew, const SparseGraph& graph) {
    if (graph.is_eps_ball()) {
        const double n = static_cast<double>(graph.n);
        const double e2 = graph.eps() * graph.eps();
        ew.energy_scale = 1.0 / (n * n * e2);
        ew.operator_scale = 1.0 / (2.0 * n * e2);
    } else {
        ew.energy_scale = 1.0;
        ew.operator_scale = 0.5;
    }
}

/// Uniform weights (gamma == 1): the standard graph Laplacian.
inline EnergyWeights uniform_energy_weights(const SparseGraph& graph) {
    EnergyWeights ew;
    ew.node_gamma.assign(graph.n, 1.0);
    set_scales(ew, graph);
    return ew;
}

inline EnergyWeights attach_energy_weights(const SparseGraph& graph, const PointCloud& cloud, WeightProfile weights) {
    if (!graph.symmetric) throw DataError("attach_energy_weights: graph is not symmetric");
    if (graph.n != cloud.size()) throw DataError("attach_energy_weights: graph/cloud size mismatch");
    weights.validate();
    if (!weights.global_formula && cloud.label_count() > 1) weights.label_separation = min_label_separation(cloud);
    EnergyWeights ew;
    ew.node_gamma.resize(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            ew.node_gamma[i] = gamma_zeta(weights, dist_to_labels(cloud, cloud.point(i)));
    });
    set_scales(ew, graph);
    return ew;
}

/// Same, but with the distance entering gamma supplied per node (for example
/// the distance to a single reference point rather than to the label set).
inline EnergyWeights energy_weights_from_distances(const SparseGraph& graph, std::span<const double> dist,
                                                   const WeightProfile& weights) {
    if (dist.size() != graph.n) throw DataError("energy_weights_from_distances: size mismatch");
    weights.validate();
    EnergyWeights ew;
    ew.node_gamma.resize(graph.n);
    for (std::size_t i = 0; i < graph.n; ++i) ew.node_gamma[i] = gamma_zeta(weights, dist[i]);
    set_scales(ew, graph);
    return ew;
}

/// Component id per node (BFS over stored edges), numbered in order of first node.
inline std::vector<std::size_t> connected_components(const SparseGraph& graph) {
    constexpr auto unset = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> comp(graph.n, unset);
    std::size_t next = 0;
    std::vector<std::size_t> queue;
    for (std::size_t s = 0; s < graph.n; ++s) {
        if (comp[s] != unset) continue;
        comp[s] = next;
        queue.assign(1, s);
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const std::size_t i = queue[h];
            for (std::size_t p = graph.row_ptr[i]; p < graph.row_ptr[i + 1]; ++p) {
                if (graph.val[p] > 0.0 && comp[graph.col[p]] == unset) {
                    comp[graph.col[p]] = next;
                    queue.push_back(graph.col[p]);
                }
            }
        }
        ++next;
    }
    return comp;
}

/// Components that contain no labeled node. Solves on such graphs are singular.
inline std::vector<std::size_t> unlabeled_components(const SparseGraph& graph, const std::vector<NodeIndex>& labels) {
    const auto comp = connected_components(graph);
    const std::size_t count = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<char> has(count, 0);
    for (auto z : labels) has[comp[z]] = 1;
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < count; ++c)
        if (!has[c]) out.push_back(c);
    return out;
}

/// Nodes of the component holding every label, ascending. Throws when the
/// labels are spread over several components.
inline std::vector<NodeIndex> label_component_nodes(const SparseGraph& graph, const std::vector<NodeIndex>& labels) {
    if (labels.empty()) throw DataError("no labeled points");
    const auto comp = connected_components(graph);
    const std::size_t c = comp[labels.front()];
    for (auto z : labels)
        if (comp[z] != c) throw DataError("labels lie in different connected components");
    std::vector<NodeIndex> nodes;
    for (std::size_t i = 0; i < graph.n; ++i)
        if (comp[i] == c) nodes.push_back(static_cast<NodeIndex>(i));
    return nodes;
}

/// Induced subgraph on `nodes` (ascending), renumbered 0..m-1.
inline SparseGraph induced_subgraph(const SparseGraph& graph, const std::vector<NodeIndex>& nodes) {
    constexpr auto absent = std::numeric_limits<NodeIndex>::max();
    std::vector<NodeIndex> remap(graph.n, absent);
    for (std::size_t k = 0; k < nodes.size(); ++k) remap[nodes[k]] = static_cast<NodeIndex>(k);
    std::vector<detail::Row> rows(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::size_t i = nodes[k];
        for (std::size_t p = graph.row_ptr[i]; p < graph.row_ptr[i + 1]; ++p) {
            if (remap[graph.col[p]] == absent) continue;
            rows[k].col.push_back(remap[graph.col[p]]);
            rows[k].val.push_back(graph.val[p]);
        }
    }
    SparseGraph g = detail::assemble_rows(nodes.size(), std::move(rows));
    g.construction = graph.construction;
    g.symmetric = graph.symmetric;
    return g;
}

/// Cloud restricted to `nodes` (ascending); labels outside are dropped.
inline PointCloud induced_cloud(const PointCloud& cloud, const std::vector<NodeIndex>& nodes) {
    PointCloud out(cloud.dim());
    constexpr auto absent = std::numeric_limits<NodeIndex>::max();
    std::vector<NodeIndex> remap(cloud.size(), absent);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        remap[nodes[k]] = static_cast<NodeIndex>(k);
        out.add_point(cloud.point(nodes[k]));
    }
    for (std::size_t k = 0; k < cloud.label_count(); ++k) {
        const auto z = cloud.label_indices()[k];
        if (remap[z] != absent) out.add_label(remap[z], cloud.label_values()[k], cloud.label_classes()[k]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Persistence: "pwgl-graph v1 n=<n> sym=1" then "i j w" for i < j.

inline void save_graph(const SparseGraph& g, std::ostream& out) {
    out << "pwgl-graph v1 n=" << g.n << " sym=1\n";
    char buf[64];
    for (std::size_t i = 0; i < g.n; ++i) {
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1]; ++p) {
            if (g.col[p] <= i) continue;
            std::snprintf(buf, sizeof buf, "%.17g", g.val[p]);
            out << i << ' ' << g.col[p] << ' ' << buf << '\n';
        }
    }
}

inline SparseGraph load_graph(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw DataError("graph file: missing header");
    std::size_t n = 0;
    int sym = 0;
    if (std::sscanf(header.c_str(), "pwgl-graph v1 n=%zu sym=%d", &n, &sym) != 2 || sym != 1)
        throw DataError("graph file: bad header '" + header + "'");
    std::vector<detail::Row> rows(n);
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::size_t i, j;
        std::string wtext;
        if (!(ls >> i >> j >> wtext)) throw DataError("graph file: malformed line " + std::to_string(lineno));
        const double w = std::strtod(wtext.c_str(), nullptr);
        if (i >= j || j >= n || !(w > 0.0))
            throw DataError("graph file: invalid edge on line " + std::to_string(lineno));
        rows[i].col.push_back(static_cast<NodeIndex>(j));
        rows[i].val.push_back(w);
        rows[j].col.push_back(static_cast<NodeIndex>(i));
        rows[j].val.push_back(w);
    }
    for (auto& r : rows) {
        std::vector<std::size_t> perm(r.col.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return r.col[a] < r.col[b]; });
        detail::Row sorted;
        for (auto p : perm) {
            if (!sorted.col.empty() && sorted.col.back() == r.col[p]) throw DataError("graph file: duplicate edge");
            sorted.col.push_back(r.col[p]);
            sorted.val.push_back(r.val[p]);
        }
        r = std::move(sorted);
    }
    SparseGraph g = detail::assemble_rows(n, std::move(rows));
    g.symmetric = true;
    return g;
}

} // namespace pwgl
