#pragma once

#include <pwgl/pwgl.hpp>

#include <vector>

namespace fixture {

using namespace pwgl;

inline PointCloud random_cloud(std::size_t n, std::size_t dim, std::uint64_t seed) {
    CounterRng rng(seed);
    PointCloud cloud(dim);
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : x) v = rng.uniform();
        cloud.add_point(x);
    }
    return cloud;
}

/// Connected random weighted graph: a path backbone through all nodes plus
/// extra edges with probability `p`, weights uniform in [0.1, 1].
inline SparseGraph random_graph(std::size_t n, double p, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<pwgl::detail::Row> rows(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || rng.uniform() < p) {
                const double w = rng.uniform(0.1, 1.0);
                rows[i].col.push_back(static_cast<NodeIndex>(j));
                rows[i].val.push_back(w);
                rows[j].col.push_back(static_cast<NodeIndex>(i));
                rows[j].val.push_back(w);
            }
        }
    }
    for (auto& r : rows) {
        std::vector<std::size_t> order(r.col.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.col[a] < r.col[b]; });
        pwgl::detail::Row s;
        for (auto k : order) {
            s.col.push_back(r.col[k]);
            s.val.push_back(r.val[k]);
        }
        r = std::move(s);
    }
    SparseGraph g = pwgl::detail::assemble_rows(n, std::move(rows));
    g.construction = LoadedConstruction{};
    g.symmetric = true;
    return g;
}

/// Labels `count` distinct random nodes with values uniform in [0, 1].
inline void random_labels(PointCloud& cloud, std::size_t count, std::uint64_t seed) {
    CounterRng rng(seed);
    for (std::size_t i : sample_without_replacement(cloud.size(), count, rng))
        cloud.add_label(static_cast<NodeIndex>(i), rng.uniform(), 0);
}

/// Four points on a line with indicator connectivity to the next neighbor and
/// labels 0 and 1 at the ends.
inline PointCloud line4() {
    PointCloud cloud(1);
    for (double x : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}) cloud.add_point(std::vector<double>{x});
    cloud.add_label(0, 0.0, 0);
    cloud.add_label(3, 1.0, 1);
    return cloud;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace fixture
