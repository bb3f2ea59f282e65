#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "error.hpp"

namespace pwgl {

using NodeIndex = std::uint32_t;

/// n points in R^d stored row-major, plus the labeled subset.
///
/// Labeled points are ordinary nodes flagged by index. A label carries a real
/// value (regression / binary tasks) and optionally a class id (multiclass).
class PointCloud {
public:
    PointCloud() = default;
    explicit PointCloud(std::size_t dim) : dim_(dim) {
        if (dim == 0) throw DataError("point dimension must be at least 1");
    }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }

    std::span<const double> point(std::size_t i) const { return {coords_.data() + i * dim_, dim_}; }
    std::span<double> point(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }
    std::span<const double> coords() const noexcept { return coords_; }

    NodeIndex add_point(std::span<const double> x) {
        if (x.size() != dim_)
            throw DataError("point has dimension " + std::to_string(x.size()) + ", expected " +
                            std::to_string(dim_));
        coords_.insert(coords_.end(), x.begin(), x.end());
        return static_cast<NodeIndex>(size() - 1);
    }

    /// Marks node i as labeled. class_id < 0 means "no class".
    void add_label(NodeIndex i, double value, int class_id = -1) {
        if (i >= size()) throw DataError("label index " + std::to_string(i) + " out of range");
        if (std::find(label_indices_.begin(), label_indices_.end(), i) != label_indices_.end())
            throw DataError("node " + std::to_string(i) + " labeled twice");
        label_indices_.push_back(i);
        label_values_.push_back(value);
        label_classes_.push_back(class_id);
    }

    /// Appends a labeled node at x (the sample plus Gamma convention).
    NodeIndex append_labeled(std::span<const double> x, double value, int class_id = -1) {
        const NodeIndex i = add_point(x);
        add_label(i, value, class_id);
        return i;
    }

    void clear_labels() {
        label_indices_.clear();
        label_values_.clear();
        label_classes_.clear();
    }

    const std::vector<NodeIndex>& label_indices() const noexcept { return label_indices_; }
    const std::vector<double>& label_values() const noexcept { return label_values_; }
    const std::vector<int>& label_classes() const noexcept { return label_classes_; }
    std::size_t label_count() const noexcept { return label_indices_.size(); }

    void set_label_value(std::size_t k, double value) { label_values_.at(k) = value; }

    /// Per-node mask of labeled nodes.
    std::vector<char> labeled_mask() const {
        std::vector<char> mask(size(), 0);
        for (auto i : label_indices_) mask[i] = 1;
        return mask;
    }

private:
    std::size_t dim_ = 0;
    std::vector<double> coords_;
    std::vector<NodeIndex> label_indices_;
    std::vector<double> label_values_;
    std::vector<int> label_classes_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double t = a[k] - b[k];
        s += t * t;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) noexcept {
    return std::sqrt(squared_distance(a, b));
}

/// Closed-ball membership used by every radius query in the library.
inline bool within_radius(double dist2, double radius) noexcept { return dist2 <= radius * radius; }

struct Neighbor {
    NodeIndex index;
    double distance;
};

/// Exact kd-tree over a PointCloud. Immutable once built; queries are const and
/// may run concurrently. The cloud must outlive the index.
class KdTree {
public:
    explicit KdTree(const PointCloud& cloud, std::size_t leaf_size = 16)
        : cloud_(&cloud), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
        order_.resize(cloud.size());
        std::iota(order_.begin(), order_.end(), NodeIndex{0});
        if (!order_.empty()) {
            nodes_.reserve(2 * cloud.size() / leaf_size_ + 2);
            build(0, order_.size());
        }
    }

    const PointCloud& cloud() const noexcept { return *cloud_; }

    /// All nodes with |x_i - center| <= radius, ascending by index.
    std::vector<NodeIndex> range_query(std::span<const double> center, double radius) const {
        check_dim(center);
        std::vector<NodeIndex> out;
        if (radius < 0.0 || nodes_.empty()) return out;
        range_recurse(0, center, radius, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// The k nearest nodes, ascending by distance with ties broken by lower index.
    std::vector<Neighbor> knn_query(std::span<const double> center, std::size_t k) const {
        check_dim(center);
        if (k == 0) throw DataError("knn_query: k must be positive");
        if (k > cloud_->size())
            throw DataError("knn_query: k=" + std::to_string(k) + " exceeds node count " +
                            std::to_string(cloud_->size()));
        // max-heap on (dist2, index): top is the current worst candidate
        std::priority_queue<std::pair<double, NodeIndex>> heap;
        knn_recurse(0, center, k, heap);
        std::vector<Neighbor> out(heap.size());
        for (std::size_t i = out.size(); i-- > 0;) {
            out[i] = {heap.top().second, std::sqrt(heap.top().first)};
            heap.pop();
        }
        return out;
    }

private:
    struct Node {
        std::size_t begin, end; // slice of order_
        std::size_t left = 0, right = 0;
        std::vector<double> lo, hi; // bounding box
        bool leaf() const noexcept { return left == 0 && right == 0; }
    };

    void check_dim(std::span<const double> q) const {
        if (q.size() != cloud_->dim())
            throw DataError("query dimension " + std::to_string(q.size()) + " does not match cloud dimension " +
                            std::to_string(cloud_->dim()));
    }

    std::size_t build(std::size_t begin, std::size_t end) {
        const std::size_t d = cloud_->dim();
        Node node{begin, end, 0, 0, std::vector<double>(d, std::numeric_limits<double>::infinity()),
                  std::vector<double>(d, -std::numeric_limits<double>::infinity())};
        for (std::size_t i = begin; i < end; ++i) {
            auto p = cloud_->point(order_[i]);
            for (std::size_t k = 0; k < d; ++k) {
                node.lo[k] = std::min(node.lo[k], p[k]);
                node.hi[k] = std::max(node.hi[k], p[k]);
            }
        }
        const std::size_t id = nodes_.size();
        nodes_.push_back(node);
        if (end - begin <= leaf_size_) return id;

        std::size_t axis = 0;
        double widest = -1.0;
        for (std::size_t k = 0; k < d; ++k) {
            if (node.hi[k] - node.lo[k] > widest) {
                widest = node.hi[k] - node.lo[k];
                axis = k;
            }
        }
        if (widest <= 0.0) return id; // all points identical
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end), [&](NodeIndex a, NodeIndex b) {
                             return cloud_->point(a)[axis] < cloud_->point(b)[axis];
                         });
        const std::size_t l = build(begin, mid);
        const std::size_t r = build(mid, end);
        nodes_[id].left = l;
        nodes_[id].right = r;
        return id;
    }

    double box_distance2(const Node& node, std::span<const double> q) const noexcept {
        double s = 0.0;
        for (std::size_t k = 0; k < q.size(); ++k) {
            double t = 0.0;
            if (q[k] < node.lo[k]) t = node.lo[k] - q[k];
            else if (q[k] > node.hi[k]) t = q[k] - node.hi[k];
            s += t * t;
        }
        return s;
    }

    void range_recurse(std::size_t id, std::span<const double> q, double radius, std::vector<NodeIndex>& out) const {
        const Node& node = nodes_[id];
        if (box_distance2(node, q) > radius * radius) return;
        if (node.leaf()) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const NodeIndex j = order_[i];
                if (within_radius(squared_distance(cloud_->point(j), q), radius)) out.push_back(j);
            }
            return;
        }
        range_recurse(node.left, q, radius, out);
        range_recurse(node.right, q, radius, out);
    }

    void knn_recurse(std::size_t id, std::span<const double> q, std::size_t k,
                     std::priority_queue<std::pair<double, NodeIndex>>& heap) const {
        const Node& node = nodes_[id];
        // strict comparison keeps equal-distance subtrees so index tie-breaks stay exact
        if (heap.size() == k && box_distance2(node, q) > heap.top().first) return;
        if (node.leaf()) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const NodeIndex j = order_[i];
                const std::pair<double, NodeIndex> cand{squared_distance(cloud_->point(j), q), j};
                if (heap.size() < k) heap.push(cand);
                else if (cand < heap.top()) {
                    heap.pop();
                    heap.push(cand);
                }
            }
            return;
        }
        const double dl = box_distance2(nodes_[node.left], q);
        const double dr = box_distance2(nodes_[node.right], q);
        if (dl <= dr) {
            knn_recurse(node.left, q, k, heap);
            knn_recurse(node.right, q, k, heap);
        } else {
            knn_recurse(node.right, q, k, heap);
            knn_recurse(node.left, q, k, heap);
        }
    }

    const PointCloud* cloud_;
    std::size_t leaf_size_;
    std::vector<NodeIndex> order_;
    std::vector<Node> nodes_;
};

/// Exact k nearest neighbors by a linear scan, ordered like KdTree::knn_query.
/// Used in high dimension, where a kd-tree prunes almost nothing.
inline std::vector<Neighbor> brute_knn(const PointCloud& cloud, std::span<const double> center, std::size_t k) {
    if (k == 0) throw DataError("knn_query: k must be positive");
    if (k > cloud.size())
        throw DataError("knn_query: k=" + std::to_string(k) + " exceeds node count " + std::to_string(cloud.size()));
    std::vector<std::pair<double, NodeIndex>> all(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) all[i] = {squared_distance(center, cloud.point(i)), static_cast<NodeIndex>(i)};
    std::nth_element(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k - 1), all.end());
    std::sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<Neighbor> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = {all[i].second, std::sqrt(all[i].first)};
    return out;
}

/// Distance from `query` to the nearest labeled point.
inline double dist_to_labels(const PointCloud& cloud, std::span<const double> query) {
    if (cloud.label_count() == 0) throw DataError("no labeled points");
    double best = std::numeric_limits<double>::infinity();
    for (auto z : cloud.label_indices()) best = std::min(best, squared_distance(cloud.point(z), query));
    return std::sqrt(best);
}

/// Per-node distance to the label set.
inline std::vector<double> dist_to_labels_all(const PointCloud& cloud) {
    if (cloud.label_count() == 0) throw DataError("no labeled points");
    std::vector<double> out(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) out[i] = dist_to_labels(cloud, cloud.point(i));
    return out;
}

/// Minimum pairwise distance R between labeled points (+inf for a single label).
inline double min_label_separation(const PointCloud& cloud) {
    const auto& idx = cloud.label_indices();
    if (idx.empty()) throw DataError("no labeled points");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b)
            best = std::min(best, squared_distance(cloud.point(idx[a]), cloud.point(idx[b])));
    if (best == 0.0) throw DataError("coincident labels");
    return std::sqrt(best);
}

} // namespace pwgl
