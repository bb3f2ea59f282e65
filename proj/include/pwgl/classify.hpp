#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "laplacian.hpp"
#include "parallel.hpp"

namespace pwgl {

struct MulticlassTask {
    std::size_t class_count = 0;
    /// Optional ground truth for every node (empty when unknown).
    std::vector<int> truth;
};

struct Prediction {
    std::vector<int> label;                   // per node
    std::vector<std::vector<double>> scores;  // scores[c][node]
    std::vector<SolveReport> reports;         // one per class

    std::size_t size() const noexcept { return label.size(); }
    std::size_t class_count() const noexcept { return scores.size(); }
};

/// Index of the largest score; ties go to the lowest class id.
inline int argmax_class(const std::vector<std::vector<double>>& scores, std::size_t node) {
    int best = 0;
    for (std::size_t c = 1; c < scores.size(); ++c)
        if (scores[c][node] > scores[static_cast<std::size_t>(best)][node]) best = static_cast<int>(c);
    return best;
}

/// One-vs-rest: for each class c solve with g = 1 on the labels of class c and
/// g = 0 on every other label, then predict the argmax over classes. The
/// per-class solves are independent and run concurrently.
inline Prediction one_vs_rest(const SparseGraph& g, const EnergyWeights& ew, const PointCloud& cloud,
                              const MulticlassTask& task, Method method, const WnllParams& wnll = {},
                              const SolveOptions& options = {}) {
    const std::size_t C = task.class_count;
    if (C < 2) throw ConfigError("classification needs at least two classes");
    std::vector<std::size_t> per_class(C, 0);
    for (int c : cloud.label_classes()) {
        if (c < 0 || static_cast<std::size_t>(c) >= C)
            throw DataError("labeled node has class " + std::to_string(c) + " outside [0, " + std::to_string(C) + ")");
        ++per_class[static_cast<std::size_t>(c)];
    }
    for (std::size_t c = 0; c < C; ++c)
        if (per_class[c] == 0) throw DataError("class " + std::to_string(c) + " has no labeled nodes");

    // the component check is shared by all classes; do it once
    detail::check_labels(g, cloud, options);
    SolveOptions per_solve = options;
    per_solve.check_components = false;

    Prediction pred;
    pred.scores.resize(C);
    pred.reports.resize(C);
    parallel_for(C, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            PointCloud binary = cloud;
            for (std::size_t k = 0; k < cloud.label_count(); ++k)
                binary.set_label_value(k, cloud.label_classes()[k] == static_cast<int>(c) ? 1.0 : 0.0);
            auto res = solve(method, g, ew, binary, wnll, per_solve);
            pred.scores[c] = std::move(res.u.values);
            pred.reports[c] = res.report;
        }
    });

    pred.label.resize(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) pred.label[i] = argmax_class(pred.scores, i);
    return pred;
}

namespace detail {
inline void check_truth(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size())
        throw DataError("prediction has " + std::to_string(pred.size()) + " entries but truth has " +
                        std::to_string(truth.size()));
}
} // namespace detail

/// Fraction of unlabeled nodes whose prediction matches the truth.
inline double accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                       const std::vector<char>& labeled = {}) {
    detail::check_truth(pred, truth);
    std::size_t hits = 0, total = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!labeled.empty() && labeled[i]) continue;
        ++total;
        if (pred[i] == truth[i]) ++hits;
    }
    if (total == 0) throw DataError("accuracy: no unlabeled nodes to score");
    return static_cast<double>(hits) / static_cast<double>(total);
}

inline double misclassification_rate(const std::vector<int>& pred, const std::vector<int>& truth,
                                     const std::vector<char>& labeled = {}) {
    return 1.0 - accuracy(pred, truth, labeled);
}

/// Accuracy restricted to unlabeled nodes of each true class (NaN for absent classes).
inline std::vector<double> per_class_accuracy(const std::vector<int>& pred, const std::vector<int>& truth,
                                              std::size_t class_count, const std::vector<char>& labeled = {}) {
    detail::check_truth(pred, truth);
    std::vector<double> hits(class_count, 0.0), total(class_count, 0.0);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!labeled.empty() && labeled[i]) continue;
        if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= class_count) continue;
        total[static_cast<std::size_t>(truth[i])] += 1.0;
        if (pred[i] == truth[i]) hits[static_cast<std::size_t>(truth[i])] += 1.0;
    }
    std::vector<double> out(class_count);
    for (std::size_t c = 0; c < class_count; ++c) out[c] = total[c] > 0 ? hits[c] / total[c] : std::nan("");
    return out;
}

} // namespace pwgl
