#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "classify.hpp"
#include "experiments.hpp"
#include "graph.hpp"
#include "io.hpp"
#include "rng.hpp"

namespace pwgl {

struct MnistParams {
    std::size_t labels_per_class = 10;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::size_t k = 50;
    std::size_t sigma_neighbor = 20;
    double alpha = 5.0;
    double r0 = 0.1;
    double zeta = 1e7;
    std::vector<Method> methods{Method::standard, Method::wnll, Method::pw};
    double wnll_mu = 0.0;
    CgOptions cg{1e-10, 0, Preconditioner::jacobi};
};

/// For each class, `per_class` distinct items drawn uniformly; the result is
/// sorted by index. Depends only on (truth, per_class, seed).
inline std::vector<NodeIndex> draw_labels_per_class(const std::vector<int>& truth, std::size_t class_count,
                                                    std::size_t per_class, std::uint64_t seed) {
    std::vector<std::vector<NodeIndex>> members(class_count);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= class_count)
            throw DataError("class id " + std::to_string(truth[i]) + " out of range");
        members[static_cast<std::size_t>(truth[i])].push_back(static_cast<NodeIndex>(i));
    }
    std::vector<NodeIndex> out;
    for (std::size_t c = 0; c < class_count; ++c) {
        if (members[c].size() < per_class)
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(members[c].size()) +
                            " items, fewer than the " + std::to_string(per_class) + " labels requested");
        CounterRng rng(derive_seed(seed, c));
        for (std::size_t j : sample_without_replacement(members[c].size(), per_class, rng)) out.push_back(members[c][j]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// (images, labels) pairs present in `dir`: the training and test files under
/// their usual names, with - or . before the idx suffix (uncompressed).
inline std::vector<std::pair<std::filesystem::path, std::filesystem::path>> find_mnist_files(const std::filesystem::path& dir) {
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> out;
    for (const std::string prefix : {"train", "t10k"}) {
        for (const std::string sep : {"-", "."}) {
            const auto im = dir / (prefix + "-images" + sep + "idx3-ubyte");
            const auto lb = dir / (prefix + "-labels" + sep + "idx1-ubyte");
            if (std::filesystem::exists(im) && std::filesystem::exists(lb)) {
                out.emplace_back(im, lb);
                break;
            }
        }
    }
    return out;
}

/// kNN graph over the images, then per trial one label draw shared by all
/// methods, one-vs-rest classification and accuracy over unlabeled images.
inline ExperimentReport mnist_pipeline(const IdxDataset& data, const MnistParams& p) {
    if (p.trials == 0) throw ConfigError("trials must be positive");
    if (p.labels_per_class == 0) throw ConfigError("labels_per_class must be positive");
    const std::size_t C = 10;
    ExperimentReport rep;
    rep.name = "mnist";
    rep.params = Json{{"images", data.size()},         {"labels_per_class", p.labels_per_class},
                      {"trials", p.trials},            {"k", p.k},
                      {"sigma_neighbor", p.sigma_neighbor}, {"alpha", p.alpha},
                      {"r0", p.r0},                    {"zeta", p.zeta},
                      {"methods", method_names(p.methods)}, {"tol", p.cg.tol}, {"max_iter", p.cg.max_iter}};

    const auto t0 = std::chrono::steady_clock::now();
    PointCloud base = data.to_cloud();
    const SparseGraph g = build_knn_graph(base, p.k, p.sigma_neighbor);
    rep.metrics["graph"] = Json{{"edges", g.edge_count()},
                                {"wall_time_ms", std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count()}};
    SolveOptions options;
    options.cg = p.cg;
    // one-vs-rest already spreads classes over the workers; trials stay serial
    Json seeds = Json::array();
    std::vector<std::vector<double>> acc(p.methods.size());
    Json per_trial = Json::array();
    for (std::size_t t = 0; t < p.trials; ++t) {
        const auto seed = derive_seed(p.seed, t);
        seeds.push_back(seed);
        PointCloud cloud = base;
        for (NodeIndex i : draw_labels_per_class(data.labels, C, p.labels_per_class, seed))
            cloud.add_label(i, 0.0, data.labels[i]);
        WeightProfile w;
        w.alpha = p.alpha;
        w.r0 = p.r0;
        w.zeta = p.zeta;
        const EnergyWeights ew = attach_energy_weights(g, cloud, w);
        const auto labeled = cloud.labeled_mask();
        Json tj{{"trial", t}};
        for (std::size_t m = 0; m < p.methods.size(); ++m) {
            const auto pred = one_vs_rest(g, ew, cloud, MulticlassTask{C, data.labels}, p.methods[m], WnllParams{p.wnll_mu}, options);
            const Json summary = classification_summary(pred, data.labels, C, labeled);
            acc[m].push_back(summary["accuracy"].get<double>());
            tj[method_name(p.methods[m])] = summary;
        }
        per_trial.push_back(tj);
    }
    rep.seeds = Json{{"master", p.seed}, {"trials", seeds}};
    for (std::size_t m = 0; m < p.methods.size(); ++m)
        rep.metrics[method_name(p.methods[m])] = Json{{"mean_accuracy", mean_of(acc[m])}, {"std_accuracy", stddev_of(acc[m])}};
    rep.metrics["trials"] = per_trial;
    return rep;
}

} // namespace pwgl
