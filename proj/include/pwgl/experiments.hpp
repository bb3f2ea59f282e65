#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "kernels.hpp"
#include "laplacian.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

namespace pwgl {

using Json = nlohmann::ordered_json;

inline constexpr const char* library_version = "1.0.0";

/// zeta given either as an absolute value or as c * n * eps^2.
struct ZetaRule {
    double value = 50.0;
    bool scaled = true;

    double resolve(std::size_t n, double eps) const {
        return scaled ? value * static_cast<double>(n) * eps * eps : value;
    }
    Json to_json() const {
        if (scaled) return Json{{"scaled", value}};
        return value;
    }
};

/// One column of per-node output (u for one method, typically).
struct FieldColumn {
    std::string name;
    std::vector<double> values;
};

struct BoundaryRow {
    std::size_t trial = 0;
    std::string method;
    NodeIndex node = 0;
    std::vector<double> coords;
    double u = 0.0;
};

/// Everything an experiment emits: report.json content plus the field and
/// boundary tables. Timing lives only under keys named "wall_time_ms".
struct ExperimentReport {
    std::string name;
    Json params = Json::object();
    Json seeds = Json::object();
    Json metrics = Json::object();
    PointCloud field_cloud;
    std::vector<FieldColumn> field;
    std::vector<BoundaryRow> boundary;

    Json to_json() const {
        Json j;
        j["experiment"] = name;
        j["version"] = library_version;
        j["params"] = params;
        j["seeds"] = seeds;
        j["metrics"] = metrics;
        return j;
    }
};

/// Copy of `j` with every "wall_time_ms" member removed (for reproducibility checks).
inline Json strip_timing(const Json& j) {
    if (j.is_object()) {
        Json out = Json::object();
        for (auto it = j.begin(); it != j.end(); ++it)
            if (it.key() != "wall_time_ms") out[it.key()] = strip_timing(it.value());
        return out;
    }
    if (j.is_array()) {
        Json out = Json::array();
        for (const auto& v : j) out.push_back(strip_timing(v));
        return out;
    }
    return j;
}

inline Json solve_report_json(const SolveReport& r) {
    return Json{{"method", method_name(r.method)},
                {"iterations", r.iterations},
                {"residual", r.residual},
                {"energy", r.energy},
                {"wall_time_ms", r.wall_time_ms}};
}

// ---------------------------------------------------------------------------
// Shared plumbing

struct PreparedGraph {
    PointCloud cloud;
    SparseGraph graph;
    std::size_t dropped_nodes = 0;
    std::vector<NodeIndex> kept; // original index of each kept node
};

/// eps-graph over `cloud`, restricted to the component holding all labels when
/// some component carries no label.
inline PreparedGraph prepare_eps_graph(PointCloud cloud, double eps, const KernelProfile& kernel,
                                       const GraphOptions& options = {}) {
    PreparedGraph out;
    out.graph = build_eps_graph(cloud, eps, kernel, options);
    if (!unlabeled_components(out.graph, cloud.label_indices()).empty()) {
        out.kept = label_component_nodes(out.graph, cloud.label_indices());
        out.graph = induced_subgraph(out.graph, out.kept);
        out.dropped_nodes = cloud.size() - out.kept.size();
        out.cloud = induced_cloud(cloud, out.kept);
    } else {
        out.kept.resize(cloud.size());
        std::iota(out.kept.begin(), out.kept.end(), NodeIndex{0});
        out.cloud = std::move(cloud);
    }
    return out;
}

struct FieldStats {
    double corr_x1 = 0.0;
    double range = 0.0;
    double near_half = 0.0;
    double std_dev = 0.0;
    double mean = 0.0;
};

/// Statistics of u over unlabeled nodes.
inline FieldStats field_stats(const PointCloud& cloud, std::span<const double> u, double near_tol = 0.05) {
    const auto mask = cloud.labeled_mask();
    double sx = 0, su = 0, cnt = 0, near = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (mask[i]) continue;
        sx += cloud.point(i)[0];
        su += u[i];
        cnt += 1;
        if (std::abs(u[i] - 0.5) < near_tol) near += 1;
        lo = std::min(lo, u[i]);
        hi = std::max(hi, u[i]);
    }
    FieldStats s;
    if (cnt == 0) return s;
    const double mx = sx / cnt, mu = su / cnt;
    double cxx = 0, cuu = 0, cxu = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (mask[i]) continue;
        const double dx = cloud.point(i)[0] - mx, du = u[i] - mu;
        cxx += dx * dx;
        cuu += du * du;
        cxu += dx * du;
    }
    s.corr_x1 = (cxx > 0 && cuu > 0) ? cxu / std::sqrt(cxx * cuu) : 0.0;
    s.range = hi - lo;
    s.near_half = near / cnt;
    s.std_dev = std::sqrt(cuu / cnt);
    s.mean = mu;
    return s;
}

inline Json field_stats_json(const FieldStats& s) {
    return Json{{"corr_u_x1", s.corr_x1},
                {"range", s.range},
                {"near_half_fraction", s.near_half},
                {"std_unlabeled", s.std_dev},
                {"mean_unlabeled", s.mean}};
}

inline std::vector<std::string> method_names(const std::vector<Method>& methods) {
    std::vector<std::string> out;
    for (auto m : methods) out.push_back(method_name(m));
    return out;
}

/// Runs `body(trial)` for every trial concurrently; results come back in trial order.
template <typename Result, typename Body>
std::vector<Result> run_trials(std::size_t trials, Body&& body) {
    std::vector<Result> out(trials);
    parallel_for(trials, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) out[t] = body(t);
    });
    return out;
}

inline double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation (0 for fewer than two values).
inline double stddev_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Gaussian sigma = eps/2 truncated at the connectivity distance eps.
inline KernelProfile experiment_kernel(double sigma_factor = 0.5, double support = 1.0) {
    return KernelProfile::gaussian(sigma_factor, support);
}

// ---------------------------------------------------------------------------
// Two labels on the unit box

struct TwoPointBoxParams {
    std::size_t dim = 2;
    std::size_t n = 20000;
    std::uint64_t seed = 1;
    double eps = 0.0; // 0: 2 / n^{1/d}
    KernelProfile kernel = experiment_kernel();
    double alpha = 2.0;
    double r0 = 1.0;
    ZetaRule zeta{50.0, true};
    std::vector<Method> methods{Method::standard, Method::wnll, Method::pw};
    double wnll_mu = 0.0;
    CgOptions cg{1e-10, 100000, Preconditioner::jacobi};
    double near_tol = 0.05;

    double resolved_eps() const { return eps > 0.0 ? eps : 2.0 / std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim)); }
};

inline Json kernel_json(const KernelProfile& k) {
    return Json{{"kernel", k.name()}, {"sigma_factor", k.sigma_factor}, {"support", k.support_radius()}};
}

/// Solves each requested method on one sample with the labels
/// g(0, 1/2, ...) = 0 and g(1, 1/2, ...) = 1 and reports shape statistics of u.
inline ExperimentReport run_two_point_box(const TwoPointBoxParams& p) {
    if (p.dim != 2 && p.dim != 3) throw ConfigError("two-point box runs in d = 2 or 3");
    ExperimentReport rep;
    rep.name = "box";
    const double eps = p.resolved_eps();
    const double zeta = p.zeta.resolve(p.n, eps);
    auto spec = synthetic_spec(Generator::uniform_box, p.dim, p.n, p.seed);
    spec.labels = two_point_box_labels(p.dim);

    auto prepared = prepare_eps_graph(generate(spec), eps, p.kernel);
    const auto& cloud = prepared.cloud;
    const auto& g = prepared.graph;
    WeightProfile w;
    w.alpha = p.alpha;
    w.r0 = p.r0;
    w.zeta = zeta;
    const EnergyWeights ew = attach_energy_weights(g, cloud, w);

    rep.params = Json{{"dim", p.dim},         {"n", p.n},         {"eps", eps},
                      {"graph", kernel_json(p.kernel)},           {"alpha", p.alpha},
                      {"r0", p.r0},           {"zeta", zeta},     {"zeta_rule", p.zeta.to_json()},
                      {"methods", method_names(p.methods)},       {"wnll_mu", p.wnll_mu > 0 ? p.wnll_mu : default_wnll_mu(cloud)},
                      {"tol", p.cg.tol},      {"max_iter", p.cg.max_iter}};
    rep.seeds = Json{{"master", p.seed}};
    rep.metrics["nodes"] = cloud.size();
    rep.metrics["dropped_nodes"] = prepared.dropped_nodes;
    rep.metrics["mean_degree"] = static_cast<double>(g.nnz()) / static_cast<double>(std::max<std::size_t>(g.n, 1));
    rep.field_cloud = cloud;

    SolveOptions options;
    options.cg = p.cg;
    for (Method m : p.methods) {
        auto res = solve(m, g, ew, cloud, WnllParams{p.wnll_mu}, options);
        Json mj = field_stats_json(field_stats(cloud, res.u.values, p.near_tol));
        mj["solve"] = solve_report_json(res.report);
        rep.metrics[method_name(m)] = mj;
        rep.field.push_back({method_name(m), std::move(res.u.values)});
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Decision boundaries in 2D

struct DecisionBoundaryParams {
    std::size_t n = 20000;
    std::size_t trials = 25;
    std::uint64_t seed = 1;
    double eps = 0.0; // 0: 3 / sqrt(n)
    KernelProfile kernel = experiment_kernel();
    double alpha = 5.0;
    double r0 = 1.0;
    ZetaRule zeta{1e6, true};
    std::vector<Method> methods{Method::standard, Method::wnll, Method::pw};
    CgOptions cg{1e-10, 100000, Preconditioner::jacobi};

    double resolved_eps() const { return eps > 0.0 ? eps : 3.0 / std::sqrt(static_cast<double>(n)); }
};

struct BoundaryStats {
    double mean_deviation = 0.0; // mean distance of boundary-adjacent nodes to the line x1 + x2 = 1
    double signed_deviation = 0.0;
    double error_rate = 0.0;     // fraction on the wrong side of that line
    std::vector<NodeIndex> nodes;
};

/// Boundary-adjacent nodes are those with a neighbor on the other side of
/// u = 1/2. Their distance to the perpendicular bisector of the labels
/// (0,0) and (1,1), i.e. |x1 + x2 - 1| / sqrt(2), summarizes the boundary.
inline BoundaryStats boundary_statistics(const SparseGraph& g, const PointCloud& cloud, std::span<const double> u) {
    BoundaryStats s;
    const auto mask = cloud.labeled_mask();
    double sum = 0.0, signed_sum = 0.0, wrong = 0.0, cnt = 0.0;
    for (std::size_t i = 0; i < g.n; ++i) {
        const auto x = cloud.point(i);
        const double offset = (x[0] + x[1] - 1.0) / std::sqrt(2.0);
        if (!mask[i]) {
            cnt += 1;
            const bool predicted_one = u[i] >= 0.5;
            const bool truth_one = x[0] + x[1] > 1.0;
            if (predicted_one != truth_one) wrong += 1;
        }
        const bool side = u[i] >= 0.5;
        bool adjacent = false;
        for (std::size_t p = g.row_ptr[i]; p < g.row_ptr[i + 1] && !adjacent; ++p)
            adjacent = (u[g.col[p]] >= 0.5) != side;
        if (!adjacent) continue;
        s.nodes.push_back(static_cast<NodeIndex>(i));
        sum += std::abs(offset);
        signed_sum += offset;
    }
    if (!s.nodes.empty()) {
        s.mean_deviation = sum / static_cast<double>(s.nodes.size());
        s.signed_deviation = signed_sum / static_cast<double>(s.nodes.size());
    }
    s.error_rate = cnt > 0 ? wrong / cnt : 0.0;
    return s;
}

inline ExperimentReport run_decision_boundary(const DecisionBoundaryParams& p) {
    if (p.trials == 0) throw ConfigError("trials must be positive");
    ExperimentReport rep;
    rep.name = "decision";
    const double eps = p.resolved_eps();
    const double zeta = p.zeta.resolve(p.n, eps);
    rep.params = Json{{"dim", 2},        {"n", p.n},         {"trials", p.trials}, {"eps", eps},
                      {"graph", kernel_json(p.kernel)},      {"alpha", p.alpha},   {"r0", p.r0},
                      {"zeta", zeta},    {"zeta_rule", p.zeta.to_json()},          {"methods", method_names(p.methods)},
                      {"tol", p.cg.tol}, {"max_iter", p.cg.max_iter}};

    struct TrialResult {
        std::uint64_t seed = 0;
        std::vector<BoundaryStats> stats;
        std::vector<SolveReport> reports;
        std::vector<std::vector<double>> coords;
        PreparedGraph prepared;
        std::vector<std::vector<double>> fields;
    };
    auto results = run_trials<TrialResult>(p.trials, [&](std::size_t t) {
        TrialResult r;
        r.seed = derive_seed(p.seed, t);
        auto spec = synthetic_spec(Generator::uniform_box, 2, p.n, r.seed);
        spec.labels = {{{0.0, 0.0}, 0.0, 0}, {{1.0, 1.0}, 1.0, 1}};
        r.prepared = prepare_eps_graph(generate(spec), eps, p.kernel);
        WeightProfile w;
        w.alpha = p.alpha;
        w.r0 = p.r0;
        w.zeta = zeta;
        const auto ew = attach_energy_weights(r.prepared.graph, r.prepared.cloud, w);
        SolveOptions options;
        options.cg = p.cg;
        for (Method m : p.methods) {
            auto res = solve(m, r.prepared.graph, ew, r.prepared.cloud, {}, options);
            r.stats.push_back(boundary_statistics(r.prepared.graph, r.prepared.cloud, res.u.values));
            r.reports.push_back(res.report);
            r.fields.push_back(std::move(res.u.values));
        }
        return r;
    });

    Json seeds = Json::array();
    for (const auto& r : results) seeds.push_back(r.seed);
    rep.seeds = Json{{"master", p.seed}, {"trials", seeds}};
    for (std::size_t mi = 0; mi < p.methods.size(); ++mi) {
        std::vector<double> dev, err;
        Json per_trial = Json::array();
        for (std::size_t t = 0; t < results.size(); ++t) {
            const auto& s = results[t].stats[mi];
            dev.push_back(s.mean_deviation);
            err.push_back(s.error_rate);
            per_trial.push_back(Json{{"trial", t},
                                     {"boundary_deviation", s.mean_deviation},
                                     {"signed_deviation", s.signed_deviation},
                                     {"boundary_nodes", s.nodes.size()},
                                     {"error_rate", s.error_rate},
                                     {"solve", solve_report_json(results[t].reports[mi])}});
            for (NodeIndex node : s.nodes) {
                const auto x = results[t].prepared.cloud.point(node);
                rep.boundary.push_back({t, method_name(p.methods[mi]), node, {x.begin(), x.end()},
                                        results[t].fields[mi][node]});
            }
        }
        rep.metrics[method_name(p.methods[mi])] = Json{{"mean_boundary_deviation", mean_of(dev)},
                                                       {"boundary_deviation_spread", stddev_of(dev)},
                                                       {"max_boundary_deviation", *std::max_element(dev.begin(), dev.end())},
                                                       {"mean_error_rate", mean_of(err)},
                                                       {"trials", per_trial}};
    }
    rep.field_cloud = results.front().prepared.cloud;
    for (std::size_t mi = 0; mi < p.methods.size(); ++mi)
        rep.field.push_back({method_name(p.methods[mi]), results.front().fields[mi]});
    return rep;
}

// ---------------------------------------------------------------------------
// Low-density strip in 3D

struct StripParams {
    std::size_t n = 20000;
    std::size_t trials = 20;
    std::uint64_t seed = 1;
    double eps = 0.0; // 0: 3 / n^{1/3}
    KernelProfile kernel = experiment_kernel();
    double alpha = 5.0;
    double r0 = 1.0;
    ZetaRule zeta{1e6, true};
    double density_ratio = 0.6;
    std::vector<Method> methods{Method::standard, Method::wnll, Method::pw};
    CgOptions cg{1e-10, 100000, Preconditioner::jacobi};

    double resolved_eps() const { return eps > 0.0 ? eps : 3.0 / std::cbrt(static_cast<double>(n)); }
};

/// Labels g(0, .2, .2) = 0 and g(1, .2, .2) = 1; ground truth is x1 > 1/2.
inline ExperimentReport run_strip(const StripParams& p) {
    if (p.trials == 0) throw ConfigError("trials must be positive");
    ExperimentReport rep;
    rep.name = "strip";
    const double eps = p.resolved_eps();
    const double zeta = p.zeta.resolve(p.n, eps);
    rep.params = Json{{"dim", 3},        {"n", p.n},         {"trials", p.trials},
                      {"eps", eps},      {"graph", kernel_json(p.kernel)},      {"alpha", p.alpha},
                      {"r0", p.r0},      {"zeta", zeta},     {"zeta_rule", p.zeta.to_json()},
                      {"strip", {0.45, 0.55}},               {"density_ratio", p.density_ratio},
                      {"methods", method_names(p.methods)},  {"tol", p.cg.tol}, {"max_iter", p.cg.max_iter}};

    struct TrialResult {
        std::uint64_t seed = 0;
        double degree = 0.0;
        std::size_t dropped = 0;
        std::vector<double> errors;
        std::vector<SolveReport> reports;
        PointCloud cloud;
        std::vector<std::vector<double>> fields;
    };
    auto results = run_trials<TrialResult>(p.trials, [&](std::size_t t) {
        TrialResult r;
        r.seed = derive_seed(p.seed, t);
        auto spec = synthetic_spec(Generator::strip_density, 3, p.n, r.seed);
        spec.density_ratio = p.density_ratio;
        spec.labels = {{{0.0, 0.2, 0.2}, 0.0, 0}, {{1.0, 0.2, 0.2}, 1.0, 1}};
        auto prepared = prepare_eps_graph(generate(spec), eps, p.kernel);
        r.degree = static_cast<double>(prepared.graph.nnz()) / static_cast<double>(prepared.graph.n);
        r.dropped = prepared.dropped_nodes;
        WeightProfile w;
        w.alpha = p.alpha;
        w.r0 = p.r0;
        w.zeta = zeta;
        const auto ew = attach_energy_weights(prepared.graph, prepared.cloud, w);
        std::vector<int> truth(prepared.cloud.size());
        for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = prepared.cloud.point(i)[0] > 0.5 ? 1 : 0;
        const auto mask = prepared.cloud.labeled_mask();
        SolveOptions options;
        options.cg = p.cg;
        for (Method m : p.methods) {
            auto res = solve(m, prepared.graph, ew, prepared.cloud, {}, options);
            double wrong = 0, cnt = 0;
            for (std::size_t i = 0; i < truth.size(); ++i) {
                if (mask[i]) continue;
                cnt += 1;
                if ((res.u.values[i] >= 0.5 ? 1 : 0) != truth[i]) wrong += 1;
            }
            r.errors.push_back(wrong / cnt);
            r.reports.push_back(res.report);
            if (t == 0) r.fields.push_back(std::move(res.u.values));
        }
        if (t == 0) r.cloud = std::move(prepared.cloud);
        return r;
    });

    Json seeds = Json::array();
    std::vector<double> degrees;
    for (const auto& r : results) {
        seeds.push_back(r.seed);
        degrees.push_back(r.degree);
    }
    rep.seeds = Json{{"master", p.seed}, {"trials", seeds}};
    rep.metrics["mean_degree"] = mean_of(degrees);
    for (std::size_t mi = 0; mi < p.methods.size(); ++mi) {
        std::vector<double> err;
        Json per_trial = Json::array();
        for (std::size_t t = 0; t < results.size(); ++t) {
            err.push_back(results[t].errors[mi]);
            per_trial.push_back(Json{{"trial", t},
                                     {"error_rate", results[t].errors[mi]},
                                     {"dropped_nodes", results[t].dropped},
                                     {"solve", solve_report_json(results[t].reports[mi])}});
        }
        rep.metrics[method_name(p.methods[mi])] = Json{{"mean_error_rate", mean_of(err)},
                                                       {"std_error_rate", stddev_of(err)},
                                                       {"max_error_rate", *std::max_element(err.begin(), err.end())},
                                                       {"trials", per_trial}};
    }
    rep.field_cloud = results.front().cloud;
    for (std::size_t mi = 0; mi < p.methods.size(); ++mi)
        rep.field.push_back({method_name(p.methods[mi]), results.front().fields[mi]});
    return rep;
}

} // namespace pwgl
