#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "experiments.hpp"
#include "geometry.hpp"
#include "graph.hpp"
#include "kernels.hpp"
#include "laplacian.hpp"
#include "synthetic.hpp"

namespace pwgl {

// ---------------------------------------------------------------------------
// Radial oracle: div(|x|^{-alpha} grad u) = 0 has the solution |x|^{alpha+2-d}

struct RadialParams {
    std::size_t dim = 2;
    std::size_t n = 30000;
    std::uint64_t seed = 1;
    double alpha = 2.0;
    double eps = 0.0;        // 0: 2 / n^{1/d}
    double ring_width = 0.0; // 0: 2 eps
    std::size_t bins = 20;
    double r_lo = 0.1;
    double r_hi = 0.9;
    KernelProfile kernel = KernelProfile::gaussian(0.5, 2.0);
    CgOptions cg{1e-10, 100000, Preconditioner::jacobi};

    double resolved_eps() const { return eps > 0.0 ? eps : 2.0 / std::pow(static_cast<double>(n), 1.0 / static_cast<double>(dim)); }
    double beta() const { return alpha + 2.0 - static_cast<double>(dim); }
};

struct RadialReport {
    double eps = 0.0;
    double r_out = 0.0;
    double beta = 0.0;
    std::vector<double> bin_center, bin_mean, bin_oracle;
    std::vector<std::size_t> bin_count;
    double deviation = 0.0;          // relative L2 against r^beta
    double deviation_rescaled = 0.0; // relative L2 against (r / r_out)^beta
    bool monotone = true;
    SolveReport solve;

    Json to_json() const {
        Json bins = Json::array();
        for (std::size_t b = 0; b < bin_center.size(); ++b)
            bins.push_back(Json{{"r", bin_center[b]}, {"count", bin_count[b]}, {"mean_u", bin_mean[b]}, {"oracle", bin_oracle[b]}});
        return Json{{"eps", eps}, {"r_out", r_out}, {"beta", beta}, {"relative_l2_deviation", deviation},
                    {"relative_l2_deviation_rescaled", deviation_rescaled}, {"monotone", monotone},
                    {"bins", bins}, {"solve", solve_report_json(solve)}};
    }
};

/// Uniform sample of the unit ball with u = 0 at the origin and u = 1 on the
/// ring |x| > 1 - ring_width, solved with gamma(x) = |x|^{-alpha}, compared
/// with r^beta, beta = alpha + 2 - d. The exact solution for a ring at
/// r_out = 1 - ring_width is (r / r_out)^beta; that deviation is reported too.
inline RadialReport radial_oracle_check(const RadialParams& p) {
    if (p.dim < 2) throw ConfigError("radial oracle needs d >= 2");
    if (!(p.alpha > static_cast<double>(p.dim) - 2.0)) throw ConfigError("radial oracle needs alpha > d - 2");
    if (p.bins == 0) throw ConfigError("bin count must be positive");
    RadialReport rep;
    rep.eps = p.resolved_eps();
    rep.beta = p.beta();
    const double width = p.ring_width > 0.0 ? p.ring_width : 2.0 * rep.eps;
    rep.r_out = 1.0 - width;

    auto spec = synthetic_spec(Generator::uniform_ball, p.dim, p.n, p.seed);
    spec.labels = {{std::vector<double>(p.dim, 0.0), 0.0, 0}};
    PointCloud cloud = generate(spec);
    const std::vector<double> origin(p.dim, 0.0);
    std::vector<double> radius(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        radius[i] = distance(cloud.point(i), origin);
        if (i < p.n && radius[i] > rep.r_out) cloud.add_label(static_cast<NodeIndex>(i), 1.0, 1);
    }

    const SparseGraph g = build_eps_graph(cloud, rep.eps, p.kernel);
    WeightProfile w;
    w.alpha = p.alpha;
    w.zeta = std::numeric_limits<double>::infinity();
    w.variant = TwoRegionVariant{0.0};
    const double alpha = p.alpha;
    w.custom_gamma = [alpha](double r) { return r == 0.0 ? std::numeric_limits<double>::infinity() : std::pow(r, -alpha); };
    const EnergyWeights ew = energy_weights_from_distances(g, radius, w);
    SolveOptions options;
    options.cg = p.cg;
    const auto res = solve_pw(g, ew, cloud, options);
    rep.solve = res.report;

    const auto mask = cloud.labeled_mask();
    std::size_t bins = p.bins;
    for (;;) {
        const double h = (p.r_hi - p.r_lo) / static_cast<double>(bins);
        std::vector<double> sum(bins, 0.0);
        std::vector<std::size_t> count(bins, 0);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            if (mask[i] || radius[i] < p.r_lo || radius[i] >= p.r_hi) continue;
            const auto b = std::min(bins - 1, static_cast<std::size_t>((radius[i] - p.r_lo) / h));
            sum[b] += res.u.values[i];
            ++count[b];
        }
        if (bins > 1 && std::find(count.begin(), count.end(), 0u) != count.end()) {
            std::cerr << "warning: empty radial bin, reducing bin count to " << bins / 2 << "\n";
            bins /= 2;
            continue;
        }
        if (count.empty() || count[0] == 0) throw DataError("radial oracle: no nodes in the binning range");
        double num = 0, den = 0, num_raw = 0, den_raw = 0;
        for (std::size_t b = 0; b < bins; ++b) {
            const double r = p.r_lo + (static_cast<double>(b) + 0.5) * h;
            const double m = sum[b] / static_cast<double>(count[b]);
            const double oracle = std::pow(r, rep.beta);
            const double raw = std::pow(r / rep.r_out, rep.beta);
            rep.bin_center.push_back(r);
            rep.bin_mean.push_back(m);
            rep.bin_oracle.push_back(oracle);
            rep.bin_count.push_back(count[b]);
            num += (m - oracle) * (m - oracle);
            den += oracle * oracle;
            num_raw += (m - raw) * (m - raw);
            den_raw += raw * raw;
            if (b > 0 && m < rep.bin_mean[b - 1]) rep.monotone = false;
        }
        rep.deviation = std::sqrt(num / den);
        rep.deviation_rescaled = std::sqrt(num_raw / den_raw);
        break;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Pointwise consistency of the operator

/// Smooth test function with analytic gradient and Hessian (d = 2 or more).
struct TestFunction {
    std::string name;
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> gradient;
    std::function<double(std::span<const double>)> laplacian;

    static TestFunction x1_squared() {
        return {"x1^2", [](std::span<const double> x) { return x[0] * x[0]; },
                [](std::span<const double> x) {
                    std::vector<double> g(x.size(), 0.0);
                    g[0] = 2.0 * x[0];
                    return g;
                },
                [](std::span<const double>) { return 2.0; }};
    }
    static TestFunction linear(std::vector<double> a) {
        return {"linear",
                [a](std::span<const double> x) {
                    double s = 0;
                    for (std::size_t k = 0; k < x.size(); ++k) s += a[k] * x[k];
                    return s;
                },
                [a](std::span<const double>) { return a; }, [](std::span<const double>) { return 0.0; }};
    }
    static TestFunction constant(double c) {
        return {"constant", [c](std::span<const double>) { return c; },
                [](std::span<const double> x) { return std::vector<double>(x.size(), 0.0); },
                [](std::span<const double>) { return 0.0; }};
    }
    static TestFunction cosine() {
        return {"cos(pi x1) cos(pi x2)",
                [](std::span<const double> x) { return std::cos(std::numbers::pi * x[0]) * std::cos(std::numbers::pi * x[1]); },
                [](std::span<const double> x) {
                    const double pi = std::numbers::pi;
                    std::vector<double> g(x.size(), 0.0);
                    g[0] = -pi * std::sin(pi * x[0]) * std::cos(pi * x[1]);
                    g[1] = -pi * std::cos(pi * x[0]) * std::sin(pi * x[1]);
                    return g;
                },
                [](std::span<const double> x) {
                    const double pi = std::numbers::pi;
                    return -2.0 * pi * pi * std::cos(pi * x[0]) * std::cos(pi * x[1]);
                }};
    }
};

/// Largest relative error of the analytic derivatives against central
/// differences with step h: the gradient against differences of the value, the
/// Laplacian against differences of the analytic gradient.
inline double finite_difference_error(const TestFunction& phi, const std::vector<std::vector<double>>& points,
                                      double h = 1e-5) {
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (const auto& x0 : points) {
        std::vector<double> x = x0;
        const auto grad = phi.gradient(x);
        double lap = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] = x0[k] + h;
            const double fp = phi.value(x);
            const double gp = phi.gradient(x)[k];
            x[k] = x0[k] - h;
            const double fm = phi.value(x);
            const double gm = phi.gradient(x)[k];
            x[k] = x0[k];
            worst = std::max(worst, rel((fp - fm) / (2.0 * h), grad[k]));
            lap += (gp - gm) / (2.0 * h);
        }
        worst = std::max(worst, rel(lap, phi.laplacian(x)));
    }
    return worst;
}

struct ConsistencyProbe {
    TestFunction phi = TestFunction::x1_squared();
    std::size_t dim = 2;
    double lo = -0.5; // domain [lo, lo + 1]^d with uniform density
    std::vector<double> label;
    double alpha = 2.0;
    double r0 = 0.1;

    /// Points at which the analytic derivatives are checked before use.
    std::vector<std::vector<double>> check_points() const {
        std::vector<std::vector<double>> pts;
        for (double t : {0.13, 0.37, 0.61, 0.89}) {
            std::vector<double> x(dim);
            for (std::size_t k = 0; k < dim; ++k) x[k] = lo + std::fmod(t * static_cast<double>(k + 1), 1.0);
            pts.push_back(x);
        }
        return pts;
    }
};

struct ConsistencyParams {
    std::vector<std::size_t> schedule{5000, 10000, 20000, 40000};
    std::uint64_t seed = 1;
    double eps = 0.16;          // at n = reference_n
    double eps_exponent = 0.0;  // eps(n) = eps (n / reference_n)^{-eps_exponent}
    double reference_n = 40000;
    KernelProfile kernel = KernelProfile::gaussian(0.5, 2.0, true);

    double resolved_eps(std::size_t n) const {
        return eps * std::pow(static_cast<double>(n) / reference_n, -eps_exponent);
    }
};

struct ConsistencyRow {
    std::size_t n = 0;
    double eps = 0.0;
    std::size_t masked = 0;
    double max_deviation = 0.0;
    double max_target = 0.0; // max |sigma/2 Delta phi| over the mask
    double relative() const { return max_target > 0.0 ? max_deviation / max_target : max_deviation; }
};

struct ConsistencyReport {
    std::string function;
    double sigma_eta = 0.0;
    double derivative_check = 0.0;
    std::vector<ConsistencyRow> rows;

    Json to_json() const {
        Json r = Json::array();
        for (const auto& row : rows)
            r.push_back(Json{{"n", row.n}, {"eps", row.eps}, {"masked_nodes", row.masked},
                             {"max_deviation", row.max_deviation}, {"max_target", row.max_target},
                             {"relative_deviation", row.relative()}});
        return Json{{"function", function}, {"sigma_eta", sigma_eta}, {"derivative_check", derivative_check}, {"rows", r}};
    }
};

/// Evaluates L phi at nodes with dist(x, labels) > 2 eps and dist(x, boundary) > 2 eps
/// and compares it with (sigma_eta / 2) rho^{-1} div(gamma rho^2 grad phi) for rho = 1,
/// i.e. (sigma_eta / 2)(gamma Laplacian(phi) + grad gamma . grad phi).
inline ConsistencyReport consistency_check(const ConsistencyProbe& probe, const ConsistencyParams& p) {
    const std::size_t d = probe.dim;
    ConsistencyReport rep;
    rep.function = probe.phi.name;
    rep.derivative_check = finite_difference_error(probe.phi, probe.check_points());
    if (!(rep.derivative_check < 1e-6)) throw DataError("test function derivatives disagree with finite differences");
    rep.sigma_eta = kernel_moments(p.kernel, d).sigma_eta;
    std::vector<double> label = probe.label;
    if (label.empty()) label.assign(d, probe.lo);
    if (label.size() != d) throw ConfigError("label has the wrong dimension");

    WeightProfile w;
    w.alpha = probe.alpha;
    w.r0 = probe.r0;
    w.zeta = std::numeric_limits<double>::infinity();
    w.variant = TwoRegionVariant{0.0};

    for (std::size_t idx = 0; idx < p.schedule.size(); ++idx) {
        const std::size_t n = p.schedule[idx];
        ConsistencyRow row;
        row.n = n;
        row.eps = p.resolved_eps(n);
        auto spec = synthetic_spec(Generator::uniform_box, d, n, derive_seed(p.seed, idx));
        PointCloud unit = generate(spec);
        PointCloud cloud(d);
        std::vector<double> x(d);
        for (std::size_t i = 0; i < unit.size(); ++i) {
            for (std::size_t k = 0; k < d; ++k) x[k] = unit.point(i)[k] + probe.lo;
            cloud.add_point(x);
        }
        cloud.append_labeled(label, 0.0, 0);
        // operator rows on masked nodes only
        const KdTree tree(cloud);
        const auto node_gamma = [&] {
            std::vector<double> gam(cloud.size());
            for (std::size_t i = 0; i < cloud.size(); ++i) gam[i] = gamma_zeta(w, distance(cloud.point(i), label));
            return gam;
        }();
        const double scale = 1.0 / (2.0 * static_cast<double>(cloud.size()) * row.eps * row.eps);
        auto operator_at = [&](std::size_t i) {
            const auto xi = cloud.point(i);
            const double fi = probe.phi.value(xi);
            double s = 0.0;
            for (NodeIndex j : tree.range_query(xi, p.kernel.support_radius() * row.eps)) {
                if (j == i) continue;
                const double wij = eta_eps_at(p.kernel, distance(xi, cloud.point(j)), d, row.eps);
                s += (node_gamma[i] + node_gamma[j]) * wij * (probe.phi.value(cloud.point(j)) - fi);
            }
            return scale * s;
        };

        const double margin = p.kernel.support_radius() * row.eps;
        for (std::size_t i = 0; i < n; ++i) {
            const auto xi = cloud.point(i);
            const double dl = distance(xi, label);
            if (dl <= margin) continue;
            bool inside = true;
            for (std::size_t k = 0; k < d && inside; ++k)
                inside = xi[k] - probe.lo > margin && probe.lo + 1.0 - xi[k] > margin;
            if (!inside) continue;
            ++row.masked;
            // gamma = 1 + (r0/r)^alpha, grad gamma = -alpha r0^alpha r^{-alpha-2} (x - z)
            const double gam = gamma(w, dl);
            const auto grad = probe.phi.gradient(xi);
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += (xi[k] - label[k]) * grad[k];
            const double grad_gamma_dot = -probe.alpha * std::pow(probe.r0, probe.alpha) * std::pow(dl, -probe.alpha - 2.0) * dot;
            const double target = 0.5 * rep.sigma_eta * (gam * probe.phi.laplacian(xi) + grad_gamma_dot);
            const double discrete = operator_at(i);
            row.max_deviation = std::max(row.max_deviation, std::abs(discrete - target));
            row.max_target = std::max(row.max_target, std::abs(target));
        }
        if (row.masked == 0) throw DataError("consistency check: evaluation mask is empty");
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Hoelder envelope around a label

struct HolderReport {
    std::vector<double> radius;
    std::vector<double> envelope;
    std::vector<std::size_t> count;
    double slope = 0.0;
    bool constant = false;

    Json to_json() const {
        Json rows = Json::array();
        for (std::size_t j = 0; j < radius.size(); ++j)
            rows.push_back(Json{{"r", radius[j]}, {"M", envelope[j]}, {"nodes", count[j]}});
        return Json{{"slope", slope}, {"constant", constant}, {"radii", rows}};
    }
};

/// M(r) = max over nodes in B(z, r) of |u - g(z)| on dyadic radii from R/4 down
/// to 4 eps, and the least-squares slope of log M against log r.
inline HolderReport holder_probe(std::span<const double> u, const PointCloud& cloud, std::size_t label_k,
                                 double eps, double beta, double min_nodes = 5) {
    if (label_k >= cloud.label_count()) throw ConfigError("holder probe: label index out of range");
    if (!(beta > 0.0)) throw ConfigError("holder probe: beta must be positive");
    const NodeIndex z = cloud.label_indices()[label_k];
    const double gz = cloud.label_values()[label_k];
    const double R = min_label_separation(cloud);
    const double r_hi = std::isinf(R) ? 0.25 : R / 4.0;
    const double r_lo = 4.0 * eps;
    if (!(r_hi > r_lo)) throw ConfigError("holder probe: resolvable range [4 eps, R/4] is empty");

    std::vector<std::pair<double, double>> dist_dev(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        dist_dev[i] = {distance(cloud.point(i), cloud.point(z)), std::abs(u[i] - gz)};
    std::sort(dist_dev.begin(), dist_dev.end());

    HolderReport rep;
    std::vector<double> radii;
    for (double r = r_hi; r >= r_lo; r /= 2.0) radii.push_back(r);
    std::reverse(radii.begin(), radii.end());
    std::size_t pos = 0;
    double running = 0.0;
    for (double r : radii) {
        while (pos < dist_dev.size() && dist_dev[pos].first <= r) running = std::max(running, dist_dev[pos++].second);
        if (static_cast<double>(pos) < min_nodes) {
            std::cerr << "warning: fewer than " << min_nodes << " nodes within r = " << r << ", shrinking range\n";
            continue;
        }
        rep.radius.push_back(r);
        rep.envelope.push_back(running);
        rep.count.push_back(pos);
    }
    if (std::all_of(rep.envelope.begin(), rep.envelope.end(), [](double m) { return m == 0.0; })) {
        rep.constant = true;
        return rep;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0, m = 0;
    for (std::size_t j = 0; j < rep.radius.size(); ++j) {
        if (rep.envelope[j] <= 0.0) continue;
        const double lx = std::log(rep.radius[j]), ly = std::log(rep.envelope[j]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        m += 1;
    }
    if (m >= 2) rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return rep;
}

struct HolderParams {
    std::size_t n = 20000;
    std::uint64_t seed = 1;
    double alpha = 4.0;
    double beta = 1.0;
    double r0 = 1.0;
    ZetaRule zeta{1e6, true};
    KernelProfile kernel = experiment_kernel();
};

/// Two-point box (d = 2) solved with pw, probed around the label at (0, 1/2).
inline HolderReport holder_box_probe(const HolderParams& p) {
    TwoPointBoxParams box;
    box.n = p.n;
    box.seed = p.seed;
    box.alpha = p.alpha;
    box.r0 = p.r0;
    box.zeta = p.zeta;
    box.kernel = p.kernel;
    box.methods = {Method::pw};
    const auto rep = run_two_point_box(box);
    return holder_probe(rep.field.front().values, rep.field_cloud, 0, box.resolved_eps(), p.beta);
}

// ---------------------------------------------------------------------------
// Barrier: L |x - y|^beta < 0 near a label

struct BarrierParams {
    std::size_t dim = 2;
    std::size_t n = 40000;
    std::uint64_t seed = 1;
    double alpha = 4.0;
    double beta = 1.0;
    double r0 = 1.0;
    double C = 4.0;
    double c = 0.2;
    double eps = 0.03;
    KernelProfile kernel = KernelProfile::gaussian(0.5, 2.0, true);

    double resolved_eps() const {
        if (!(eps > 0.0)) throw ConfigError("barrier eps must be positive");
        return eps;
    }
};

struct BarrierReport {
    double eps = 0.0;
    std::size_t annulus = 0;
    std::size_t violations = 0;
    double max_value = -std::numeric_limits<double>::infinity();
    double fraction() const { return annulus ? static_cast<double>(violations) / static_cast<double>(annulus) : 0.0; }

    Json to_json() const {
        return Json{{"eps", eps}, {"annulus_nodes", annulus}, {"violations", violations},
                    {"violation_fraction", fraction()}, {"max_L_phi", max_value}};
    }
};

/// Uniform box with one label y at the center; counts nodes with
/// C eps < |x - y| <= c where L phi >= 0 for phi = |x - y|^beta.
inline BarrierReport barrier_check(const BarrierParams& p) {
    if (!(p.beta >= 0.0)) throw ConfigError("barrier beta must be nonnegative");
    BarrierReport rep;
    rep.eps = p.resolved_eps();
    auto spec = synthetic_spec(Generator::uniform_box, p.dim, p.n, p.seed);
    spec.labels = {{std::vector<double>(p.dim, 0.5), 0.0, 0}};
    const PointCloud cloud = generate(spec);
    GraphOptions go;
    go.prune_relative = 0.0;
    const SparseGraph g = build_eps_graph(cloud, rep.eps, p.kernel, go);
    WeightProfile w;
    w.alpha = p.alpha;
    w.r0 = p.r0;
    w.zeta = std::numeric_limits<double>::infinity();
    w.variant = TwoRegionVariant{0.0};
    const EnergyWeights ew = attach_energy_weights(g, cloud, w);
    const auto y = cloud.point(cloud.label_indices()[0]);
    std::vector<double> phi(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) phi[i] = p.beta == 0.0 ? 1.0 : std::pow(distance(cloud.point(i), y), p.beta);
    for (std::size_t i = 0; i < p.n; ++i) {
        const double r = distance(cloud.point(i), y);
        if (!(r > p.C * rep.eps && r <= p.c)) continue;
        ++rep.annulus;
        const double v = apply_laplacian(g, ew, phi, i);
        rep.max_value = std::max(rep.max_value, v);
        if (v >= 0.0 && p.beta > 0.0) ++rep.violations;
    }
    if (rep.annulus == 0) throw DataError("barrier check: annulus C eps < |x - y| <= c holds no nodes");
    return rep;
}

// ---------------------------------------------------------------------------
// Degeneracy of the unweighted methods as n grows

struct DegeneracyParams {
    std::size_t dim = 3;
    std::vector<std::size_t> schedule{5000, 20000};
    std::uint64_t seed = 1;
    std::vector<Method> methods{Method::wnll, Method::pw, Method::standard};
    KernelProfile kernel = KernelProfile::gaussian(0.5, 2.0);
    double alpha = 2.0;
    ZetaRule zeta{50.0, true};
};

struct DegeneracyReport {
    std::vector<std::size_t> schedule;
    std::vector<Method> methods;
    std::vector<std::vector<double>> spread; // spread[method][schedule index]

    /// spread at the first n divided by spread at the last n
    double shrink_factor(Method m) const {
        for (std::size_t k = 0; k < methods.size(); ++k)
            if (methods[k] == m) return spread[k].front() / spread[k].back();
        throw ConfigError("method not part of the degeneracy probe");
    }
    Json to_json() const {
        Json j = Json::object();
        for (std::size_t k = 0; k < methods.size(); ++k) {
            Json rows = Json::array();
            for (std::size_t s = 0; s < schedule.size(); ++s) rows.push_back(Json{{"n", schedule[s]}, {"std_unlabeled", spread[k][s]}});
            j[method_name(methods[k])] = Json{{"rows", rows}, {"shrink_factor", spread[k].front() / spread[k].back()}};
        }
        return j;
    }
};

inline DegeneracyReport wnll_degeneracy_probe(const DegeneracyParams& p) {
    if (p.schedule.size() < 2) throw ConfigError("degeneracy probe needs at least two sample sizes");
    DegeneracyReport rep;
    rep.schedule = p.schedule;
    rep.methods = p.methods;
    rep.spread.assign(p.methods.size(), std::vector<double>(p.schedule.size(), 0.0));
    for (std::size_t s = 0; s < p.schedule.size(); ++s) {
        TwoPointBoxParams box;
        box.dim = p.dim;
        box.n = p.schedule[s];
        box.seed = derive_seed(p.seed, s);
        box.kernel = p.kernel;
        box.alpha = p.alpha;
        box.zeta = p.zeta;
        box.methods = p.methods;
        const auto r = run_two_point_box(box);
        for (std::size_t k = 0; k < p.methods.size(); ++k)
            rep.spread[k][s] = r.metrics[method_name(p.methods[k])]["std_unlabeled"].get<double>();
    }
    return rep;
}

} // namespace pwgl
