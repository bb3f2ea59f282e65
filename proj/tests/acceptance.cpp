// Acceptance run: one PASS/FAIL/SKIP line per criterion.
//
// Exit status is nonzero only for unexpected failures. A failure marked known
// (see README, "Known failures") still prints FAIL.

#include <pwgl/dense.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "support.hpp"

using namespace pwgl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    enum { pass, fail, skip } status = fail;
    std::string detail;
    bool known = false;
};

Outcome verdict(bool ok, std::string detail) { return {ok ? Outcome::pass : Outcome::fail, std::move(detail)}; }

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_inf(const std::vector<double>& u, const std::vector<double>& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        num = std::max(num, std::abs(u[i] - ref[i]));
        den = std::max(den, std::abs(ref[i]));
    }
    return den > 0.0 ? num / den : num;
}

SolveOptions tight() {
    SolveOptions o;
    o.cg.tol = 1e-13;
    o.cg.max_iter = 100000;
    return o;
}

// ---------------------------------------------------------------------------

Outcome oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 50; ++trial) {
        CounterRng rng(derive_seed(101, trial));
        const std::size_t n = 20 + rng.below(181);
        const auto g = fixture::random_graph(n, rng.uniform(0.02, 0.2), rng());
        PointCloud cloud = fixture::random_cloud(n, 2, rng());
        fixture::random_labels(cloud, 1 + rng.below(std::min<std::size_t>(n / 4, 15)), rng());
        EnergyWeights ew = uniform_energy_weights(g);
        for (auto& x : ew.node_gamma) x = rng.uniform(1.0, 100.0);
        const auto o = tight();
        worst = std::max(worst, rel_inf(solve_pw(g, ew, cloud, o).u.values, dense_reference_solve(Method::pw, g, cloud, &ew)));
        worst = std::max(worst, rel_inf(solve_standard(g, cloud, o).u.values, dense_reference_solve(Method::standard, g, cloud)));
        worst = std::max(worst, rel_inf(solve_wnll(g, cloud, {}, o).u.values, dense_reference_solve(Method::wnll, g, cloud)));
    }
    const double t = seconds_since(t0);
    return verdict(worst < 1e-8 && t < 10.0, "max relative Linf " + fmt(worst) + ", " + fmt(t, 3) + " s");
}

Outcome maximum_principle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t violations = 0, solves = 0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        CounterRng rng(derive_seed(202, trial));
        const std::size_t d = 1 + rng.below(3);
        const std::size_t n = 200 + rng.below(301);
        PointCloud cloud = fixture::random_cloud(n, d, rng());
        fixture::random_labels(cloud, 2 + rng.below(8), rng());
        const double eps = 2.0 * std::pow(std::log(static_cast<double>(n)) / static_cast<double>(n), 1.0 / static_cast<double>(d));
        auto prepared = prepare_eps_graph(cloud, eps, KernelProfile::gaussian(0.5, 2.0));
        WeightProfile w;
        w.alpha = rng.uniform(0.0, 6.0);
        w.r0 = rng.uniform(0.05, 1.0);
        w.zeta = std::exp(rng.uniform(std::log(2.0), std::log(1e6)));
        const auto ew = attach_energy_weights(prepared.graph, prepared.cloud, w);
        const auto& v = prepared.cloud.label_values();
        const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
        const double slack = 1e-8 * (hi - lo);
        for (Method m : {Method::pw, Method::standard, Method::wnll}) {
            const auto r = solve(m, prepared.graph, ew, prepared.cloud, {}, tight());
            ++solves;
            for (double x : r.u.values)
                if (x < lo - slack || x > hi + slack) ++violations;
        }
    }
    const double t = seconds_since(t0);
    return verdict(violations == 0 && t < 60.0,
                   std::to_string(solves) + " solves, " + std::to_string(violations) + " violations, " + fmt(t, 3) + " s");
}

Outcome energy_identity() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        CounterRng rng(derive_seed(303, trial));
        const std::size_t n = 50 + rng.below(251);
        PointCloud cloud = fixture::random_cloud(n, 2, rng());
        fixture::random_labels(cloud, 1 + rng.below(5), rng());
        const auto g = build_eps_graph(cloud, rng.uniform(0.05, 0.2), KernelProfile::gaussian(0.5, 2.0));
        WeightProfile w;
        w.alpha = rng.uniform(0.0, 6.0);
        w.zeta = rng.uniform(2.0, 1e6);
        const auto ew = attach_energy_weights(g, cloud, w);
        std::vector<double> u(n);
        for (auto& x : u) x = rng.normal();
        const double a = dirichlet_energy_one_sided(g, ew, u), b = dirichlet_energy(g, ew, u);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
    }
    const double t = seconds_since(t0);
    return verdict(worst < 1e-12 && t < 5.0, "max relative difference " + fmt(worst) + ", " + fmt(t, 3) + " s");
}

Outcome degeneracy_contrast() {
    const auto t0 = std::chrono::steady_clock::now();
    TwoPointBoxParams p; // n = 2e4, d = 2, eps = 2/sqrt(n), sigma = eps/2, alpha 2, zeta 50 n eps^2
    p.methods = {Method::standard, Method::pw};
    const auto j = run_two_point_box(p).to_json();
    const double near = j["metrics"]["standard"]["near_half_fraction"].get<double>();
    const double corr = j["metrics"]["pw"]["corr_u_x1"].get<double>();
    const double range = j["metrics"]["pw"]["range"].get<double>();
    const double t = seconds_since(t0);
    const bool std_ok = near >= 0.9, pw_ok = corr > 0.9 && range > 0.8;
    auto o = verdict(std_ok && pw_ok && t < 120.0,
                   "standard near-half fraction " + fmt(near) + (std_ok ? " (>= 0.9)" : " (needs >= 0.9)") +
                       "; pw corr " + fmt(corr) + ", range " + fmt(range) + (pw_ok ? " (ok)" : " (needs > 0.9, > 0.8)") +
                       "; " + fmt(t, 3) + " s");
    // only the standard-Laplacian half is a known shortfall
    o.known = !std_ok && pw_ok && t < 120.0;
    return o;
}

Outcome strip_classification() {
    const auto t0 = std::chrono::steady_clock::now();
    StripParams p;
    p.trials = 10;
    p.methods = {Method::standard, Method::pw};
    const auto j = run_strip(p).to_json();
    const double pw = j["metrics"]["pw"]["mean_error_rate"].get<double>();
    const double st = j["metrics"]["standard"]["mean_error_rate"].get<double>();
    const double t = seconds_since(t0);
    return verdict(pw < 0.02 && st > 0.25 && t < 900.0,
                   "pw mean error " + fmt(pw) + " (< 0.02), standard " + fmt(st) + " (> 0.25), " + fmt(t, 3) + " s");
}

Outcome radial_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = radial_oracle_check(RadialParams{});
    const double t = seconds_since(t0);
    return verdict(rep.deviation < 0.10 && t < 180.0,
                   "relative L2 deviation from r^2 " + fmt(rep.deviation) + " (< 0.10), " + fmt(t, 3) + " s");
}

Outcome pointwise_consistency() {
    const auto t0 = std::chrono::steady_clock::now();
    ConsistencyParams p;
    p.schedule = {10000, 20000, 40000};
    const auto rep = consistency_check(ConsistencyProbe{}, p);
    const double first = rep.rows.front().relative(), last = rep.rows.back().relative();
    const double t = seconds_since(t0);
    return verdict(last < 0.15 && last < first && t < 180.0,
                   "relative deviation " + fmt(first) + " at n=1e4, " + fmt(last) + " at n=4e4 (< 0.15, decreasing), " +
                       fmt(t, 3) + " s");
}

Outcome degeneracy_probe() {
    const auto t0 = std::chrono::steady_clock::now();
    DegeneracyParams p;
    p.methods = {Method::wnll, Method::pw};
    const auto rep = wnll_degeneracy_probe(p);
    const double wn = rep.shrink_factor(Method::wnll), pw = rep.shrink_factor(Method::pw);
    const double t = seconds_since(t0);
    return verdict(wn >= 1.3 && pw >= 0.8 && pw <= 1.25 && t < 300.0,
                   "wnll spread shrink " + fmt(wn) + " (>= 1.3), pw " + fmt(pw) + " (in [0.8, 1.25]), " + fmt(t, 3) + " s");
}

Outcome mnist() {
    const char* dir = std::getenv("PWGL_MNIST_DIR");
    if (!dir) return {Outcome::skip, "dataset not available (set PWGL_MNIST_DIR)"};
    const auto files = find_mnist_files(dir);
    if (files.empty()) return {Outcome::skip, std::string("no IDX files in ") + dir};
    IdxDataset data;
    for (const auto& [im, lb] : files) data.append(load_idx(im, lb));
    const bool full = std::getenv("PWGL_MNIST_FULL") != nullptr && data.size() == 70000;
    MnistParams p;
    if (full) {
        p.labels_per_class = 10;
        const auto j100 = mnist_pipeline(data, p).to_json();
        p.labels_per_class = 1;
        const auto j10 = mnist_pipeline(data, p).to_json();
        const double pw100 = 100.0 * j100["metrics"]["pw"]["mean_accuracy"].get<double>();
        const double st10 = 100.0 * j10["metrics"]["standard"]["mean_accuracy"].get<double>();
        const double pw10 = 100.0 * j10["metrics"]["pw"]["mean_accuracy"].get<double>();
        const bool ok = std::abs(pw100 - 90.9) <= 3.0 && std::abs(st10 - 14.2) <= 8.0 && std::abs(pw10 - 68.0) <= 8.0;
        return verdict(ok, "full: pw@100 " + fmt(pw100) + "%, standard@10 " + fmt(st10) + "%, pw@10 " + fmt(pw10) + "%");
    }
    if (data.size() < 10000) return {Outcome::skip, "fewer than 10^4 images available"};
    data = data.subsample(10000, 1);
    p.labels_per_class = 10;
    const auto j = mnist_pipeline(data, p).to_json();
    const double pw = 100.0 * j["metrics"]["pw"]["mean_accuracy"].get<double>();
    const double wn = 100.0 * j["metrics"]["wnll"]["mean_accuracy"].get<double>();
    const double st = 100.0 * j["metrics"]["standard"]["mean_accuracy"].get<double>();
    const bool ok = std::abs(pw - wn) <= 5.0 && std::min(pw, wn) >= st + 10.0;
    return verdict(ok, "desk scale (10^4 images, 100 labels): pw " + fmt(pw) + "%, wnll " + fmt(wn) + "%, standard " +
                           fmt(st) + "%");
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const auto base = fs::temp_directory_path() / "pwgl_acceptance_determinism";
    fs::remove_all(base);
    set_thread_count(1);
    bool ok = true;
    std::string detail;
    for (const std::string name : {"box", "strip"}) {
        for (int run = 0; run < 2; ++run) {
            ExperimentReport rep;
            if (name == "box") {
                rep = run_two_point_box(TwoPointBoxParams{});
            } else {
                StripParams p;
                p.trials = 2;
                rep = run_strip(p);
            }
            write_experiment(base / name / std::to_string(run), rep);
        }
        const auto a = Json::parse(read_bytes(base / name / "0" / "report.json"));
        const auto b = Json::parse(read_bytes(base / name / "1" / "report.json"));
        const bool same_report = strip_timing(a).dump(2) == strip_timing(b).dump(2);
        const bool same_field = read_bytes(base / name / "0" / "field.csv") == read_bytes(base / name / "1" / "field.csv");
        ok = ok && same_report && same_field;
        detail += name + (same_report && same_field ? " identical; " : " differs; ");
    }
    set_thread_count(0);
    fs::remove_all(base);
    return verdict(ok, detail + "report.json without timing and field.csv compared byte for byte");
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"solver oracle equivalence", oracle_equivalence},
        {"maximum principle", maximum_principle},
        {"symmetric energy identity", energy_identity},
        {"degeneracy contrast", degeneracy_contrast},
        {"strip classification", strip_classification},
        {"radial profile oracle", radial_oracle},
        {"pointwise consistency", pointwise_consistency},
        {"wnll degeneracy probe", degeneracy_probe},
        {"mnist", mnist},
        {"determinism", determinism},
    };
    int unexpected = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {Outcome::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Outcome::pass ? "PASS" : o.status == Outcome::skip ? "SKIP" : "FAIL";
        std::cout << tag << " " << id << " " << criteria[k].first << ": " << o.detail;
        if (o.status == Outcome::fail && o.known) std::cout << " [known failure, see README]";
        std::cout << std::endl;
        if (o.status == Outcome::fail && !o.known) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
