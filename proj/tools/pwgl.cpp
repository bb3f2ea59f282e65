// pwgl command-line front end.

#include <CLI11.hpp>

#include <pwgl/pwgl.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace pwgl;

namespace {

const std::set<std::string> command_sections{"generate", "graph",    "solve",       "classify", "box",
                                             "decision", "strip",    "radial",      "consistency",
                                             "holder",   "barrier",  "degeneracy",  "mnist"};

struct Globals {
    std::string config;
    std::string out_dir = "out";
    unsigned threads = 0;
    bool deterministic = false;
    bool largest_component = false;
};

/// Flag values collected as strings, merged over the config file.
struct Keys {
    std::map<std::string, std::string> values;

    void add(CLI::App* app, const std::vector<std::string>& keys) {
        for (const auto& k : keys) {
            std::string flag = "--" + k;
            std::replace(flag.begin(), flag.end(), '_', '-');
            app->add_option(flag, values[k], "config key " + k);
        }
    }
};

/// File keys of the matching section (or no section) with flags layered on top.
Config resolve_config(const Globals& g, const std::string& section, const Keys& keys) {
    Config merged;
    if (!g.config.empty()) {
        std::ifstream in(g.config);
        if (!in) throw ConfigError("cannot open config " + g.config);
        std::ostringstream filtered;
        std::string line, current;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string t = line.substr(0, line.find('#'));
            t.erase(0, t.find_first_not_of(" \t\r"));
            t.erase(t.find_last_not_of(" \t\r") + 1);
            if (!t.empty() && t.front() == '[') {
                current = t.size() > 2 ? t.substr(1, t.size() - 2) : "";
                if (!command_sections.count(current))
                    throw ConfigError(g.config + ":" + std::to_string(lineno) + ": unknown section [" + current + "]");
                filtered << "\n";
                continue;
            }
            // keep line numbering; drop sections of other commands
            filtered << ((current.empty() || current == section) ? line : "") << "\n";
        }
        std::istringstream again(filtered.str());
        merged = Config::parse(again, g.config);
    }
    for (const auto& [k, v] : keys.values)
        if (!v.empty()) merged.set(k, v);
    return merged;
}

std::vector<Method> parse_methods(const std::string& text) {
    std::vector<Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse_method(item));
    if (out.empty()) throw ConfigError("methods list is empty");
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& text, const std::string& key) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double v = Config::config_double(item, key);
        if (v < 1 || v != std::floor(v)) throw ConfigError(key + ": expected positive integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

std::string join_methods(const std::vector<Method>& ms) {
    std::string s;
    for (auto m : ms) s += (s.empty() ? "" : ",") + method_name(m);
    return s;
}

KernelProfile read_kernel(Config& cfg, const KernelProfile& fallback) {
    const std::string name = cfg.get("kernel", std::string(fallback.kind == KernelKind::indicator ? "indicator" : "gaussian"));
    const double s = cfg.get("sigma_factor", fallback.sigma_factor);
    const double support = cfg.get("support", fallback.support);
    KernelProfile k = parse_kernel(name, s, support);
    k.normalized = fallback.normalized;
    return k;
}

WeightProfile read_weights(Config& cfg, std::size_t n, double eps) {
    WeightProfile w;
    w.alpha = cfg.get("alpha", w.alpha);
    w.r0 = cfg.get("r0", w.r0);
    const auto zeta = parse_zeta(cfg.get("zeta", std::string("scaled:50")));
    w.zeta = zeta.scaled ? (eps > 0 ? zeta.resolve(n, eps) : throw ConfigError("scaled zeta needs an eps-ball graph")) : zeta.value;
    w.variant = parse_gamma_variant(cfg.get("gamma_variant", std::string("truncated")));
    w.validate();
    return w;
}

CgOptions read_cg(Config& cfg, CgOptions cg) {
    cg.tol = cfg.get("tol", cg.tol);
    cg.max_iter = cfg.get("max_iter", cg.max_iter);
    return cg;
}

Json run_json(const Globals& g, const std::string& command) {
    return Json{{"command", command}, {"deterministic", g.deterministic}};
}

Json weights_json(const WeightProfile& w) {
    Json j{{"alpha", w.alpha}, {"r0", w.r0}, {"zeta", w.zeta}};
    j["gamma_variant"] = w.two_region() ? Json{{"two_region", w.region_radius()}} : Json("truncated");
    return j;
}

// ---------------------------------------------------------------------------

int cmd_generate(const Globals& g, const Keys& keys) {
    Config cfg = resolve_config(g, "generate", keys);
    const std::string spec_name = cfg.get("spec", std::string("box2d"));
    SyntheticSpec spec;
    std::string labels = "two_point";
    if (spec_name == "box2d" || spec_name == "box3d") {
        spec.generator = Generator::uniform_box;
        spec.dim = spec_name == "box2d" ? 2 : 3;
    } else if (spec_name == "strip") {
        spec.generator = Generator::strip_density;
        spec.dim = 3;
        labels = "strip";
    } else if (spec_name == "ball2d" || spec_name == "ball3d") {
        spec.generator = Generator::uniform_ball;
        spec.dim = spec_name == "ball2d" ? 2 : 3;
        labels = "origin";
    } else {
        throw ConfigError("spec: expected box2d, box3d, strip, ball2d or ball3d, got '" + spec_name + "'");
    }
    spec.n = cfg.get("n", std::size_t{1000});
    spec.seed = cfg.get_seed("seed", 1);
    spec.density_ratio = cfg.get("density_ratio", spec.density_ratio);
    labels = cfg.get("labels", labels);
    const std::string out = cfg.get("out", std::string());
    cfg.reject_unknown();

    if (labels == "two_point") spec.labels = two_point_box_labels(spec.dim);
    else if (labels == "diagonal") spec.labels = {{std::vector<double>(spec.dim, 0.0), 0.0, 0}, {std::vector<double>(spec.dim, 1.0), 1.0, 1}};
    else if (labels == "strip") spec.labels = {{{0.0, 0.2, 0.2}, 0.0, 0}, {{1.0, 0.2, 0.2}, 1.0, 1}};
    else if (labels == "origin") spec.labels = {{std::vector<double>(spec.dim, 0.0), 0.0, 0}};
    else if (labels != "none") throw ConfigError("labels: expected none, two_point, diagonal, strip or origin");
    if (labels == "strip" && spec.dim != 3) throw ConfigError("strip labels need d = 3");

    const PointCloud cloud = generate(spec);
    std::ostringstream s;
    save_points_csv(cloud, s);
    if (out.empty()) std::cout << s.str();
    else write_text(out, s.str());
    return 0;
}

struct LoadedProblem {
    PointCloud cloud;
    SparseGraph graph;
    double eps = 0.0;
    std::size_t dropped = 0;
};

LoadedProblem load_problem(const Globals& g, Config& cfg, const KernelProfile& default_kernel) {
    LoadedProblem p;
    const std::string points = cfg.get("points", std::string());
    if (points.empty()) throw ConfigError("--points is required");
    p.cloud = load_points_csv(fs::path(points));
    const std::string graph_file = cfg.get("graph", std::string());
    const std::size_t knn = cfg.get("knn", std::size_t{0});
    const std::size_t sigma_neighbor = cfg.get("sigma_neighbor", std::size_t{20});
    const double eps = parse_eps(cfg.get("eps", std::string("auto")));
    const KernelProfile kernel = read_kernel(cfg, default_kernel);
    if (!graph_file.empty()) {
        std::ifstream in(graph_file);
        if (!in) throw DataError("cannot open " + graph_file);
        p.graph = load_graph(in);
        if (p.graph.n != p.cloud.size()) throw DataError("graph has " + std::to_string(p.graph.n) + " nodes but the cloud has " + std::to_string(p.cloud.size()));
    } else if (knn > 0) {
        p.graph = build_knn_graph(p.cloud, knn, sigma_neighbor);
    } else {
        p.eps = eps > 0 ? eps : 2.0 / std::pow(static_cast<double>(p.cloud.size()), 1.0 / static_cast<double>(p.cloud.dim()));
        p.graph = build_eps_graph(p.cloud, p.eps, kernel);
    }
    if (g.largest_component && p.cloud.label_count() > 0) {
        const auto nodes = label_component_nodes(p.graph, p.cloud.label_indices());
        p.dropped = p.cloud.size() - nodes.size();
        if (p.dropped > 0) {
            std::cerr << "restricting to the labeled component: dropped " << p.dropped << " nodes\n";
            p.graph = induced_subgraph(p.graph, nodes);
            p.cloud = induced_cloud(p.cloud, nodes);
        }
    }
    return p;
}

int cmd_graph(const Globals& g, const Keys& keys) {
    Config cfg = resolve_config(g, "graph", keys);
    const std::string points = cfg.get("points", std::string());
    if (points.empty()) throw ConfigError("--points is required");
    const PointCloud cloud = load_points_csv(fs::path(points));
    const std::size_t knn = cfg.get("knn", std::size_t{0});
    const std::size_t sigma_neighbor = cfg.get("sigma_neighbor", std::size_t{20});
    double eps = parse_eps(cfg.get("eps", std::string("auto")));
    const KernelProfile kernel = read_kernel(cfg, experiment_kernel());
    GraphOptions opts;
    opts.prune_relative = cfg.get("prune", opts.prune_relative);
    const std::string out = cfg.get("out", std::string());
    cfg.reject_unknown();
    SparseGraph graph;
    if (knn > 0) {
        graph = build_knn_graph(cloud, knn, sigma_neighbor, opts);
    } else {
        if (eps == 0.0) eps = 2.0 / std::pow(static_cast<double>(cloud.size()), 1.0 / static_cast<double>(cloud.dim()));
        graph = build_eps_graph(cloud, eps, kernel, opts);
    }
    std::ostringstream s;
    save_graph(graph, s);
    if (out.empty()) std::cout << s.str();
    else write_text(out, s.str());
    std::cerr << "nodes " << graph.n << ", edges " << graph.edge_count() << "\n";
    return 0;
}

int cmd_solve(const Globals& g, const Keys& keys) {
    Config cfg = resolve_config(g, "solve", keys);
    auto problem = load_problem(g, cfg, experiment_kernel());
    const Method method = parse_method(cfg.get("method", std::string("pw")));
    const WeightProfile w = read_weights(cfg, problem.cloud.size(), problem.eps);
    const double mu = cfg.get("mu", 0.0);
    SolveOptions options;
    options.cg = read_cg(cfg, options.cg);
    cfg.reject_unknown();

    const EnergyWeights ew = attach_energy_weights(problem.graph, problem.cloud, w);
    const auto res = solve(method, problem.graph, ew, problem.cloud, WnllParams{mu}, options);
    ExperimentReport rep;
    rep.name = "solve";
    rep.params = Json{{"method", method_name(method)}, {"nodes", problem.cloud.size()}, {"eps", problem.eps},
                      {"weights", weights_json(w)},   {"wnll_mu", method == Method::wnll ? (mu > 0 ? mu : default_wnll_mu(problem.cloud)) : 0.0},
                      {"tol", options.cg.tol},        {"max_iter", options.cg.max_iter}};
    rep.metrics = Json{{"dropped_nodes", problem.dropped}, {"solve", solve_report_json(res.report)}};
    rep.field_cloud = problem.cloud;
    rep.field.push_back({method_name(method), res.u.values});
    write_experiment(g.out_dir, rep, Json{{"run", run_json(g, "solve")}});
    return 0;
}

int cmd_classify(const Globals& g, const Keys& keys) {
    Config cfg = resolve_config(g, "classify", keys);
    auto problem = load_problem(g, cfg, experiment_kernel());
    const Method method = parse_method(cfg.get("method", std::string("pw")));
    const WeightProfile w = read_weights(cfg, problem.cloud.size(), problem.eps);
    const double mu = cfg.get("mu", 0.0);
    const std::string truth_file = cfg.get("truth", std::string());
    std::size_t classes = cfg.get("classes", std::size_t{0});
    SolveOptions options;
    options.cg = read_cg(cfg, options.cg);
    cfg.reject_unknown();

    for (int c : problem.cloud.label_classes()) classes = std::max(classes, static_cast<std::size_t>(std::max(c, 0)) + 1);
    MulticlassTask task{classes, {}};
    const EnergyWeights ew = attach_energy_weights(problem.graph, problem.cloud, w);
    const auto pred = one_vs_rest(problem.graph, ew, problem.cloud, task, method, WnllParams{mu}, options);
    fs::create_directories(g.out_dir);
    std::ostringstream s;
    write_prediction_csv(s, pred);
    write_text(fs::path(g.out_dir) / "predictions.csv", s.str());
    Json summary;
    if (!truth_file.empty()) {
        // one class id per line, in node order (before any component restriction)
        std::ifstream in(truth_file);
        if (!in) throw DataError("cannot open " + truth_file);
        std::vector<int> truth;
        std::string line;
        while (std::getline(in, line))
            if (!detail::trim(line).empty()) truth.push_back(static_cast<int>(detail::parse_int(line, truth_file)));
        if (problem.dropped > 0) throw ConfigError("--truth cannot be combined with a component restriction that drops nodes");
        summary = classification_summary(pred, truth, classes, problem.cloud.labeled_mask());
    } else {
        Json reports = Json::array();
        for (const auto& r : pred.reports) reports.push_back(solve_report_json(r));
        summary["solves"] = reports;
    }
    summary["method"] = method_name(method);
    summary["classes"] = classes;
    summary["run"] = run_json(g, "classify");
    write_json(fs::path(g.out_dir) / "summary.json", summary);
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_experiment(const Globals& g, const std::string& name, const Keys& keys) {
    Config cfg = resolve_config(g, name, keys);
    ExperimentReport rep;
    if (name == "box") {
        TwoPointBoxParams p;
        p.dim = cfg.get("dim", p.dim);
        p.n = cfg.get("n", p.n);
        p.seed = cfg.get_seed("seed", p.seed);
        p.eps = parse_eps(cfg.get("eps", std::string("auto")));
        p.kernel = read_kernel(cfg, p.kernel);
        p.alpha = cfg.get("alpha", p.alpha);
        p.r0 = cfg.get("r0", p.r0);
        p.zeta = parse_zeta(cfg.get("zeta", std::string("scaled:50")));
        p.methods = parse_methods(cfg.get("methods", join_methods(p.methods)));
        p.wnll_mu = cfg.get("mu", p.wnll_mu);
        p.cg = read_cg(cfg, p.cg);
        cfg.reject_unknown();
        rep = run_two_point_box(p);
    } else if (name == "decision") {
        DecisionBoundaryParams p;
        p.n = cfg.get("n", p.n);
        p.trials = cfg.get("trials", p.trials);
        p.seed = cfg.get_seed("seed", p.seed);
        p.eps = parse_eps(cfg.get("eps", std::string("auto")));
        p.kernel = read_kernel(cfg, p.kernel);
        p.alpha = cfg.get("alpha", p.alpha);
        p.r0 = cfg.get("r0", p.r0);
        p.zeta = parse_zeta(cfg.get("zeta", std::string("scaled:1e6")));
        p.methods = parse_methods(cfg.get("methods", join_methods(p.methods)));
        p.cg = read_cg(cfg, p.cg);
        cfg.reject_unknown();
        rep = run_decision_boundary(p);
    } else if (name == "strip") {
        StripParams p;
        p.n = cfg.get("n", p.n);
        p.trials = cfg.get("trials", p.trials);
        p.seed = cfg.get_seed("seed", p.seed);
        p.eps = parse_eps(cfg.get("eps", std::string("auto")));
        p.kernel = read_kernel(cfg, p.kernel);
        p.alpha = cfg.get("alpha", p.alpha);
        p.r0 = cfg.get("r0", p.r0);
        p.zeta = parse_zeta(cfg.get("zeta", std::string("scaled:1e6")));
        p.density_ratio = cfg.get("density_ratio", p.density_ratio);
        p.methods = parse_methods(cfg.get("methods", join_methods(p.methods)));
        p.cg = read_cg(cfg, p.cg);
        cfg.reject_unknown();
        rep = run_strip(p);
    } else {
        throw ConfigError("unknown experiment '" + name + "' (box, decision, strip)");
    }
    write_experiment(g.out_dir, rep, Json{{"run", run_json(g, "experiment " + name)}});
    std::cout << rep.metrics.dump(2) << "\n";
    return 0;
}

int cmd_validate(const Globals& g, const std::string& name, const Keys& keys) {
    Config cfg = resolve_config(g, name, keys);
    Json out;
    out["validation"] = name;
    out["version"] = library_version;
    out["run"] = run_json(g, "validate " + name);
    if (name == "radial") {
        RadialParams p;
        p.dim = cfg.get("dim", p.dim);
        p.n = cfg.get("n", p.n);
        p.seed = cfg.get_seed("seed", p.seed);
        p.alpha = cfg.get("alpha", p.alpha);
        p.eps = parse_eps(cfg.get("eps", std::string("auto")));
        p.ring_width = cfg.get("ring_width", p.ring_width);
        p.bins = cfg.get("bins", p.bins);
        p.kernel = read_kernel(cfg, p.kernel);
        cfg.reject_unknown();
        out["params"] = Json{{"dim", p.dim}, {"n", p.n}, {"seed", p.seed}, {"alpha", p.alpha}, {"eps", p.resolved_eps()},
                             {"bins", p.bins}, {"graph", kernel_json(p.kernel)}};
        out["result"] = radial_oracle_check(p).to_json();
    } else if (name == "consistency") {
        ConsistencyProbe probe;
        ConsistencyParams p;
        const std::string fn = cfg.get("function", std::string("x1_squared"));
        if (fn == "x1_squared") probe.phi = TestFunction::x1_squared();
        else if (fn == "cosine") probe.phi = TestFunction::cosine();
        else if (fn == "linear") probe.phi = TestFunction::linear({1.0, 0.5});
        else throw ConfigError("function: expected x1_squared, cosine or linear");
        p.schedule = parse_size_list(cfg.get("schedule", std::string("5000,10000,20000,40000")), "schedule");
        p.seed = cfg.get_seed("seed", p.seed);
        p.eps = cfg.get("eps", p.eps);
        p.eps_exponent = cfg.get("eps_exponent", p.eps_exponent);
        probe.alpha = cfg.get("alpha", probe.alpha);
        probe.r0 = cfg.get("r0", probe.r0);
        cfg.reject_unknown();
        out["params"] = Json{{"function", probe.phi.name}, {"seed", p.seed}, {"eps", p.eps}, {"eps_exponent", p.eps_exponent},
                             {"alpha", probe.alpha}, {"r0", probe.r0}, {"graph", kernel_json(p.kernel)}};
        out["result"] = consistency_check(probe, p).to_json();
    } else if (name == "holder") {
        HolderParams p;
        p.n = cfg.get("n", p.n);
        p.seed = cfg.get_seed("seed", p.seed);
        p.alpha = cfg.get("alpha", p.alpha);
        p.beta = cfg.get("beta", p.beta);
        p.r0 = cfg.get("r0", p.r0);
        p.zeta = parse_zeta(cfg.get("zeta", std::string("scaled:1e6")));
        cfg.reject_unknown();
        out["params"] = Json{{"n", p.n}, {"seed", p.seed}, {"alpha", p.alpha}, {"beta", p.beta}, {"r0", p.r0}, {"zeta_rule", p.zeta.to_json()}};
        out["result"] = holder_box_probe(p).to_json();
    } else if (name == "barrier") {
        BarrierParams p;
        p.dim = cfg.get("dim", p.dim);
        p.n = cfg.get("n", p.n);
        p.seed = cfg.get_seed("seed", p.seed);
        p.alpha = cfg.get("alpha", p.alpha);
        p.beta = cfg.get("beta", p.beta);
        p.r0 = cfg.get("r0", p.r0);
        p.C = cfg.get("C", p.C);
        p.c = cfg.get("c", p.c);
        p.eps = cfg.get("eps", p.eps);
        cfg.reject_unknown();
        out["params"] = Json{{"dim", p.dim}, {"n", p.n}, {"seed", p.seed}, {"alpha", p.alpha}, {"beta", p.beta},
                             {"r0", p.r0}, {"C", p.C}, {"c", p.c}, {"eps", p.resolved_eps()}};
        out["result"] = barrier_check(p).to_json();
    } else if (name == "degeneracy") {
        DegeneracyParams p;
        p.dim = cfg.get("dim", p.dim);
        p.schedule = parse_size_list(cfg.get("schedule", std::string("5000,20000")), "schedule");
        p.seed = cfg.get_seed("seed", p.seed);
        p.alpha = cfg.get("alpha", p.alpha);
        p.zeta = parse_zeta(cfg.get("zeta", std::string("scaled:50")));
        p.kernel = read_kernel(cfg, p.kernel);
        p.methods = parse_methods(cfg.get("methods", join_methods(p.methods)));
        cfg.reject_unknown();
        out["params"] = Json{{"dim", p.dim}, {"schedule", p.schedule}, {"seed", p.seed}, {"alpha", p.alpha},
                             {"zeta_rule", p.zeta.to_json()}, {"graph", kernel_json(p.kernel)}};
        out["result"] = wnll_degeneracy_probe(p).to_json();
    } else {
        throw ConfigError("unknown validation '" + name + "' (radial, consistency, holder, barrier, degeneracy)");
    }
    write_json(fs::path(g.out_dir) / "report.json", out);
    std::cout << out["result"].dump(2) << "\n";
    return 0;
}

int cmd_mnist(const Globals& g, const Keys& keys) {
    Config cfg = resolve_config(g, "mnist", keys);
    std::string dir = cfg.get("dir", std::string());
    if (dir.empty())
        if (const char* env = std::getenv("PWGL_MNIST_DIR")) dir = env;
    const std::string images = cfg.get("images", std::string());
    const std::string labels = cfg.get("labels", std::string());
    const std::size_t subsample = cfg.get("subsample", std::size_t{0});
    const std::uint64_t subsample_seed = cfg.get_seed("subsample_seed", 1);
    MnistParams p;
    p.labels_per_class = cfg.get("labels_per_class", p.labels_per_class);
    p.trials = cfg.get("trials", p.trials);
    p.seed = cfg.get_seed("seed", p.seed);
    p.k = cfg.get("k", p.k);
    p.sigma_neighbor = cfg.get("sigma_neighbor", p.sigma_neighbor);
    p.alpha = cfg.get("alpha", p.alpha);
    p.r0 = cfg.get("r0", p.r0);
    p.zeta = cfg.get("zeta", p.zeta);
    p.methods = parse_methods(cfg.get("methods", join_methods(p.methods)));
    p.wnll_mu = cfg.get("mu", p.wnll_mu);
    p.cg = read_cg(cfg, p.cg);
    cfg.reject_unknown();

    IdxDataset data;
    if (!images.empty() || !labels.empty()) {
        if (images.empty() || labels.empty()) throw ConfigError("--images and --labels go together");
        data = load_idx(images, labels);
    } else if (!dir.empty()) {
        const auto found = find_mnist_files(dir);
        if (found.empty()) throw DataError("no MNIST IDX files found in " + dir);
        for (const auto& [im, lb] : found) data.append(load_idx(im, lb));
    } else {
        throw ConfigError("give --dir (or PWGL_MNIST_DIR) or --images/--labels");
    }
    if (subsample > 0) data = data.subsample(subsample, subsample_seed);
    const auto rep = mnist_pipeline(data, p);
    Json extra{{"run", run_json(g, "mnist")}};
    extra["params"] = rep.params;
    extra["params"]["subsample"] = subsample;
    extra["params"]["subsample_seed"] = subsample_seed;
    write_experiment(g.out_dir, rep, extra);
    Json brief = Json::object();
    for (auto m : p.methods) brief[method_name(m)] = rep.metrics[method_name(m)];
    std::cout << brief.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Properly weighted graph Laplacian learning"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "key = value config file");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads (0: PWGL_THREADS or 1)");
    app.add_flag("--deterministic", g.deterministic, "single-threaded, reproducible run");
    app.add_flag("--largest-component", g.largest_component, "restrict to the component holding the labels");

    const std::vector<std::string> kernel_keys{"eps", "kernel", "sigma_factor", "support"};
    const std::vector<std::string> weight_keys{"alpha", "r0", "zeta", "gamma_variant", "mu", "tol", "max_iter"};
    auto concat = [](std::vector<std::string> a, const std::vector<std::string>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };

    Keys gen_keys, graph_keys, solve_keys, classify_keys, exp_keys, val_keys, mnist_keys;
    auto* gen = app.add_subcommand("generate", "sample a synthetic point cloud (CSV)");
    gen_keys.add(gen, {"spec", "n", "seed", "labels", "density_ratio", "out"});
    auto* graph = app.add_subcommand("graph", "build an eps-ball or kNN graph");
    graph_keys.add(graph, concat(kernel_keys, {"points", "knn", "sigma_neighbor", "prune", "out"}));
    auto* solv = app.add_subcommand("solve", "solve one labeled problem");
    solve_keys.add(solv, concat(concat(kernel_keys, weight_keys), {"points", "graph", "knn", "sigma_neighbor", "method"}));
    auto* cls = app.add_subcommand("classify", "one-vs-rest classification");
    classify_keys.add(cls, concat(concat(kernel_keys, weight_keys), {"points", "graph", "knn", "sigma_neighbor", "method", "truth", "classes"}));

    std::string exp_name, val_name;
    auto* exp = app.add_subcommand("experiment", "run box, decision or strip");
    exp->add_option("name", exp_name, "experiment name")->required();
    exp_keys.add(exp, concat(concat(kernel_keys, weight_keys), {"dim", "n", "trials", "seed", "methods", "density_ratio"}));
    auto* val = app.add_subcommand("validate", "run radial, consistency, holder, barrier or degeneracy");
    val->add_option("name", val_name, "validation name")->required();
    val_keys.add(val, concat(kernel_keys, {"dim", "n", "seed", "alpha", "beta", "r0", "zeta", "ring_width", "bins",
                                           "function", "schedule", "eps_exponent", "C", "c", "methods"}));
    auto* mn = app.add_subcommand("mnist", "MNIST classification pipeline");
    mnist_keys.add(mn, {"dir", "images", "labels", "subsample", "subsample_seed", "labels_per_class", "trials", "seed", "k",
                        "sigma_neighbor", "alpha", "r0", "zeta", "methods", "mu", "tol", "max_iter"});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code(ErrorKind::config);
    }

    try {
        set_thread_count(g.deterministic ? 1 : g.threads);
        if (gen->parsed()) return cmd_generate(g, gen_keys);
        if (graph->parsed()) return cmd_graph(g, graph_keys);
        if (solv->parsed()) return cmd_solve(g, solve_keys);
        if (cls->parsed()) return cmd_classify(g, classify_keys);
        if (exp->parsed()) return cmd_experiment(g, exp_name, exp_keys);
        if (val->parsed()) return cmd_validate(g, val_name, val_keys);
        if (mn->parsed()) return cmd_mnist(g, mnist_keys);
    } catch (const pwgl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (const auto* se = dynamic_cast<const SolverError*>(&e))
            std::cerr << "residual " << se->residual << " after " << se->history.size() << " recorded iterations\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(ErrorKind::data);
    }
    return 0;
}
