#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"

namespace fs = std::filesystem;
using namespace pwgl;

namespace {

const fs::path work = fs::temp_directory_path() / "pwgl_cli_tests";

int run(const std::string& args) {
    const std::string cmd = std::string(PWGL_CLI_PATH) + " " + args + " > " + (work / "stdout.txt").string() + " 2> " +
                            (work / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Scratch {
    Scratch() {
        fs::remove_all(work);
        fs::create_directories(work);
    }
    ~Scratch() { fs::remove_all(work); }
};

} // namespace

TEST_CASE("generate is deterministic", "[cli]") {
    Scratch s;
    REQUIRE(run("generate --spec box2d --n 200 --seed 3 --out " + (work / "a.csv").string()) == 0);
    REQUIRE(run("generate --spec box2d --n 200 --seed 3 --out " + (work / "b.csv").string()) == 0);
    const auto a = slurp(work / "a.csv");
    CHECK(a == slurp(work / "b.csv"));
    const auto cloud = load_points_csv(work / "a.csv");
    CHECK(cloud.size() == 202);
    CHECK(cloud.label_count() == 2);
    REQUIRE(run("generate --spec box2d --n 200 --seed 4 --out " + (work / "c.csv").string()) == 0);
    CHECK(a != slurp(work / "c.csv"));
}

TEST_CASE("solve on a three-node path", "[cli]") {
    Scratch s;
    std::ofstream(work / "p.csv") << "x_1,label_class,label_value\n0,0,0\n0.5,-1,\n1,1,1\n";
    REQUIRE(run("--out-dir " + (work / "out").string() + " solve --points " + (work / "p.csv").string() +
                " --kernel indicator --eps 0.6 --method standard") == 0);
    const auto field = slurp(work / "out" / "field.csv");
    CHECK(field == "node,x_1,u_standard\n0,0,0\n1,0.5,0.5\n2,1,1\n");
    const auto report = Json::parse(slurp(work / "out" / "report.json"));
    CHECK(report["params"]["method"] == "standard");

    REQUIRE(run("--out-dir " + (work / "pw").string() + " solve --points " + (work / "p.csv").string() +
                " --kernel indicator --eps 0.6 --zeta 100") == 0);
    CHECK(slurp(work / "pw" / "field.csv") == "node,x_1,u_pw\n0,0,0\n1,0.5,0.5\n2,1,1\n");
}

TEST_CASE("graph then solve from a stored graph", "[cli]") {
    Scratch s;
    REQUIRE(run("generate --spec box2d --n 300 --seed 1 --out " + (work / "p.csv").string()) == 0);
    REQUIRE(run("graph --points " + (work / "p.csv").string() + " --eps 0.15 --out " + (work / "g.txt").string()) == 0);
    REQUIRE(run("--out-dir " + (work / "o").string() + " solve --points " + (work / "p.csv").string() + " --graph " +
                (work / "g.txt").string() + " --zeta 1000") == 0);
    CHECK(fs::exists(work / "o" / "field.csv"));
}

TEST_CASE("classify writes predictions and a summary", "[cli]") {
    Scratch s;
    std::ofstream pts(work / "p.csv");
    std::ofstream truth(work / "t.txt");
    pts << "x_1,x_2,label_class\n";
    for (int i = 0; i < 40; ++i) {
        const int c = i < 20 ? 0 : 1;
        pts << (c * 5 + 0.05 * (i % 20)) << ',' << (0.03 * ((i * 7) % 20)) << ',' << ((i % 20) == 0 ? c : -1) << '\n';
        truth << c << '\n';
    }
    pts.close();
    truth.close();
    REQUIRE(run("--out-dir " + (work / "o").string() + " classify --points " + (work / "p.csv").string() +
                " --knn 10 --sigma-neighbor 5 --zeta 1000 --truth " + (work / "t.txt").string()) == 0);
    const auto summary = Json::parse(slurp(work / "o" / "summary.json"));
    CHECK(summary["accuracy"].get<double>() == 1.0);
    CHECK(summary["classes"] == 2);
    const auto pred = slurp(work / "o" / "predictions.csv");
    CHECK(pred.rfind("node,pred_class,score_0,score_1\n", 0) == 0);
}

TEST_CASE("config file sections and flag overrides", "[cli]") {
    Scratch s;
    std::ofstream(work / "c.ini") << "seed = 9\n[generate]\nn = 50\nspec = box3d\n[solve]\nalpha = 3\n";
    REQUIRE(run("--config " + (work / "c.ini").string() + " generate --n 20 --out " + (work / "a.csv").string()) == 0);
    const auto cloud = load_points_csv(work / "a.csv");
    CHECK(cloud.size() == 22);
    CHECK(cloud.dim() == 3);

    std::ofstream(work / "bad.ini") << "[generat]\nn = 5\n";
    CHECK(run("--config " + (work / "bad.ini").string() + " generate") == 2);
    std::ofstream(work / "unknown.ini") << "[generate]\nwidth = 5\n";
    CHECK(run("--config " + (work / "unknown.ini").string() + " generate") == 2);
}

TEST_CASE("exit codes", "[cli]") {
    Scratch s;
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("generate --n -3") == 2);
    CHECK(run("generate --spec torus") == 2);
    CHECK(run("solve --points " + (work / "missing.csv").string()) == 3);
    std::ofstream(work / "p.csv") << "x_1,label_value\n0,\n1,\n";
    CHECK(run("solve --points " + (work / "p.csv").string() + " --eps 2") == 3); // no labels
    CHECK(run("solve --points " + (work / "p.csv").string() + " --method magic") == 2);
    std::ofstream(work / "q.csv") << "x_1,label_value\n0,0\n10,\n20,1\n";
    CHECK(run("solve --points " + (work / "q.csv").string() + " --kernel indicator --eps 1 --tol 1e-10") == 3);
    CHECK(slurp(work / "stderr.txt").find("component") != std::string::npos);
    CHECK(run("mnist --dir " + work.string()) == 3);
    CHECK(run("mnist") == 2);
    CHECK(run("validate bogus") == 2);
}

TEST_CASE("experiment subcommand writes a report", "[cli]") {
    Scratch s;
    REQUIRE(run("--deterministic --out-dir " + (work / "e").string() + " experiment decision --n 2000 --trials 2") == 0);
    const auto rep = Json::parse(slurp(work / "e" / "report.json"));
    CHECK(rep["experiment"] == "decision");
    CHECK(rep["run"]["deterministic"] == true);
    CHECK(fs::exists(work / "e" / "boundary.csv"));
    REQUIRE(run("--deterministic --out-dir " + (work / "f").string() + " experiment decision --n 2000 --trials 2") == 0);
    CHECK(strip_timing(rep) == strip_timing(Json::parse(slurp(work / "f" / "report.json"))));
}
