#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pwgl;
using Catch::Matchers::WithinAbs;

TEST_CASE("test function derivatives match finite differences", "[validation]") {
    const std::vector<std::vector<double>> pts{{0.1, 0.2}, {-0.3, 0.45}, {0.7, -0.05}};
    for (const auto& phi : {TestFunction::x1_squared(), TestFunction::linear({0.3, -1.2}), TestFunction::constant(2.0),
                            TestFunction::cosine()})
        CHECK(finite_difference_error(phi, pts) < 1e-6);

    // a wrong gradient is caught
    auto bad = TestFunction::x1_squared();
    bad.gradient = [](std::span<const double> x) { return std::vector<double>{3.0 * x[0], 0.0}; };
    CHECK(finite_difference_error(bad, pts) > 0.1);
}

TEST_CASE("operator annihilates constants", "[validation]") {
    ConsistencyProbe probe;
    probe.phi = TestFunction::constant(1.5);
    ConsistencyParams p;
    p.schedule = {3000};
    const auto rep = consistency_check(probe, p);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].masked > 0);
    CHECK(rep.rows[0].max_deviation == 0.0);
    CHECK(rep.rows[0].max_target == 0.0);
}

TEST_CASE("pointwise consistency at moderate n", "[validation]") {
    ConsistencyProbe probe;
    ConsistencyParams p;
    p.schedule = {40000};
    const auto rep = consistency_check(probe, p);
    CHECK(rep.rows[0].relative() < 0.2);
    CHECK(rep.derivative_check < 1e-6);
    const auto j = rep.to_json();
    CHECK(j["rows"].size() == 1);
}

TEST_CASE("holder probe recovers the exponent of a radial field", "[validation]") {
    auto cloud = fixture::random_cloud(20000, 2, 23);
    cloud.append_labeled(std::vector<double>{0.5, 0.5}, 0.0, 0);
    for (double beta : {0.5, 1.0, 2.0}) {
        std::vector<double> u(cloud.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = std::pow(distance(cloud.point(i), std::vector<double>{0.5, 0.5}), beta);
        const auto rep = holder_probe(u, cloud, 0, 0.005, beta);
        REQUIRE(rep.radius.size() >= 3);
        CHECK_THAT(rep.slope, WithinAbs(beta, 0.05));
        CHECK_FALSE(rep.constant);
    }
    const std::vector<double> flat(cloud.size(), 0.0);
    CHECK(holder_probe(flat, cloud, 0, 0.005, 1.0).constant);
    CHECK_THROWS_AS(holder_probe(flat, cloud, 1, 0.005, 1.0), ConfigError);
    CHECK_THROWS_AS(holder_probe(flat, cloud, 0, 0.1, 1.0), ConfigError);
}

TEST_CASE("radial oracle at small n", "[validation]") {
    RadialParams p;
    p.n = 8000;
    const auto rep = radial_oracle_check(p);
    CHECK(rep.monotone);
    CHECK(rep.deviation < 0.2);
    CHECK(rep.beta == 2.0);
    CHECK(rep.solve.residual <= 1e-10);
    p.alpha = -0.5;
    CHECK_THROWS_AS(radial_oracle_check(p), ConfigError);
}

TEST_CASE("barrier holds at small n", "[validation]") {
    BarrierParams p;
    p.n = 10000;
    p.eps = 0.05;
    p.C = 2.0;
    const auto rep = barrier_check(p);
    CHECK(rep.annulus > 100);
    CHECK(rep.fraction() < 0.05);
    p.c = 0.1;
    p.C = 4.0;
    p.eps = 0.03;
    CHECK_THROWS_AS(barrier_check(p), DataError);
}

TEST_CASE("degeneracy probe input checks", "[validation]") {
    DegeneracyParams p;
    p.schedule = {1000};
    CHECK_THROWS_AS(wnll_degeneracy_probe(p), ConfigError);
    DegeneracyReport r;
    r.methods = {Method::pw};
    r.spread = {{0.2, 0.1}};
    CHECK(r.shrink_factor(Method::pw) == 2.0);
    CHECK_THROWS_AS(r.shrink_factor(Method::wnll), ConfigError);
}
