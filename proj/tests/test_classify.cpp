#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pwgl;
using Catch::Matchers::WithinAbs;

namespace {

// three well separated blobs, `per` points each, two labels per blob
struct Blobs {
    PointCloud cloud{2};
    std::vector<int> truth;
};

Blobs blobs(std::size_t per, std::uint64_t seed) {
    Blobs b;
    CounterRng rng(seed);
    const double cx[3] = {0.0, 3.0, 0.0}, cy[3] = {0.0, 0.0, 3.0};
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < per; ++i) {
            b.cloud.add_point(std::vector<double>{cx[c] + 0.5 * rng.uniform(), cy[c] + 0.5 * rng.uniform()});
            b.truth.push_back(c);
        }
    for (int c = 0; c < 3; ++c)
        for (std::size_t k = 0; k < 2; ++k) {
            const auto node = static_cast<NodeIndex>(static_cast<std::size_t>(c) * per + k * 7);
            b.cloud.add_label(node, 0.0, c);
        }
    return b;
}

} // namespace

TEST_CASE("argmax breaks ties toward the lower class", "[classify]") {
    const std::vector<std::vector<double>> s{{0.2, 0.5, 0.1}, {0.5, 0.5, 0.1}, {0.5, 0.1, 0.1}};
    CHECK(argmax_class(s, 0) == 1);
    CHECK(argmax_class(s, 1) == 0);
    CHECK(argmax_class(s, 2) == 0);
}

TEST_CASE("one-vs-rest separates disconnected blobs", "[classify]") {
    auto b = blobs(60, 2);
    const auto g = build_knn_graph(b.cloud, 8, 4);
    WeightProfile w;
    w.alpha = 2.0;
    w.r0 = 0.5;
    w.zeta = 1e4;
    // knn within a blob never crosses over, so each blob is its own component holding labels
    const auto ew = attach_energy_weights(g, b.cloud, w);
    for (Method m : {Method::pw, Method::standard, Method::wnll}) {
        const auto pred = one_vs_rest(g, ew, b.cloud, MulticlassTask{3, b.truth}, m);
        CHECK(accuracy(pred.label, b.truth, b.cloud.labeled_mask()) == 1.0);
        CHECK(pred.class_count() == 3);
        CHECK(pred.reports.size() == 3);
    }
}

TEST_CASE("class scores sum to one", "[classify][property]") {
    auto cloud = fixture::random_cloud(300, 2, 9);
    CounterRng rng(4);
    for (std::size_t i : sample_without_replacement(cloud.size(), 12, rng))
        cloud.add_label(static_cast<NodeIndex>(i), 0.0, static_cast<int>(i % 4));
    const auto g = build_eps_graph(cloud, 0.1, KernelProfile::gaussian(0.5, 2.0));
    WeightProfile w;
    w.r0 = 0.1;
    w.zeta = 1e3;
    const auto ew = attach_energy_weights(g, cloud, w);
    for (Method m : {Method::pw, Method::standard, Method::wnll}) {
        SolveOptions o;
        o.cg.tol = 1e-12;
        const auto pred = one_vs_rest(g, ew, cloud, MulticlassTask{4, {}}, m, {}, o);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            double s = 0.0;
            for (const auto& col : pred.scores) s += col[i];
            CHECK_THAT(s, WithinAbs(1.0, 1e-8));
        }
    }
}

TEST_CASE("relabeling classes permutes the predictions", "[classify][property]") {
    auto cloud = fixture::random_cloud(250, 2, 13);
    CounterRng rng(6);
    for (std::size_t i : sample_without_replacement(cloud.size(), 9, rng))
        cloud.add_label(static_cast<NodeIndex>(i), 0.0, static_cast<int>(i % 3));
    const auto g = build_eps_graph(cloud, 0.1, KernelProfile::gaussian(0.5, 2.0));
    const auto ew = uniform_energy_weights(g);
    const auto base = one_vs_rest(g, ew, cloud, MulticlassTask{3, {}}, Method::standard);

    const int perm[3] = {2, 0, 1};
    PointCloud moved(2);
    for (std::size_t i = 0; i < cloud.size(); ++i) moved.add_point(cloud.point(i));
    for (std::size_t k = 0; k < cloud.label_count(); ++k)
        moved.add_label(cloud.label_indices()[k], 0.0, perm[cloud.label_classes()[k]]);
    const auto other = one_vs_rest(g, ew, moved, MulticlassTask{3, {}}, Method::standard);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        // exact ties could legitimately resolve differently; skip them
        const auto c = static_cast<std::size_t>(base.label[i]);
        bool tie = false;
        for (std::size_t d = 0; d < 3; ++d)
            if (d != c && std::abs(base.scores[d][i] - base.scores[c][i]) < 1e-9) tie = true;
        if (!tie) CHECK(other.label[i] == perm[base.label[i]]);
    }
}

TEST_CASE("one-vs-rest input errors", "[classify]") {
    auto cloud = fixture::random_cloud(50, 2, 1);
    cloud.add_label(0, 0.0, 0);
    cloud.add_label(1, 0.0, 2);
    const auto g = build_eps_graph(cloud, 0.3, KernelProfile::indicator());
    const auto ew = uniform_energy_weights(g);
    CHECK_THROWS_AS(one_vs_rest(g, ew, cloud, MulticlassTask{1, {}}, Method::pw), ConfigError);
    CHECK_THROWS_AS(one_vs_rest(g, ew, cloud, MulticlassTask{3, {}}, Method::pw), DataError); // class 1 unlabeled
    CHECK_THROWS_AS(one_vs_rest(g, ew, cloud, MulticlassTask{2, {}}, Method::pw), DataError); // class 2 out of range
}

TEST_CASE("accuracy metrics", "[classify]") {
    const std::vector<int> pred{0, 1, 1, 2, 0};
    const std::vector<int> truth{0, 1, 0, 2, 2};
    CHECK(accuracy(pred, truth) == 0.6);
    CHECK(misclassification_rate(pred, truth) == Catch::Approx(0.4));
    const std::vector<char> labeled{1, 0, 0, 0, 0};
    CHECK(accuracy(pred, truth, labeled) == 0.5);
    const auto pc = per_class_accuracy(pred, truth, 4);
    CHECK(pc[0] == 0.5);
    CHECK(pc[1] == 1.0);
    CHECK(pc[2] == 0.5);
    CHECK(std::isnan(pc[3]));
    CHECK_THROWS_AS(accuracy(pred, std::vector<int>{0, 1}), DataError);
    CHECK_THROWS_AS(accuracy(std::vector<int>{1}, std::vector<int>{1}, std::vector<char>{1}), DataError);
}
