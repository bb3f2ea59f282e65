#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace pwgl;

TEST_CASE("kd-tree range query matches a linear scan", "[geometry]") {
    for (std::size_t dim : {1u, 2u, 3u}) {
        const auto cloud = fixture::random_cloud(400, dim, 10 + dim);
        const KdTree tree(cloud, 8);
        CounterRng rng(dim);
        for (int q = 0; q < 50; ++q) {
            std::vector<double> c(dim);
            for (auto& v : c) v = rng.uniform();
            const double r = rng.uniform(0.0, 0.4);
            std::vector<NodeIndex> expect;
            for (std::size_t i = 0; i < cloud.size(); ++i)
                if (within_radius(squared_distance(cloud.point(i), c), r)) expect.push_back(static_cast<NodeIndex>(i));
            REQUIRE(tree.range_query(c, r) == expect);
        }
    }
}

TEST_CASE("range query includes points exactly on the sphere", "[geometry]") {
    PointCloud cloud(2);
    cloud.add_point(std::vector<double>{0.0, 0.0});
    cloud.add_point(std::vector<double>{0.5, 0.0});
    cloud.add_point(std::vector<double>{0.5000001, 0.0});
    const KdTree tree(cloud);
    const std::vector<double> origin{0.0, 0.0};
    CHECK(tree.range_query(origin, 0.5) == std::vector<NodeIndex>{0, 1});
}

TEST_CASE("knn query matches sorting all distances", "[geometry]") {
    for (std::size_t dim : {1u, 2u, 3u, 30u}) {
        const auto cloud = fixture::random_cloud(300, dim, 20 + dim);
        const KdTree tree(cloud, 4);
        for (std::size_t i = 0; i < cloud.size(); i += 17) {
            std::vector<std::pair<double, NodeIndex>> all;
            for (std::size_t j = 0; j < cloud.size(); ++j)
                all.emplace_back(squared_distance(cloud.point(i), cloud.point(j)), static_cast<NodeIndex>(j));
            std::sort(all.begin(), all.end());
            const auto nb = tree.knn_query(cloud.point(i), 12);
            const auto bf = brute_knn(cloud, cloud.point(i), 12);
            REQUIRE(nb.size() == 12);
            for (std::size_t k = 0; k < 12; ++k) {
                CHECK(nb[k].index == all[k].second);
                CHECK(bf[k].index == all[k].second);
                CHECK(nb[k].distance == std::sqrt(all[k].first));
            }
        }
    }
}

TEST_CASE("knn ties are broken by the lower index", "[geometry]") {
    PointCloud cloud(1);
    for (double x : {1.0, -1.0, 2.0, 0.0, -2.0}) cloud.add_point(std::vector<double>{x});
    const KdTree tree(cloud);
    const auto nb = tree.knn_query(std::vector<double>{0.0}, 5);
    std::vector<NodeIndex> order;
    for (const auto& n : nb) order.push_back(n.index);
    CHECK(order == std::vector<NodeIndex>{3, 0, 1, 2, 4});
}

TEST_CASE("knn rejects k = 0 and k > n", "[geometry]") {
    const auto cloud = fixture::random_cloud(5, 2, 1);
    const KdTree tree(cloud);
    CHECK_THROWS_AS(tree.knn_query(cloud.point(0), 0), DataError);
    CHECK_THROWS_AS(tree.knn_query(cloud.point(0), 6), DataError);
    CHECK_THROWS_AS(tree.range_query(std::vector<double>{0.0}, 1.0), DataError);
}

TEST_CASE("distances to labels and label separation", "[geometry]") {
    PointCloud cloud(2);
    cloud.add_point(std::vector<double>{0.0, 0.0});
    cloud.add_point(std::vector<double>{3.0, 4.0});
    cloud.add_point(std::vector<double>{1.0, 0.0});
    CHECK_THROWS_AS(dist_to_labels(cloud, cloud.point(0)), DataError);
    cloud.add_label(0, 0.0);
    CHECK(std::isinf(min_label_separation(cloud)));
    cloud.add_label(1, 1.0);
    CHECK(min_label_separation(cloud) == 5.0);
    const auto d = dist_to_labels_all(cloud);
    CHECK(d == std::vector<double>{0.0, 0.0, 1.0});

    PointCloud twin(1);
    twin.add_point(std::vector<double>{0.5});
    twin.add_point(std::vector<double>{0.5});
    twin.add_label(0, 0.0);
    twin.add_label(1, 1.0);
    CHECK_THROWS_AS(min_label_separation(twin), DataError);
}

TEST_CASE("point cloud rejects malformed labels and points", "[geometry]") {
    PointCloud cloud(2);
    cloud.add_point(std::vector<double>{0.0, 0.0});
    CHECK_THROWS_AS(cloud.add_point(std::vector<double>{1.0}), DataError);
    CHECK_THROWS_AS(cloud.add_label(3, 1.0), DataError);
    cloud.add_label(0, 1.0);
    CHECK_THROWS_AS(cloud.add_label(0, 2.0), DataError);
    CHECK_THROWS_AS(PointCloud(0), DataError);
}
