#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "knnvis/eval.hpp"
#include "knnvis/knn.hpp"
#include "knnvis/synthetic.hpp"

namespace {

using namespace knnvis;

NeighborLists lists_from(std::size_t n, std::size_t k,
                         const std::vector<std::vector<std::pair<double, PointId>>>& rows) {
    NeighborLists lists(n, k);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        lists.set_list(static_cast<PointId>(i), rows[i]);
    }
    return lists;
}

TEST(ExploreOnce, ExactGraphIsAFixedPoint) {
    const auto mix = gaussian_mixture({.n = 300, .dim = 8, .clusters = 3, .spread = 1.0, .seed = 5});
    const auto exact = brute_force_knn(mix.data, 6);
    const auto explored = explore_once(mix.data, exact, 6);
    for (PointId p = 0; p < 300; ++p) {
        ASSERT_EQ(explored.length(p), exact.length(p));
        for (std::size_t j = 0; j < exact.length(p); ++j) {
            EXPECT_EQ(explored.ids(p)[j], exact.ids(p)[j]);
            EXPECT_EQ(explored.dists(p)[j], exact.dists(p)[j]);
        }
    }
}

TEST(ExploreOnce, PathGraphHandCase) {
    // Points a=0, b=2, c=2.1 on a line; knn(a)={b}, knn(b)={c}, knn(c)={b}, k=1.
    // a's candidates are b (seed) and c (via b); dist(a,b)=4 < dist(a,c)=4.41.
    const DataMatrix data(3, 1, {0.0f, 2.0f, 2.1f});
    const auto current = lists_from(3, 1, {
        {{4.0, 1}},
        {{squared_distance(data.row(1), data.row(2)), 2}},
        {{squared_distance(data.row(1), data.row(2)), 1}},
    });
    const auto next = explore_once(data, current, 1);
    ASSERT_EQ(next.length(0), 1u);
    EXPECT_EQ(next.ids(0)[0], 1u);
    EXPECT_DOUBLE_EQ(next.dists(0)[0], 4.0);
}

TEST(ExploreOnce, RaisesRecallFromPoorStart) {
    Rng rng(123);
    std::vector<float> values(5000 * 100);
    for (auto& v : values) v = static_cast<float>(rng.normal());
    const DataMatrix data(5000, 100, std::move(values));

    const auto forest = build_forest(data, {4, 32}, Rng(9));
    const auto start = knn_from_forest(forest, data, 10);
    const auto exact = brute_force_knn(data, 10);
    const double r0 = recall(start, exact).mean;
    ASSERT_LT(r0, 1.0);

    const auto once = explore_once(data, start, 10);
    const double r1 = recall(once, exact).mean;
    EXPECT_GT(r1, r0);
}

TEST(ExploreOnce, DistancesSoundAndWithinCapacity) {
    const auto mix = gaussian_mixture({.n = 400, .dim = 10, .clusters = 4, .spread = 1.0, .seed = 44});
    const auto forest = build_forest(mix.data, {2, 12}, Rng(3));
    auto lists = knn_from_forest(forest, mix.data, 7);
    lists = explore_once(mix.data, lists, 7);
    for (PointId p = 0; p < 400; ++p) {
        EXPECT_LE(lists.length(p), 7u);
        for (std::size_t j = 0; j < lists.length(p); ++j) {
            const PointId q = lists.ids(p)[j];
            EXPECT_NE(q, p);
            EXPECT_EQ(lists.dists(p)[j], squared_distance(mix.data.row(p), mix.data.row(q)));
        }
    }
}

TEST(BuildKnnGraph, ZeroIterationsEqualsForestSearch) {
    const auto mix = gaussian_mixture({.n = 500, .dim = 10, .clusters = 5, .spread = 1.0, .seed = 7});
    GraphConfig cfg;
    cfg.trees = 5;
    cfg.neighbors = 8;
    cfg.explore_iters = 0;
    cfg.seed = 42;

    const auto direct = build_knn_graph(mix.data, cfg);
    const auto forest = build_forest(mix.data, {cfg.trees, 32}, Rng(cfg.seed, 0));
    const auto expected = knn_from_forest(forest, mix.data, cfg.neighbors);
    for (PointId p = 0; p < 500; ++p) {
        ASSERT_EQ(direct.length(p), expected.length(p));
        for (std::size_t j = 0; j < direct.length(p); ++j) {
            EXPECT_EQ(direct.ids(p)[j], expected.ids(p)[j]);
        }
    }
}

TEST(BuildKnnGraph, OneIterationNearsPerfectRecall) {
    const auto mix = gaussian_mixture({.n = 2000, .dim = 100, .clusters = 10, .spread = 1.0, .seed = 11});
    GraphConfig cfg;
    cfg.trees = 5;
    cfg.neighbors = 10;
    cfg.explore_iters = 0;
    cfg.seed = 4;

    const auto exact = brute_force_knn(mix.data, 10);
    const double forest_only = recall(build_knn_graph(mix.data, cfg), exact).mean;

    cfg.explore_iters = 1;
    const double after_one = recall(build_knn_graph(mix.data, cfg), exact).mean;
    EXPECT_GE(after_one, forest_only);
    EXPECT_GE(after_one, 0.9);
}

TEST(BuildKnnGraph, ThreeIterationsRecoverFromOneTree) {
    const auto mix = gaussian_mixture({.n = 2000, .dim = 100, .clusters = 10, .spread = 1.0, .seed = 23});
    GraphConfig cfg;
    cfg.trees = 1;
    cfg.neighbors = 10;
    cfg.explore_iters = 3;
    cfg.seed = 9;

    const auto exact = brute_force_knn(mix.data, 10);
    const double r = recall(build_knn_graph(mix.data, cfg), exact).mean;
    EXPECT_GE(r, 0.99);
}

TEST(BuildKnnGraph, RecallMonotoneOverIterations) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto mix = gaussian_mixture({.n = 800, .dim = 30, .clusters = 4, .spread = 1.0, .seed = seed});
        const auto exact = brute_force_knn(mix.data, 10);
        const auto forest = build_forest(mix.data, {2, 16}, Rng(seed, 0));
        auto lists = knn_from_forest(forest, mix.data, 10);
        double previous = recall(lists, exact).mean;
        for (int iter = 0; iter < 4; ++iter) {
            lists = explore_once(mix.data, lists, 10);
            const double current = recall(lists, exact).mean;
            EXPECT_GE(current, previous);
            previous = current;
        }
    }
}

TEST(ExploreOnce, WorkerCountDoesNotChangeResult) {
    const auto mix = gaussian_mixture({.n = 600, .dim = 12, .clusters = 3, .spread = 1.0, .seed = 15});
    const auto forest = build_forest(mix.data, {3, 16}, Rng(2));
    const auto start = knn_from_forest(forest, mix.data, 6);
    const auto serial = explore_once(mix.data, start, 6, 1);
    const auto threaded = explore_once(mix.data, start, 6, 4);
    for (PointId p = 0; p < 600; ++p) {
        ASSERT_EQ(serial.length(p), threaded.length(p));
        for (std::size_t j = 0; j < serial.length(p); ++j) {
            EXPECT_EQ(serial.ids(p)[j], threaded.ids(p)[j]);
        }
    }
}

} // namespace
