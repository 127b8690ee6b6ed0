#include <algorithm>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "knnvis/eval.hpp"
#include "knnvis/rptree.hpp"
#include "knnvis/synthetic.hpp"

namespace {

using namespace knnvis;

DataMatrix one_dimensional(std::initializer_list<float> values) {
    return DataMatrix(values.size(), 1, std::vector<float>(values));
}

TEST(BuildForest, RejectsBadConfig) {
    const auto data = one_dimensional({0.0f, 10.0f});
    EXPECT_THROW(build_forest(data, {0, 4}, Rng(1)), std::invalid_argument);
    EXPECT_THROW(build_forest(data, {1, 0}, Rng(1)), std::invalid_argument);
}

TEST(BuildForest, IdenticalPointsCollapseToOneLeaf) {
    const DataMatrix data(2, 2, {1.0f, 2.0f, 1.0f, 2.0f});
    for (std::uint32_t nt : {1u, 3u}) {
        const auto forest = build_forest(data, {nt, 1}, Rng(5));
        for (const auto& tree : forest.trees()) {
            EXPECT_EQ(tree.leaf_count(), 1u);
            EXPECT_EQ(tree.co_members(0).size(), 2u);
        }
    }
}

TEST(BuildForest, TwoSeparatedPointsSplitAtCapacityOne) {
    const auto data = one_dimensional({0.0f, 10.0f});
    const auto forest = build_forest(data, {1, 1}, Rng(9));
    const auto& tree = forest.trees()[0];
    // One split, two singleton leaves: the bisector at 5 separates the points
    // for either sample order.
    EXPECT_EQ(tree.nodes().size() - tree.leaf_count(), 1u) << "expected exactly one split";
    EXPECT_EQ(tree.leaf_count(), 2u);
    EXPECT_NE(tree.co_members(0).data(), tree.co_members(1).data());
    EXPECT_EQ(tree.co_members(0).size(), 1u);
    EXPECT_EQ(tree.co_members(1).size(), 1u);
}

TEST(BuildForest, LeavesPartitionAllPoints) {
    const auto mix = gaussian_mixture({.n = 1000, .dim = 10, .clusters = 4, .spread = 1.0, .seed = 3});
    const auto forest = build_forest(mix.data, {10, 25}, Rng(17));
    ASSERT_EQ(forest.trees().size(), 10u);
    for (const auto& tree : forest.trees()) {
        std::vector<PointId> all;
        for (std::size_t node = 0; node < tree.nodes().size(); ++node) {
            if (!tree.nodes()[node].is_leaf()) continue;
            const auto members = tree.leaf_members(static_cast<std::uint32_t>(node));
            EXPECT_LE(members.size(), 25u);
            EXPECT_GE(members.size(), 1u);
            all.insert(all.end(), members.begin(), members.end());
        }
        std::sort(all.begin(), all.end());
        ASSERT_EQ(all.size(), 1000u);
        for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
    }
}

TEST(BuildForest, DeterministicAcrossWorkerCounts) {
    const auto mix = gaussian_mixture({.n = 300, .dim = 6, .clusters = 3, .spread = 1.0, .seed = 21});
    const auto a = build_forest(mix.data, {4, 8}, Rng(77), 1);
    const auto b = build_forest(mix.data, {4, 8}, Rng(77), 4);
    const auto la = knn_from_forest(a, mix.data, 5);
    const auto lb = knn_from_forest(b, mix.data, 5);
    for (PointId p = 0; p < 300; ++p) {
        ASSERT_EQ(la.length(p), lb.length(p));
        for (std::size_t j = 0; j < la.length(p); ++j) {
            EXPECT_EQ(la.ids(p)[j], lb.ids(p)[j]);
            EXPECT_EQ(la.dists(p)[j], lb.dists(p)[j]);
        }
    }
}

TEST(CandidatesFor, SingleLeafReturnsEveryoneElse) {
    const auto mix = gaussian_mixture({.n = 50, .dim = 4, .clusters = 1, .spread = 1.0, .seed = 2});
    const auto forest = build_forest(mix.data, {1, 64}, Rng(1));
    const auto candidates = forest.candidates_for(7);
    EXPECT_EQ(candidates.size(), 49u);
    EXPECT_FALSE(std::binary_search(candidates.begin(), candidates.end(), PointId{7}));
}

TEST(CandidatesFor, UnionOverTreesMinusSelf) {
    const auto mix = gaussian_mixture({.n = 200, .dim = 8, .clusters = 4, .spread = 1.0, .seed = 13});
    const auto forest = build_forest(mix.data, {3, 16}, Rng(4));
    for (PointId p : {PointId{0}, PointId{55}, PointId{199}}) {
        std::set<PointId> expected;
        for (const auto& tree : forest.trees()) {
            const auto slice = tree.co_members(p);
            expected.insert(slice.begin(), slice.end());
        }
        expected.erase(p);
        const auto got = forest.candidates_for(p);
        EXPECT_TRUE(std::equal(got.begin(), got.end(), expected.begin(), expected.end()));
    }
}

TEST(CandidatesFor, MoreTreesImproveCandidateRecall) {
    const auto mix = gaussian_mixture({.n = 1000, .dim = 10, .clusters = 5, .spread = 1.0, .seed = 31});
    const auto exact = brute_force_knn(mix.data, 10);

    auto candidate_recall = [&](const RpForest& forest) {
        double total = 0.0;
        for (PointId p = 0; p < 1000; ++p) {
            const auto candidates = forest.candidates_for(p);
            std::size_t hits = 0;
            for (PointId t : exact.ids(p)) {
                hits += std::binary_search(candidates.begin(), candidates.end(), t);
            }
            total += static_cast<double>(hits) / 10.0;
        }
        return total / 1000.0;
    };

    const double with_one = candidate_recall(build_forest(mix.data, {1, 16}, Rng(40)));
    const double with_ten = candidate_recall(build_forest(mix.data, {10, 16}, Rng(40)));
    EXPECT_GT(with_ten, with_one);
}

TEST(CandidatesFor, MonotoneGrowthWithSharedSeeds) {
    const auto mix = gaussian_mixture({.n = 400, .dim = 6, .clusters = 2, .spread = 1.0, .seed = 8});
    // Trees fork per-index streams, so the first 2 trees of the 5-tree forest
    // are the 2-tree forest.
    const auto small = build_forest(mix.data, {2, 16}, Rng(19));
    const auto large = build_forest(mix.data, {5, 16}, Rng(19));
    for (PointId p = 0; p < 400; p += 13) {
        const auto a = small.candidates_for(p);
        const auto b = large.candidates_for(p);
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
    }
}

TEST(KnnFromForest, CollinearHandCase) {
    const auto data = one_dimensional({0.0f, 1.0f, 3.0f});
    const auto forest = build_forest(data, {1, 8}, Rng(1));
    const auto lists = knn_from_forest(forest, data, 1);
    ASSERT_EQ(lists.length(0), 1u);
    ASSERT_EQ(lists.length(1), 1u);
    ASSERT_EQ(lists.length(2), 1u);
    EXPECT_EQ(lists.ids(0)[0], 1u);
    EXPECT_EQ(lists.ids(1)[0], 0u);   // dist(1,0) = 1 < dist(1,2) = 4
    EXPECT_EQ(lists.ids(2)[0], 1u);
}

TEST(KnnFromForest, KLargerThanCandidatesMeansNoPadding) {
    const auto data = one_dimensional({0.0f, 1.0f, 3.0f});
    const auto forest = build_forest(data, {1, 8}, Rng(1));
    const auto lists = knn_from_forest(forest, data, 10);
    for (PointId p = 0; p < 3; ++p) {
        EXPECT_EQ(lists.length(p), 2u);
    }
}

TEST(KnnFromForest, ListsSortedUniqueNoSelf) {
    const auto mix = gaussian_mixture({.n = 500, .dim = 12, .clusters = 3, .spread = 1.0, .seed = 6});
    const auto forest = build_forest(mix.data, {5, 20}, Rng(66));
    const auto lists = knn_from_forest(forest, mix.data, 8);
    for (PointId p = 0; p < 500; ++p) {
        const auto ids = lists.ids(p);
        const auto d2 = lists.dists(p);
        std::set<PointId> unique(ids.begin(), ids.end());
        EXPECT_EQ(unique.size(), ids.size());
        EXPECT_EQ(unique.count(p), 0u);
        for (std::size_t j = 0; j + 1 < d2.size(); ++j) {
            EXPECT_LE(d2[j], d2[j + 1]);
        }
        for (std::size_t j = 0; j < ids.size(); ++j) {
            EXPECT_EQ(d2[j], squared_distance(mix.data.row(p), mix.data.row(ids[j])));
        }
    }
}

// Establishes the low-recall starting point that neighbor exploring recovers.
TEST(KnnFromForest, ForestOnlyRecallIsMiddlingOnHardData) {
    Rng rng(99);
    std::vector<float> values(5000 * 100);
    for (auto& v : values) v = static_cast<float>(rng.normal());
    const DataMatrix data(5000, 100, std::move(values));

    const auto forest = build_forest(data, {15, 32}, Rng(12));
    const auto approx = knn_from_forest(forest, data, 10);
    const auto exact = brute_force_knn(data, 10);
    const double r = recall(approx, exact).mean;
    RecordProperty("forest_recall", r);
    EXPECT_GT(r, 0.05);
    EXPECT_LT(r, 1.0);
}

} // namespace
