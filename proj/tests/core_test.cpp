#include <cmath>
#include <cstdint>
#include <vector>

#include <gtest/gtest.h>

#include "knnvis/core.hpp"

namespace {

using knnvis::DataMatrix;
using knnvis::Rng;
using knnvis::squared_distance;

DataMatrix random_matrix(std::size_t n, std::size_t dim, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    std::vector<float> values(n * dim);
    for (auto& v : values) v = static_cast<float>((rng.uniform() - 0.5) * 2.0 * scale);
    return DataMatrix(n, dim, std::move(values));
}

TEST(DataMatrix, RejectsInvalidInput) {
    EXPECT_THROW(DataMatrix(0, 2, {}), std::invalid_argument);
    EXPECT_THROW(DataMatrix(1, 0, {}), std::invalid_argument);
    EXPECT_THROW(DataMatrix(2, 2, {1.0f, 2.0f, 3.0f}), std::invalid_argument);
    EXPECT_THROW(DataMatrix(1, 2, {1.0f, std::nanf("")}), std::invalid_argument);
    EXPECT_THROW(DataMatrix(1, 1, {std::numeric_limits<float>::infinity()}), std::invalid_argument);
}

TEST(SquaredDistance, IdentityIsZero) {
    const std::vector<float> a{0.0f, 0.0f};
    EXPECT_EQ(squared_distance(a, a), 0.0);
}

TEST(SquaredDistance, UnitSquareDiagonal) {
    const std::vector<float> a{1.0f, 0.0f};
    const std::vector<float> b{0.0f, 1.0f};
    EXPECT_DOUBLE_EQ(squared_distance(a, b), 2.0);
}

TEST(SquaredDistance, DimensionMismatchThrows) {
    const std::vector<float> a{1.0f, 0.0f};
    const std::vector<float> b{0.0f, 1.0f, 2.0f};
    EXPECT_THROW(squared_distance(a, b), std::invalid_argument);
}

// Independent oracle: a separately coded scalar loop over the same rows.
TEST(SquaredDistance, MatchesNaiveLoopOracle) {
    const auto m = random_matrix(2, 100, 42, 3.0);
    const auto a = m.row(0);
    const auto b = m.row(1);

    double expected = 0.0;
    for (std::size_t k = 0; k < 100; ++k) {
        expected += (static_cast<double>(a[k]) - static_cast<double>(b[k])) *
                    (static_cast<double>(a[k]) - static_cast<double>(b[k]));
    }
    const double got = squared_distance(a, b);
    EXPECT_NEAR(got, expected, 1e-12 * expected);
}

TEST(SquaredDistance, SymmetricOnRandomPairs) {
    const auto m = random_matrix(50, 17, 7);
    for (std::size_t i = 0; i < m.n_points(); ++i) {
        for (std::size_t j = i; j < m.n_points(); ++j) {
            EXPECT_EQ(squared_distance(m.row(i), m.row(j)), squared_distance(m.row(j), m.row(i)));
            if (i == j) {
                EXPECT_EQ(squared_distance(m.row(i), m.row(j)), 0.0);
            }
        }
    }
}

TEST(SquaredDistance, TriangleInequalityOnRoots) {
    const auto m = random_matrix(30, 8, 11, 5.0);
    Rng rng(3);
    for (int trial = 0; trial < 500; ++trial) {
        const auto a = static_cast<knnvis::PointId>(rng.below(30));
        const auto b = static_cast<knnvis::PointId>(rng.below(30));
        const auto c = static_cast<knnvis::PointId>(rng.below(30));
        const double ab = std::sqrt(squared_distance(m.row(a), m.row(b)));
        const double bc = std::sqrt(squared_distance(m.row(b), m.row(c)));
        const double ac = std::sqrt(squared_distance(m.row(a), m.row(c)));
        EXPECT_LE(ac, ab + bc + 1e-9 * (1.0 + ab + bc));
    }
}

TEST(Rng, SameSeedStreamReproduces) {
    Rng parent(7);
    Rng a = parent.fork(0);
    Rng b = parent.fork(0);
    for (int i = 0; i < 1000; ++i) {
        ASSERT_EQ(a.next_u64(), b.next_u64());
    }
}

TEST(Rng, DistinctStreamsDiffer) {
    Rng parent(7);
    Rng a = parent.fork(0);
    Rng b = parent.fork(1);
    int differing = 0;
    for (int i = 0; i < 1000; ++i) {
        differing += (a.next_u64() != b.next_u64());
    }
    EXPECT_GE(differing, 900);
}

TEST(Rng, StreamsPairwiseUncorrelated) {
    constexpr int kStreams = 32;
    constexpr int kDraws = 10000;
    Rng parent(7);
    std::vector<std::vector<double>> draws(kStreams, std::vector<double>(kDraws));
    for (int s = 0; s < kStreams; ++s) {
        Rng rng = parent.fork(s);
        for (int i = 0; i < kDraws; ++i) draws[s][i] = rng.uniform();
    }
    for (int s = 0; s < kStreams; ++s) {
        for (int t = s + 1; t < kStreams; ++t) {
            double mean_s = 0.0, mean_t = 0.0;
            for (int i = 0; i < kDraws; ++i) {
                mean_s += draws[s][i];
                mean_t += draws[t][i];
            }
            mean_s /= kDraws;
            mean_t /= kDraws;
            double cov = 0.0, var_s = 0.0, var_t = 0.0;
            for (int i = 0; i < kDraws; ++i) {
                const double ds = draws[s][i] - mean_s;
                const double dt = draws[t][i] - mean_t;
                cov += ds * dt;
                var_s += ds * ds;
                var_t += dt * dt;
            }
            const double r = cov / std::sqrt(var_s * var_t);
            EXPECT_LT(std::abs(r), 0.05) << "streams " << s << " and " << t;
        }
    }
}

TEST(Rng, BelowStaysInRange) {
    Rng rng(123);
    for (int i = 0; i < 10000; ++i) {
        EXPECT_LT(rng.below(17), 17u);
    }
}

TEST(ParallelFor, CoversRangeExactlyOnce) {
    std::vector<int> hits(1000, 0);
    knnvis::parallel_for(hits.size(), 4, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t i = begin; i < end; ++i) ++hits[i];
    });
    for (int h : hits) EXPECT_EQ(h, 1);
}

} // namespace
