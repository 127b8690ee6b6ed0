#ifndef KNNVIS_WEIGHTING_HPP
#define KNNVIS_WEIGHTING_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "core.hpp"
#include "neighbors.hpp"

/**
 * @file weighting.hpp
 *
 * @brief Converts the KNN graph into a symmetric weighted graph.
 *
 * Directed similarities are Gaussian kernels over squared distances, with the
 * bandwidth of each point calibrated so the conditional distribution hits a
 * target perplexity. The graph is then symmetrized: w_ij averages the two
 * directed similarities and is scaled by 1/(2N), so the total mass over all
 * ordered pairs is exactly 1.
 */

namespace knnvis {

struct SigmaResult {
    double sigma = 1.0;
    std::vector<double> probs;
    double perplexity = 1.0;     // achieved value, 2^H with H in bits
    bool clamped = false;        // target unreachable within the search bounds
};

namespace detail {

// Normalized kernel values and their perplexity for a given sigma^2. The
// minimum distance is subtracted before exponentiation; softmax shift
// invariance makes this a no-op mathematically while preventing underflow.
inline double perplexity_at(std::span<const double> dists2, double sigma2,
                            double shift, std::vector<double>& probs) {
    const std::size_t n = dists2.size();
    probs.resize(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        probs[j] = std::exp(-(dists2[j] - shift) / (2.0 * sigma2));
        total += probs[j];
    }
    double entropy_bits = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        probs[j] /= total;
        if (probs[j] > 0.0) entropy_bits -= probs[j] * std::log2(probs[j]);
    }
    return std::exp2(entropy_bits);
}

} // namespace detail

/**
 * Calibrates the Gaussian bandwidth for one point so the perplexity of the
 * conditional distribution over its neighbor distances matches the target.
 * Geometric bisection on sigma^2 over [1e-20, 1e+20], at most 100 steps,
 * stopping when |2^H - u| < 1e-3 or |log2(2^H) - log2(u)| < 1e-5.
 */
inline SigmaResult calibrate_sigma(std::span<const double> dists2, double target_perplexity) {
    const std::size_t n = dists2.size();
    if (n == 0) {
        throw std::invalid_argument("calibrate_sigma: empty distance list");
    }
    for (double d : dists2) {
        if (!std::isfinite(d) || d < 0.0) {
            throw std::invalid_argument("calibrate_sigma: distances must be finite and nonnegative");
        }
    }

    SigmaResult result;
    const auto [min_it, max_it] = std::minmax_element(dists2.begin(), dists2.end());
    const double shift = *min_it;

    // All distances equal: the kernel is uniform for every sigma. This also
    // covers all-zero duplicate rows, where the kernel ratio is 0/0.
    if (*min_it == *max_it) {
        result.sigma = 1.0;
        result.probs.assign(n, 1.0 / static_cast<double>(n));
        result.perplexity = static_cast<double>(n);
        result.clamped = std::abs(result.perplexity - target_perplexity) >= 1e-3;
        return result;
    }

    // Perplexity saturates at the list length; a larger target is unreachable.
    if (target_perplexity > static_cast<double>(n)) {
        result.sigma = 1e10;
        result.probs.assign(n, 1.0 / static_cast<double>(n));
        result.perplexity = static_cast<double>(n);
        result.clamped = true;
        return result;
    }

    double lo = 1e-20, hi = 1e20;
    double sigma2 = 1.0;
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
        sigma2 = std::sqrt(lo * hi);
        result.perplexity = detail::perplexity_at(dists2, sigma2, shift, result.probs);
        if (std::abs(result.perplexity - target_perplexity) < 1e-3 ||
            std::abs(std::log2(result.perplexity) - std::log2(target_perplexity)) < 1e-5) {
            converged = true;
            break;
        }
        if (result.perplexity > target_perplexity) {
            hi = sigma2;
        } else {
            lo = sigma2;
        }
    }
    result.sigma = std::sqrt(sigma2);
    result.clamped = !converged;
    return result;
}

/**
 * @brief Symmetric sparse graph over the points, CSR with both edge directions stored.
 *
 * `weights[e]` holds the same value for (i,j) and (j,i). `noise_degree[v]` is
 * the weighted degree of v, which feeds the negative-sampling distribution.
 */
struct WeightedGraph {
    std::size_t n = 0;
    std::vector<std::size_t> offsets;      // n + 1
    std::vector<PointId> targets;          // directed edge targets
    std::vector<PointId> sources;          // directed edge sources, aligned with targets
    std::vector<double> weights;
    std::vector<double> noise_degree;
    std::uint32_t clamped_calibrations = 0;

    std::size_t directed_edge_count() const { return targets.size(); }

    std::span<const PointId> targets_of(PointId v) const {
        return {targets.data() + offsets[v], offsets[v + 1] - offsets[v]};
    }
    std::span<const double> weights_of(PointId v) const {
        return {weights.data() + offsets[v], offsets[v + 1] - offsets[v]};
    }

    /** Weight of edge (i, j), or 0 when absent. Rows are sorted by target. */
    double weight_between(PointId i, PointId j) const {
        const auto row = targets_of(i);
        const auto it = std::lower_bound(row.begin(), row.end(), j);
        if (it == row.end() || *it != j) return 0.0;
        return weights[offsets[i] + static_cast<std::size_t>(it - row.begin())];
    }

    double total_weight() const {
        double total = 0.0;
        for (double w : weights) total += w;
        return total;
    }
};

namespace detail {

// Assembles the CSR from unique undirected pairs; each pair is stored in both
// directions with the same weight.
inline WeightedGraph graph_from_pairs(std::size_t n,
                                      std::span<const std::tuple<PointId, PointId, double>> pairs) {
    WeightedGraph g;
    g.n = n;
    g.offsets.assign(n + 1, 0);
    for (const auto& [a, b, w] : pairs) {
        ++g.offsets[a + 1];
        ++g.offsets[b + 1];
    }
    for (std::size_t v = 0; v < n; ++v) g.offsets[v + 1] += g.offsets[v];

    const std::size_t m = g.offsets[n];
    g.targets.resize(m);
    g.sources.resize(m);
    g.weights.resize(m);
    std::vector<std::size_t> cursor(g.offsets.begin(), g.offsets.end() - 1);
    for (const auto& [a, b, w] : pairs) {
        g.targets[cursor[a]] = b;
        g.sources[cursor[a]] = a;
        g.weights[cursor[a]] = w;
        ++cursor[a];
        g.targets[cursor[b]] = a;
        g.sources[cursor[b]] = b;
        g.weights[cursor[b]] = w;
        ++cursor[b];
    }

    std::vector<std::pair<PointId, double>> row;
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t begin = g.offsets[v], end = g.offsets[v + 1];
        row.clear();
        for (std::size_t e = begin; e < end; ++e) row.emplace_back(g.targets[e], g.weights[e]);
        std::sort(row.begin(), row.end());
        for (std::size_t e = begin; e < end; ++e) {
            g.targets[e] = row[e - begin].first;
            g.weights[e] = row[e - begin].second;
        }
    }

    g.noise_degree.assign(n, 0.0);
    for (std::size_t e = 0; e < m; ++e) g.noise_degree[g.sources[e]] += g.weights[e];
    return g;
}

} // namespace detail

/** Builds a WeightedGraph from an undirected edge list; duplicate pairs accumulate. */
inline WeightedGraph make_graph(std::size_t n,
                                std::vector<std::tuple<PointId, PointId, double>> edges) {
    for (auto& [a, b, w] : edges) {
        if (a == b) throw std::invalid_argument("make_graph: self loop");
        if (a >= n || b >= n) throw std::invalid_argument("make_graph: vertex out of range");
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("make_graph: weight must be positive and finite");
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    std::vector<std::tuple<PointId, PointId, double>> merged;
    for (const auto& e : edges) {
        if (!merged.empty() && std::get<0>(merged.back()) == std::get<0>(e) &&
            std::get<1>(merged.back()) == std::get<1>(e)) {
            std::get<2>(merged.back()) += std::get<2>(e);
        } else {
            merged.push_back(e);
        }
    }
    return detail::graph_from_pairs(n, merged);
}

/**
 * Full weighting stage. Calibrates every point's bandwidth against the target
 * perplexity, symmetrizes the directed similarities into w_ij, and drops
 * edges whose weight falls below 1e-12 / N (never sampled in practice, and
 * they bloat the alias table).
 */
inline WeightedGraph weigh_graph(const DataMatrix& data, const NeighborLists& knn,
                                 double target_perplexity, unsigned workers = 1) {
    const std::size_t n = data.n_points();
    const std::size_t cap = knn.capacity();
    std::vector<double> probs(n * cap, 0.0);
    std::vector<std::uint32_t> clamped(resolve_workers(workers), 0);

    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto d2 = knn.dists(static_cast<PointId>(i));
            if (d2.empty()) continue;
            const auto result = calibrate_sigma(d2, target_perplexity);
            clamped[w] += result.clamped;
            std::copy(result.probs.begin(), result.probs.end(), probs.begin() + i * cap);
        }
    });

    // Directed similarities collapse onto unordered pairs: the symmetrized
    // weight only needs the sum of the two directions.
    std::vector<std::tuple<PointId, PointId, double>> pairs;
    pairs.reserve(n * cap);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ids = knn.ids(static_cast<PointId>(i));
        for (std::size_t j = 0; j < ids.size(); ++j) {
            const PointId a = static_cast<PointId>(i);
            const PointId b = ids[j];
            pairs.emplace_back(std::min(a, b), std::max(a, b), probs[i * cap + j]);
        }
    }
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& x, const auto& y) {
                  return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y));
              });

    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    const double drop_below = 1e-12 / static_cast<double>(n);
    std::vector<std::tuple<PointId, PointId, double>> merged;
    merged.reserve(pairs.size());
    std::size_t e = 0;
    while (e < pairs.size()) {
        const PointId a = std::get<0>(pairs[e]);
        const PointId b = std::get<1>(pairs[e]);
        double p_sum = std::get<2>(pairs[e]);
        ++e;
        if (e < pairs.size() && std::get<0>(pairs[e]) == a && std::get<1>(pairs[e]) == b) {
            p_sum += std::get<2>(pairs[e]);
            ++e;
        }
        const double w = p_sum * scale;
        if (w >= drop_below) merged.emplace_back(a, b, w);
    }

    WeightedGraph g = detail::graph_from_pairs(n, merged);
    for (std::uint32_t c : clamped) g.clamped_calibrations += c;
    return g;
}

} // namespace knnvis

#endif
