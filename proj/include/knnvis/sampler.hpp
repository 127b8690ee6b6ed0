#ifndef KNNVIS_SAMPLER_HPP
#define KNNVIS_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "weighting.hpp"

/**
 * @file sampler.hpp
 *
 * @brief O(1) weighted sampling: an alias table over edge weights for edge
 * sampling and one over vertex degrees^0.75 for negative sampling.
 */

namespace knnvis {

/**
 * @brief Walker/Vose alias table.
 *
 * Built with the two-stack method in O(n) with 64-bit accumulation. A draw
 * picks a uniform slot k and returns k itself with probability prob[k], its
 * alias otherwise; the stationary probability of each index equals its
 * normalized input weight up to construction rounding.
 */
class AliasTable {
public:
    explicit AliasTable(std::span<const double> weights) {
        const std::size_t n = weights.size();
        if (n == 0) throw std::invalid_argument("AliasTable: empty weight vector");
        total_ = 0.0;
        for (double w : weights) {
            if (!std::isfinite(w) || w < 0.0) {
                throw std::invalid_argument("AliasTable: weights must be finite and nonnegative");
            }
            total_ += w;
        }
        if (total_ <= 0.0) throw std::invalid_argument("AliasTable: all weights are zero");

        prob_.assign(n, 1.0);
        alias_.resize(n);
        for (std::size_t k = 0; k < n; ++k) alias_[k] = static_cast<std::uint32_t>(k);

        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        small.reserve(n);
        large.reserve(n);
        const double rescale = static_cast<double>(n) / total_;
        for (std::size_t k = 0; k < n; ++k) {
            scaled[k] = weights[k] * rescale;
            (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
        }
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            const std::uint32_t l = large.back();
            small.pop_back();
            large.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        // Leftovers on either stack are numerical residue of exactly 1.
        while (!large.empty()) { prob_[large.back()] = 1.0; large.pop_back(); }
        while (!small.empty()) { prob_[small.back()] = 1.0; small.pop_back(); }
    }

    std::size_t size() const { return prob_.size(); }
    double total_weight() const { return total_; }

    std::size_t sample(Rng& rng) const {
        const std::size_t k = static_cast<std::size_t>(rng.below(prob_.size()));
        return rng.uniform() < prob_[k] ? k : alias_[k];
    }

    /** Stationary probability of index k implied by the table; analytic, no sampling. */
    double stationary_probability(std::size_t k) const {
        double p = prob_[k];
        for (std::size_t j = 0; j < alias_.size(); ++j) {
            if (alias_[j] == k && j != k) p += 1.0 - prob_[j];
        }
        return p / static_cast<double>(prob_.size());
    }

    std::span<const double> prob() const { return prob_; }
    std::span<const std::uint32_t> alias() const { return alias_; }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
    double total_ = 0.0;
};

/**
 * @brief Noise distribution for negative sampling: vertex v drawn with
 * probability proportional to its weighted degree raised to 0.75.
 *
 * Isolated vertices carry zero weight and are never drawn.
 */
class NoiseDistribution {
public:
    explicit NoiseDistribution(const WeightedGraph& graph)
        : vertex_weight_(graph.n), table_(build_weights(graph, vertex_weight_)) {}

    const AliasTable& table() const { return table_; }
    double vertex_weight(PointId v) const { return vertex_weight_[v]; }
    std::size_t vertex_count() const { return vertex_weight_.size(); }

private:
    static std::span<const double> build_weights(const WeightedGraph& graph,
                                                 std::vector<double>& out) {
        for (std::size_t v = 0; v < graph.n; ++v) {
            out[v] = graph.noise_degree[v] > 0.0 ? std::pow(graph.noise_degree[v], 0.75) : 0.0;
        }
        return out;
    }

    std::vector<double> vertex_weight_;
    AliasTable table_;
};

/** Draws a directed edge index with probability proportional to its weight. */
inline std::size_t sample_edge(const AliasTable& table, Rng& rng) {
    return table.sample(rng);
}

/**
 * Draws a vertex from the noise distribution, rejecting the source and the
 * current positive target. After 100 rejected draws, falls back to a linear
 * scan from a random start; returns nothing when no admissible vertex exists.
 */
inline std::optional<PointId> sample_negative(const NoiseDistribution& noise, Rng& rng,
                                              PointId exclude_source,
                                              PointId exclude_positive = kInvalidPoint) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        const PointId v = static_cast<PointId>(noise.table().sample(rng));
        if (v != exclude_source && v != exclude_positive) return v;
    }
    const std::size_t n = noise.vertex_count();
    const std::size_t start = static_cast<std::size_t>(rng.below(n));
    for (std::size_t off = 0; off < n; ++off) {
        const PointId v = static_cast<PointId>((start + off) % n);
        if (v != exclude_source && v != exclude_positive && noise.vertex_weight(v) > 0.0) {
            return v;
        }
    }
    return std::nullopt;
}

} // namespace knnvis

#endif
