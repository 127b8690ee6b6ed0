#ifndef KNNVIS_LAYOUT_HPP
#define KNNVIS_LAYOUT_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "core.hpp"
#include "sampler.hpp"
#include "weighting.hpp"

/**
 * @file layout.hpp
 *
 * @brief Lays out a weighted graph in low dimension by maximizing an
 * edge-likelihood objective with negative sampling.
 *
 * Training draws edges with probability proportional to their weight and
 * treats each draw as a binary edge, so edge weights never multiply the
 * gradient and the learning rate stays well behaved regardless of the weight
 * spread. Each positive update is paired with a handful of repulsive updates
 * against vertices drawn from the noise distribution. Multiple workers update
 * the shared embedding without locks; on sparse graphs their writes rarely
 * collide, and single-worker runs are fully deterministic.
 */

namespace knnvis {

enum class LinkKind {
    InverseQuadratic,   // f(x) = 1 / (1 + a x^2)
    SigmoidOfSquare,    // f(x) = 1 / (1 + exp(x^2))
};

/**
 * @brief Monotone decreasing map from embedding distance to edge probability.
 *
 * All evaluations take the squared distance; nothing needs the root.
 */
struct LinkFunction {
    LinkKind kind = LinkKind::InverseQuadratic;
    double a = 1.0;

    double probability(double d2) const {
        if (kind == LinkKind::InverseQuadratic) return 1.0 / (1.0 + a * d2);
        return 1.0 / (1.0 + std::exp(d2));
    }

    /** log f(d), safe against exp overflow for the sigmoid form. */
    double log_probability(double d2) const {
        if (kind == LinkKind::InverseQuadratic) return -std::log1p(a * d2);
        return -softplus(d2);
    }

    /** log(1 - f(d)); -inf at d = 0 for the inverse-quadratic form. */
    double log_complement(double d2) const {
        if (kind == LinkKind::InverseQuadratic) {
            return std::log(a * d2) - std::log1p(a * d2);
        }
        return -softplus(-d2);
    }

    /** c such that grad_yi log f = c * (yi - yj). */
    double attraction_coeff(double d2) const {
        if (kind == LinkKind::InverseQuadratic) return -2.0 * a / (1.0 + a * d2);
        return -2.0 / (1.0 + std::exp(-d2));
    }

    /** c such that grad_yi log(1 - f) = c * (yi - yk); epsilon guards the d -> 0 pole. */
    double repulsion_coeff(double d2, double epsilon) const {
        if (kind == LinkKind::InverseQuadratic) {
            return 2.0 / ((d2 + epsilon) * (1.0 + a * d2));
        }
        return 2.0 / (1.0 + std::exp(d2));
    }

private:
    static double softplus(double u) {
        return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
    }
};

/** Tunables of the layout stage. */
struct LayoutConfig {
    std::uint32_t dim = 2;
    LinkFunction link{};
    std::uint32_t negatives = 5;       // repulsive samples per positive edge
    double gamma = 7.0;                // weight of each repulsive term
    std::uint64_t total_samples = 0;   // edge samples over the whole run
    double initial_rate = 1.0;
    std::uint32_t workers = 1;
    double clip = 5.0;                 // per-component gradient clamp
    double epsilon = 0.1;
    std::uint64_t seed = 1;
};

/** Linear decay from the initial rate to zero over the sample budget. */
inline double learning_rate(double initial_rate, std::uint64_t t, std::uint64_t total) {
    const double remaining = 1.0 - static_cast<double>(t) / static_cast<double>(total);
    return initial_rate * (remaining > 0.0 ? remaining : 0.0);
}

/**
 * @brief N coordinate vectors of the output space, row-major 32-bit floats.
 */
class Embedding {
public:
    Embedding(std::size_t n_points, std::size_t dim)
        : n_(n_points), dim_(dim), coords_(n_points * dim, 0.0f) {
        if (dim_ < 1) throw std::invalid_argument("Embedding: dimension must be at least 1");
    }

    std::size_t n_points() const { return n_; }
    std::size_t dim() const { return dim_; }

    std::span<const float> row(PointId i) const {
        return {coords_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }
    std::span<float> mutable_row(PointId i) {
        return {coords_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }
    std::span<const float> values() const { return coords_; }
    std::span<float> mutable_values() { return coords_; }

private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<float> coords_;
};

/** Tiny uniform jitter around the origin, |coordinate| <= 5e-4. */
inline Embedding initialize_embedding(std::size_t n, std::size_t dim, Rng rng) {
    Embedding embedding(n, dim);
    auto values = embedding.mutable_values();
    for (auto& v : values) {
        v = static_cast<float>((rng.uniform() - 0.5) * 1e-3);
    }
    return embedding;
}

/** Edge probability between two embedded points (Euclidean distance through the link). */
inline double edge_probability(const LinkFunction& link, std::span<const float> yi,
                               std::span<const float> yj) {
    if (yi.size() != yj.size()) {
        throw std::invalid_argument("edge_probability: dimension mismatch");
    }
    return link.probability(detail::sqdist(yi.data(), yj.data(), yi.size()));
}

/**
 * Gradient of log f with respect to both endpoints of a positive edge.
 * The yj gradient is the negation of the yi gradient.
 */
template <typename T>
void positive_gradient(const LinkFunction& link, std::span<const T> yi, std::span<const T> yj,
                       std::span<T> grad_i, std::span<T> grad_j) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < yi.size(); ++c) {
        const double d = static_cast<double>(yi[c]) - static_cast<double>(yj[c]);
        d2 += d * d;
    }
    const double coeff = link.attraction_coeff(d2);
    for (std::size_t c = 0; c < yi.size(); ++c) {
        const double g = coeff * (static_cast<double>(yi[c]) - static_cast<double>(yj[c]));
        grad_i[c] = static_cast<T>(g);
        grad_j[c] = static_cast<T>(-g);
    }
}

/**
 * Gradient of gamma * log(1 - f) with respect to the source and a sampled
 * negative. Repulsion decays as 1/d^3 for the inverse-quadratic link.
 */
template <typename T>
void negative_gradient(const LinkFunction& link, double gamma, double epsilon,
                       std::span<const T> yi, std::span<const T> yk,
                       std::span<T> grad_i, std::span<T> grad_k) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < yi.size(); ++c) {
        const double d = static_cast<double>(yi[c]) - static_cast<double>(yk[c]);
        d2 += d * d;
    }
    const double coeff = gamma * link.repulsion_coeff(d2, epsilon);
    for (std::size_t c = 0; c < yi.size(); ++c) {
        const double g = coeff * (static_cast<double>(yi[c]) - static_cast<double>(yk[c]));
        grad_i[c] = static_cast<T>(g);
        grad_k[c] = static_cast<T>(-g);
    }
}

/**
 * @brief Incremental optimizer state: embedding, sampling tables and progress.
 *
 * `run_until` advances training to a given sample index, so callers can
 * interleave training with objective snapshots. Worker generators persist
 * across calls; running to T in one call or in chunks produces the same
 * single-worker result.
 */
class Trainer {
public:
    Trainer(const WeightedGraph& graph, const LayoutConfig& cfg)
        : graph_(&graph), cfg_(cfg),
          embedding_(initialize_embedding(graph.n, cfg.dim, Rng(cfg.seed, 1))),
          edge_alias_(graph.weights),
          noise_(graph) {
        if (graph.directed_edge_count() == 0) {
            throw std::invalid_argument("Trainer: graph has no edges");
        }
        if (cfg.total_samples < 1) {
            throw std::invalid_argument("Trainer: total_samples must be at least 1");
        }
        const unsigned workers = resolve_workers(cfg.workers);
        worker_rng_.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            worker_rng_.push_back(Rng(cfg.seed, 0).fork(64 + w));
        }
    }

    std::uint64_t samples_done() const { return done_; }
    const Embedding& embedding() const { return embedding_; }
    Embedding take_embedding() && { return std::move(embedding_); }

    void run_until(std::uint64_t target) {
        target = std::min(target, cfg_.total_samples);
        if (target <= done_) return;
        const std::uint64_t todo = target - done_;
        const unsigned workers = static_cast<unsigned>(worker_rng_.size());

        if (workers <= 1) {
            worker_chunk(todo, worker_rng_[0]);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(workers - 1);
            const std::uint64_t share = todo / workers;
            const std::uint64_t rem = todo % workers;
            for (unsigned w = 1; w < workers; ++w) {
                const std::uint64_t count = share + (w < rem ? 1 : 0);
                pool.emplace_back([this, count, w] { worker_chunk(count, worker_rng_[w]); });
            }
            worker_chunk(share + (0 < rem ? 1 : 0), worker_rng_[0]);
            for (auto& t : pool) t.join();
        }
        done_ = target;

        for (float v : embedding_.values()) {
            if (!std::isfinite(v)) {
                throw std::runtime_error("Trainer: non-finite coordinate after update");
            }
        }
    }

private:
    static float load(float& slot) {
        return std::atomic_ref<float>(slot).load(std::memory_order_relaxed);
    }
    static void store(float& slot, float value) {
        std::atomic_ref<float>(slot).store(value, std::memory_order_relaxed);
    }

    void worker_chunk(std::uint64_t count, Rng& rng) {
        if (count == 0) return;
        const std::uint32_t s = cfg_.dim;
        const double clip = cfg_.clip;
        const double total = static_cast<double>(cfg_.total_samples);
        float* coords = embedding_.mutable_values().data();

        std::vector<double> yi(s), other(s), acc(s);
        constexpr std::uint64_t kFlush = 1024;
        std::uint64_t since = 0;
        std::uint64_t t_view = progress_.load(std::memory_order_relaxed);

        for (std::uint64_t c = 0; c < count; ++c) {
            const double frac = static_cast<double>(t_view + since) / total;
            const double rate = cfg_.initial_rate * (frac < 1.0 ? 1.0 - frac : 0.0);

            const std::size_t e = edge_alias_.sample(rng);
            const PointId src = graph_->sources[e];
            const PointId dst = graph_->targets[e];
            float* yi_slot = coords + static_cast<std::size_t>(src) * s;
            float* yj_slot = coords + static_cast<std::size_t>(dst) * s;

            double d2 = 0.0;
            for (std::uint32_t k = 0; k < s; ++k) {
                yi[k] = load(yi_slot[k]);
                other[k] = load(yj_slot[k]);
                const double d = yi[k] - other[k];
                d2 += d * d;
            }
            const double coeff = cfg_.link.attraction_coeff(d2);
            for (std::uint32_t k = 0; k < s; ++k) {
                const double g = std::clamp(coeff * (yi[k] - other[k]), -clip, clip);
                acc[k] = g;
                store(yj_slot[k], static_cast<float>(other[k] - rate * g));
            }

            for (std::uint32_t m = 0; m < cfg_.negatives; ++m) {
                const auto drawn = sample_negative(noise_, rng, src, dst);
                if (!drawn) break;
                float* yk_slot = coords + static_cast<std::size_t>(*drawn) * s;
                double dk2 = 0.0;
                for (std::uint32_t k = 0; k < s; ++k) {
                    other[k] = load(yk_slot[k]);
                    const double d = yi[k] - other[k];
                    dk2 += d * d;
                }
                const double ncoeff = cfg_.gamma * cfg_.link.repulsion_coeff(dk2, cfg_.epsilon);
                for (std::uint32_t k = 0; k < s; ++k) {
                    const double g = std::clamp(ncoeff * (yi[k] - other[k]), -clip, clip);
                    acc[k] += g;
                    store(yk_slot[k], static_cast<float>(other[k] - rate * g));
                }
            }

            // The source accumulates its positive and all repulsive pulls and is
            // written once, re-clamped so no write ever exceeds rate * clip.
            for (std::uint32_t k = 0; k < s; ++k) {
                store(yi_slot[k], static_cast<float>(yi[k] + rate * std::clamp(acc[k], -clip, clip)));
            }

            if (++since == kFlush) {
                t_view = progress_.fetch_add(kFlush, std::memory_order_relaxed) + kFlush;
                since = 0;
            }
        }
        progress_.fetch_add(since, std::memory_order_relaxed);
    }

    const WeightedGraph* graph_;
    LayoutConfig cfg_;
    Embedding embedding_;
    AliasTable edge_alias_;
    NoiseDistribution noise_;
    std::vector<Rng> worker_rng_;
    std::atomic<std::uint64_t> progress_{0};
    std::uint64_t done_ = 0;
};

/** Runs the full sample budget and returns the final embedding. */
inline Embedding train(const WeightedGraph& graph, const LayoutConfig& cfg) {
    Trainer trainer(graph, cfg);
    trainer.run_until(cfg.total_samples);
    return std::move(trainer).take_embedding();
}

namespace detail {

inline double embedded_d2(const Embedding& e, PointId i, PointId j) {
    return sqdist(e.row(i).data(), e.row(j).data(), e.dim());
}

} // namespace detail

/**
 * Monte-Carlo estimate of the negative-sampled objective: edges drawn with
 * probability proportional to weight, each charged its log-probability plus
 * `negatives` repulsive terms against noise draws. Scaled back by the total
 * edge mass, so it estimates the weighted sum, not the per-draw mean.
 */
inline double objective_estimate(const WeightedGraph& graph, const Embedding& embedding,
                                 const LayoutConfig& cfg, std::uint64_t sample_count, Rng rng) {
    const AliasTable edges(graph.weights);
    const NoiseDistribution noise(graph);
    double total = 0.0;
    for (std::uint64_t i = 0; i < sample_count; ++i) {
        const std::size_t e = edges.sample(rng);
        const PointId src = graph.sources[e];
        const PointId dst = graph.targets[e];
        double term = cfg.link.log_probability(detail::embedded_d2(embedding, src, dst));
        for (std::uint32_t m = 0; m < cfg.negatives; ++m) {
            const auto drawn = sample_negative(noise, rng, src, dst);
            if (!drawn) break;
            term += cfg.gamma *
                    cfg.link.log_complement(detail::embedded_d2(embedding, src, *drawn) + cfg.epsilon);
        }
        total += term;
    }
    return graph.total_weight() * total / static_cast<double>(sample_count);
}

/**
 * Exact expectation of the negative-sampled objective: the same quantity
 * `objective_estimate` converges to, computed by full summation over the
 * conditional noise distribution instead of sampling. Quadratic; small graphs only.
 */
inline double sampled_objective_expectation(const WeightedGraph& graph, const Embedding& embedding,
                                            const LayoutConfig& cfg) {
    const NoiseDistribution noise(graph);
    double noise_total = 0.0;
    for (std::size_t v = 0; v < graph.n; ++v) noise_total += noise.vertex_weight(static_cast<PointId>(v));

    double total = 0.0;
    for (std::size_t e = 0; e < graph.directed_edge_count(); ++e) {
        const PointId src = graph.sources[e];
        const PointId dst = graph.targets[e];
        double term = cfg.link.log_probability(detail::embedded_d2(embedding, src, dst));

        const double denom = noise_total - noise.vertex_weight(src) - noise.vertex_weight(dst);
        if (denom > 0.0) {
            double expectation = 0.0;
            for (std::size_t v = 0; v < graph.n; ++v) {
                if (v == src || v == dst) continue;
                const double p = noise.vertex_weight(static_cast<PointId>(v)) / denom;
                if (p <= 0.0) continue;
                expectation += p * cfg.link.log_complement(
                    detail::embedded_d2(embedding, src, static_cast<PointId>(v)) + cfg.epsilon);
            }
            term += cfg.gamma * static_cast<double>(cfg.negatives) * expectation;
        }
        total += graph.weights[e] * term;
    }
    return total;
}

/**
 * Full graph likelihood: weighted log-probability over observed edges plus a
 * gamma-weighted log-complement over every ordered non-edge pair. Quadratic;
 * guarded against large graphs.
 */
inline double full_objective(const WeightedGraph& graph, const Embedding& embedding,
                             const LayoutConfig& cfg) {
    if (graph.n > 4096) {
        throw std::invalid_argument("full_objective: quadratic evaluator, graph too large");
    }
    double total = 0.0;
    for (std::size_t e = 0; e < graph.directed_edge_count(); ++e) {
        total += graph.weights[e] *
                 cfg.link.log_probability(detail::embedded_d2(embedding, graph.sources[e], graph.targets[e]));
    }
    for (std::size_t i = 0; i < graph.n; ++i) {
        const auto row = graph.targets_of(static_cast<PointId>(i));
        for (std::size_t j = 0; j < graph.n; ++j) {
            if (i == j) continue;
            if (std::binary_search(row.begin(), row.end(), static_cast<PointId>(j))) continue;
            total += cfg.gamma * cfg.link.log_complement(
                detail::embedded_d2(embedding, static_cast<PointId>(i), static_cast<PointId>(j)) + cfg.epsilon);
        }
    }
    return total;
}

} // namespace knnvis

#endif
