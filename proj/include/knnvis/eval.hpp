#ifndef KNNVIS_EVAL_HPP
#define KNNVIS_EVAL_HPP

#include <algorithm>
#include <cstdint>
#include <iostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "layout.hpp"
#include "neighbors.hpp"

/**
 * @file eval.hpp
 *
 * @brief Ground-truth oracles and quality metrics: exact KNN for graph recall
 * and a leave-one-out KNN classifier over embeddings.
 */

namespace knnvis {

struct RecallReport {
    std::vector<double> per_point;
    double mean = 0.0;
    std::uint32_t k = 0;
    std::size_t n = 0;
};

/** Per-point categorical labels with dense ids in first-appearance order. */
struct LabeledSet {
    std::vector<std::uint32_t> ids;
    std::vector<std::string> names;   // names[id] is the original token

    std::size_t size() const { return ids.size(); }
    std::uint32_t label_count() const { return static_cast<std::uint32_t>(names.size()); }
};

/**
 * Exact k nearest neighbors by squared distance, ties broken toward the
 * smaller id — the same rule the approximate pipeline uses. Quadratic work;
 * points beyond 100,000 only get a warning, not a refusal.
 */
inline NeighborLists brute_force_knn(const DataMatrix& data, std::uint32_t k,
                                     unsigned workers = 1) {
    const std::size_t n = data.n_points();
    if (k >= n) {
        throw std::invalid_argument("brute_force_knn: k must be smaller than the point count");
    }
    if (n > 100000) {
        std::cerr << "brute_force_knn: " << n << " points implies quadratic work; expect a long wait\n";
    }
    const std::size_t dim = data.dim();
    NeighborLists lists(n, k);
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, unsigned) {
        BoundedNeighborHeap heap(k);
        for (std::size_t i = begin; i < end; ++i) {
            const float* a = data.row(static_cast<PointId>(i)).data();
            heap.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                heap.push(detail::sqdist(a, data.row(static_cast<PointId>(j)).data(), dim),
                          static_cast<PointId>(j));
            }
            const auto sorted = heap.take_sorted();
            lists.set_list(static_cast<PointId>(i), sorted);
        }
    });
    return lists;
}

/** Fraction of each point's true neighbors present in its approximate list, set semantics. */
inline RecallReport recall(const NeighborLists& approx, const NeighborLists& exact) {
    if (approx.size() != exact.size() || approx.capacity() != exact.capacity()) {
        throw std::invalid_argument("recall: shape mismatch between approximate and exact lists");
    }
    RecallReport report;
    report.n = exact.size();
    report.k = static_cast<std::uint32_t>(exact.capacity());
    report.per_point.resize(report.n, 0.0);

    std::vector<PointId> truth;
    double total = 0.0;
    for (std::size_t i = 0; i < report.n; ++i) {
        const auto t = exact.ids(static_cast<PointId>(i));
        truth.assign(t.begin(), t.end());
        std::sort(truth.begin(), truth.end());
        std::size_t hits = 0;
        for (PointId a : approx.ids(static_cast<PointId>(i))) {
            hits += std::binary_search(truth.begin(), truth.end(), a);
        }
        const double r = exact.capacity() == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(exact.capacity());
        report.per_point[i] = r;
        total += r;
    }
    report.mean = report.n == 0 ? 0.0 : total / static_cast<double>(report.n);
    return report;
}

/**
 * Leave-one-out accuracy of a k-nearest-neighbor classifier run on the
 * embedded coordinates. Majority vote; vote ties resolve to the smallest
 * label id, neighbor-distance ties to the smaller point id.
 */
inline double knn_classify_accuracy(const Embedding& embedding, const LabeledSet& labels,
                                    std::uint32_t k, unsigned workers = 1) {
    const std::size_t n = embedding.n_points();
    if (labels.size() != n) {
        throw std::invalid_argument("knn_classify_accuracy: label count does not match embedding");
    }
    if (k >= n) {
        throw std::invalid_argument("knn_classify_accuracy: k must be smaller than the point count");
    }
    const std::size_t dim = embedding.dim();
    std::vector<std::uint32_t> correct(resolve_workers(workers) == 0 ? 1 : resolve_workers(workers), 0);

    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
        BoundedNeighborHeap heap(k);
        std::vector<std::uint32_t> votes(labels.label_count());
        std::uint32_t local = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const float* a = embedding.row(static_cast<PointId>(i)).data();
            heap.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                heap.push(detail::sqdist(a, embedding.row(static_cast<PointId>(j)).data(), dim),
                          static_cast<PointId>(j));
            }
            std::fill(votes.begin(), votes.end(), 0);
            for (const auto& [d2, id] : heap.take_sorted()) {
                ++votes[labels.ids[id]];
            }
            std::uint32_t best = 0;
            for (std::uint32_t c = 1; c < votes.size(); ++c) {
                if (votes[c] > votes[best]) best = c;
            }
            local += (best == labels.ids[i]);
        }
        correct[w] += local;
    });

    std::uint64_t total = 0;
    for (auto c : correct) total += c;
    return static_cast<double>(total) / static_cast<double>(n);
}

} // namespace knnvis

#endif
