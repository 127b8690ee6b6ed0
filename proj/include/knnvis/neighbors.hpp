#ifndef KNNVIS_NEIGHBORS_HPP
#define KNNVIS_NEIGHBORS_HPP

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "core.hpp"

/**
 * @file neighbors.hpp
 *
 * @brief The approximate KNN graph representation and the bounded heap used to build it.
 */

namespace knnvis {

/**
 * @brief Keeps the k smallest (squared distance, id) pairs seen so far.
 *
 * Ordering is lexicographic on (distance, id), so distance ties resolve to the
 * smaller id. That rule is shared with the exact brute-force oracle, which
 * makes recall 1.0 attainable and the exploring fixed point exact.
 */
class BoundedNeighborHeap {
public:
    explicit BoundedNeighborHeap(std::size_t capacity) : cap_(capacity) {}

    void clear() { heap_.clear(); }
    std::size_t size() const { return heap_.size(); }

    void push(double dist2, PointId id) {
        const std::pair<double, PointId> entry{dist2, id};
        if (heap_.size() < cap_) {
            heap_.push_back(entry);
            std::push_heap(heap_.begin(), heap_.end());
        } else if (cap_ > 0 && entry < heap_.front()) {
            std::pop_heap(heap_.begin(), heap_.end());
            heap_.back() = entry;
            std::push_heap(heap_.begin(), heap_.end());
        }
    }

    /** Heap contents sorted ascending by (distance, id). Leaves the heap empty. */
    std::vector<std::pair<double, PointId>> take_sorted() {
        std::sort_heap(heap_.begin(), heap_.end());
        return std::move(heap_);
    }

private:
    std::size_t cap_;
    std::vector<std::pair<double, PointId>> heap_;
};

/**
 * @brief Per-point bounded neighbor lists: the evolving approximate KNN graph.
 *
 * Each list holds up to `capacity` (neighbor id, squared distance) entries,
 * sorted ascending by (distance, id), with no self loops and no duplicates.
 */
class NeighborLists {
public:
    NeighborLists(std::size_t n, std::size_t capacity)
        : n_(n), k_(capacity), len_(n, 0),
          ids_(n * capacity, kInvalidPoint), d2_(n * capacity, 0.0) {}

    std::size_t size() const { return n_; }
    std::size_t capacity() const { return k_; }

    std::uint32_t length(PointId i) const { return len_[i]; }

    std::span<const PointId> ids(PointId i) const {
        return {ids_.data() + static_cast<std::size_t>(i) * k_, len_[i]};
    }
    std::span<const double> dists(PointId i) const {
        return {d2_.data() + static_cast<std::size_t>(i) * k_, len_[i]};
    }

    /** Replaces list i with entries already sorted ascending by (distance, id). */
    void set_list(PointId i, std::span<const std::pair<double, PointId>> sorted) {
        if (sorted.size() > k_) {
            throw std::invalid_argument("NeighborLists: list exceeds capacity");
        }
        const std::size_t base = static_cast<std::size_t>(i) * k_;
        for (std::size_t j = 0; j < sorted.size(); ++j) {
            d2_[base + j] = sorted[j].first;
            ids_[base + j] = sorted[j].second;
        }
        len_[i] = static_cast<std::uint32_t>(sorted.size());
    }

    bool contains(PointId i, PointId neighbor) const {
        auto list = ids(i);
        return std::find(list.begin(), list.end(), neighbor) != list.end();
    }

private:
    std::size_t n_;
    std::size_t k_;
    std::vector<std::uint32_t> len_;
    std::vector<PointId> ids_;
    std::vector<double> d2_;
};

} // namespace knnvis

#endif
