#ifndef KNNVIS_KNN_HPP
#define KNNVIS_KNN_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "neighbors.hpp"
#include "rptree.hpp"

/**
 * @file knn.hpp
 *
 * @brief Neighbor exploring: refine an approximate KNN graph on the premise
 * that a neighbor of my neighbor is also likely to be my neighbor.
 */

namespace knnvis {

/** Tunables for the whole graph-construction stage. */
struct GraphConfig {
    std::uint32_t trees = 15;
    std::uint32_t neighbors = 150;
    std::uint32_t explore_iters = 1;
    std::uint32_t leaf_capacity = 0;   // 0 resolves to max(neighbors, 32)
    std::uint64_t seed = 1;
    std::uint32_t workers = 1;
};

namespace detail {

// Reverse adjacency of the directed KNN graph, each list capped at k entries
// by (distance, id). The cap bounds the join cost on hub-heavy graphs without
// resorting to random subsampling, so passes stay deterministic.
inline NeighborLists reverse_lists(const NeighborLists& current, std::uint32_t k) {
    const std::size_t n = current.size();
    std::vector<BoundedNeighborHeap> heaps(n, BoundedNeighborHeap(k));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ids = current.ids(static_cast<PointId>(i));
        const auto d2s = current.dists(static_cast<PointId>(i));
        for (std::size_t j = 0; j < ids.size(); ++j) {
            heaps[ids[j]].push(d2s[j], static_cast<PointId>(i));
        }
    }
    NeighborLists reversed(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto sorted = heaps[i].take_sorted();
        reversed.set_list(static_cast<PointId>(i), sorted);
    }
    return reversed;
}

} // namespace detail

/**
 * One neighbor-exploring pass. Each point's bounded heap is seeded with its
 * current neighbors, then offered every point reachable through one hop of
 * the graph treated as undirected: neighbors of neighbors, neighbors of
 * reverse neighbors, and the reverse neighbors themselves. Seeding guarantees
 * recall never decreases across passes; joining through reverse edges lets a
 * pass reach fringe points whose own lists all point inward, where a purely
 * forward join stalls.
 * The input lists are read-only, so points process independently in parallel.
 */
inline NeighborLists explore_once(const DataMatrix& data, const NeighborLists& current,
                                  std::uint32_t k, unsigned workers = 1) {
    const std::size_t n = current.size();
    const std::size_t dim = data.dim();
    const NeighborLists reversed = detail::reverse_lists(current, k);
    NeighborLists next(n, k);

    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, unsigned) {
        std::vector<PointId> seen(n, kInvalidPoint);
        std::vector<PointId> bridged(n, kInvalidPoint);
        BoundedNeighborHeap heap(k);
        for (std::size_t p = begin; p < end; ++p) {
            const PointId pid = static_cast<PointId>(p);
            const float* prow = data.row(pid).data();
            heap.clear();
            seen[pid] = pid;

            const auto ids = current.ids(pid);
            const auto d2s = current.dists(pid);
            for (std::size_t j = 0; j < ids.size(); ++j) {
                seen[ids[j]] = pid;
                heap.push(d2s[j], ids[j]);
            }
            const auto rev_ids = reversed.ids(pid);
            const auto rev_d2s = reversed.dists(pid);
            for (std::size_t j = 0; j < rev_ids.size(); ++j) {
                if (seen[rev_ids[j]] == pid) continue;
                seen[rev_ids[j]] = pid;
                heap.push(rev_d2s[j], rev_ids[j]);
            }

            auto join_through = [&](PointId j) {
                if (bridged[j] == pid) return;
                bridged[j] = pid;
                for (PointId l : current.ids(j)) {
                    if (seen[l] == pid) continue;
                    seen[l] = pid;
                    heap.push(detail::sqdist(prow, data.row(l).data(), dim), l);
                }
                for (PointId l : reversed.ids(j)) {
                    if (seen[l] == pid) continue;
                    seen[l] = pid;
                    heap.push(detail::sqdist(prow, data.row(l).data(), dim), l);
                }
            };
            for (PointId j : ids) join_through(j);
            for (PointId j : rev_ids) join_through(j);

            const auto sorted = heap.take_sorted();
            next.set_list(pid, sorted);
        }
    });
    return next;
}

/**
 * Full graph construction: build the forest, take the k best candidates per
 * point, then run the configured number of exploring passes.
 */
inline NeighborLists build_knn_graph(const DataMatrix& data, const GraphConfig& cfg) {
    ForestParams params;
    params.trees = cfg.trees;
    params.leaf_capacity = cfg.leaf_capacity > 0
        ? cfg.leaf_capacity
        : std::max<std::uint32_t>(cfg.neighbors, 32);

    const RpForest forest = build_forest(data, params, Rng(cfg.seed, 0), cfg.workers);
    NeighborLists lists = knn_from_forest(forest, data, cfg.neighbors, cfg.workers);
    for (std::uint32_t iter = 0; iter < cfg.explore_iters; ++iter) {
        lists = explore_once(data, lists, cfg.neighbors, cfg.workers);
    }
    return lists;
}

} // namespace knnvis

#endif
