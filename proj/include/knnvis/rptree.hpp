#ifndef KNNVIS_RPTREE_HPP
#define KNNVIS_RPTREE_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "core.hpp"
#include "neighbors.hpp"

/**
 * @file rptree.hpp
 *
 * @brief Random projection tree forest supplying nearest-neighbor candidates.
 *
 * Every split hyperplane is the perpendicular bisector of two points sampled
 * without replacement from the node's subset; recursion stops once a subset
 * fits the leaf capacity. Candidates for a point are the members of the leaf
 * it lands in, unioned over all trees. No backtracking is done during lookup;
 * accuracy is recovered later by neighbor exploring.
 */

namespace knnvis {

struct ForestParams {
    std::uint32_t trees = 1;
    std::uint32_t leaf_capacity = 32;
};

class RpTree {
public:
    struct Node {
        std::int32_t left = -1;             // < 0 marks a leaf
        std::int32_t right = -1;
        std::uint32_t normal_offset = 0;    // split only: index into normals()
        double plane_offset = 0.0;          // split only: point goes left iff dot < offset
        std::uint32_t begin = 0;            // leaf only: members slice
        std::uint32_t count = 0;

        bool is_leaf() const { return left < 0; }
    };

    const std::vector<Node>& nodes() const { return nodes_; }
    std::span<const float> normal(const Node& node, std::size_t dim) const {
        return {normals_.data() + node.normal_offset, dim};
    }

    std::span<const PointId> leaf_members(std::uint32_t node_index) const {
        const Node& node = nodes_[node_index];
        return {members_.data() + node.begin, node.count};
    }

    /** Members of the leaf that contains point p (p included). */
    std::span<const PointId> co_members(PointId p) const {
        return leaf_members(leaf_of_[p]);
    }

    std::size_t leaf_count() const {
        std::size_t c = 0;
        for (const auto& n : nodes_) c += n.is_leaf();
        return c;
    }

private:
    friend RpTree build_tree(const DataMatrix&, std::uint32_t, Rng);

    std::vector<Node> nodes_;
    std::vector<PointId> members_;     // permutation of all ids; leaves own slices
    std::vector<std::uint32_t> leaf_of_;
    std::vector<float> normals_;
};

inline RpTree build_tree(const DataMatrix& data, std::uint32_t leaf_capacity, Rng rng) {
    const std::size_t n = data.n_points();
    const std::size_t dim = data.dim();

    RpTree tree;
    tree.members_.resize(n);
    std::iota(tree.members_.begin(), tree.members_.end(), PointId{0});
    tree.leaf_of_.resize(n, 0);

    struct Pending {
        std::uint32_t node;
        std::uint32_t begin;
        std::uint32_t end;
    };
    std::vector<Pending> stack;
    tree.nodes_.push_back({});
    stack.push_back({0, 0, static_cast<std::uint32_t>(n)});

    std::vector<double> normal(dim);
    constexpr int kSampleRetries = 16;

    while (!stack.empty()) {
        const Pending cur = stack.back();
        stack.pop_back();
        const std::uint32_t size = cur.end - cur.begin;

        auto make_leaf = [&] {
            RpTree::Node& node = tree.nodes_[cur.node];
            node.begin = cur.begin;
            node.count = size;
            for (std::uint32_t m = cur.begin; m < cur.end; ++m) {
                tree.leaf_of_[tree.members_[m]] = cur.node;
            }
        };

        if (size <= leaf_capacity) {
            make_leaf();
            continue;
        }

        // Sample two distinct points; retry a bounded number of times against
        // duplicate coordinates and degenerate one-sided partitions, then give
        // up and keep the subset as a leaf.
        PointId* first = tree.members_.data() + cur.begin;
        PointId* last = tree.members_.data() + cur.end;
        PointId* mid = first;
        bool split_found = false;
        double plane_offset = 0.0;

        for (int attempt = 0; attempt < kSampleRetries && !split_found; ++attempt) {
            const std::uint32_t ai = static_cast<std::uint32_t>(rng.below(size));
            std::uint32_t bi = static_cast<std::uint32_t>(rng.below(size - 1));
            if (bi >= ai) ++bi;
            const auto a = data.row(first[ai]);
            const auto b = data.row(first[bi]);

            double norm2 = 0.0;
            plane_offset = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double diff = static_cast<double>(a[c]) - static_cast<double>(b[c]);
                normal[c] = diff;
                norm2 += diff * diff;
                plane_offset += diff * (static_cast<double>(a[c]) + static_cast<double>(b[c])) * 0.5;
            }
            if (norm2 == 0.0) continue;

            mid = std::partition(first, last, [&](PointId p) {
                const auto row = data.row(p);
                double dot = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    dot += normal[c] * static_cast<double>(row[c]);
                }
                return dot < plane_offset;   // ties go right
            });
            split_found = (mid != first && mid != last);
        }

        if (!split_found) {
            make_leaf();
            continue;
        }

        const std::uint32_t normal_offset = static_cast<std::uint32_t>(tree.normals_.size());
        tree.normals_.insert(tree.normals_.end(), normal.begin(), normal.end());

        const std::int32_t left_index = static_cast<std::int32_t>(tree.nodes_.size());
        RpTree::Node& node = tree.nodes_[cur.node];
        node.left = left_index;
        node.right = left_index + 1;
        node.normal_offset = normal_offset;
        node.plane_offset = plane_offset;
        tree.nodes_.push_back({});
        tree.nodes_.push_back({});

        const std::uint32_t split = static_cast<std::uint32_t>(mid - tree.members_.data());
        stack.push_back({static_cast<std::uint32_t>(left_index), cur.begin, split});
        stack.push_back({static_cast<std::uint32_t>(left_index + 1), split, cur.end});
    }

    return tree;
}

class RpForest {
public:
    RpForest(std::vector<RpTree> trees, std::uint32_t leaf_capacity)
        : trees_(std::move(trees)), leaf_capacity_(leaf_capacity) {}

    const std::vector<RpTree>& trees() const { return trees_; }
    std::uint32_t leaf_capacity() const { return leaf_capacity_; }

    /** Union of leaf co-members over all trees, excluding p. Sorted, unique. */
    std::vector<PointId> candidates_for(PointId p) const {
        std::vector<PointId> out;
        for (const auto& tree : trees_) {
            const auto slice = tree.co_members(p);
            out.insert(out.end(), slice.begin(), slice.end());
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        out.erase(std::remove(out.begin(), out.end(), p), out.end());
        return out;
    }

private:
    std::vector<RpTree> trees_;
    std::uint32_t leaf_capacity_;
};

/**
 * Builds `params.trees` random projection trees over the data. Trees build in
 * parallel; tree t always draws from the fork of `rng` on stream t, so the
 * forest is identical regardless of worker count, and a forest built with more
 * trees extends one built with fewer.
 */
inline RpForest build_forest(const DataMatrix& data, const ForestParams& params,
                             Rng rng, unsigned workers = 1) {
    if (params.trees < 1) {
        throw std::invalid_argument("build_forest: need at least one tree");
    }
    if (params.leaf_capacity < 1) {
        throw std::invalid_argument("build_forest: leaf capacity must be at least 1");
    }
    std::vector<RpTree> trees(params.trees);
    parallel_for(params.trees, workers, [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t t = begin; t < end; ++t) {
            trees[t] = build_tree(data, params.leaf_capacity, rng.fork(t));
        }
    });
    return RpForest(std::move(trees), params.leaf_capacity);
}

/**
 * For every point, the k candidates with smallest squared distance among its
 * forest candidates (fewer when the candidate set is smaller than k).
 */
inline NeighborLists knn_from_forest(const RpForest& forest, const DataMatrix& data,
                                     std::uint32_t k, unsigned workers = 1) {
    if (k < 1) throw std::invalid_argument("knn_from_forest: k must be at least 1");
    const std::size_t n = data.n_points();
    const std::size_t dim = data.dim();
    NeighborLists lists(n, k);

    parallel_for(n, workers, [&](std::size_t begin, std::size_t end, unsigned) {
        std::vector<PointId> seen(n, kInvalidPoint);
        BoundedNeighborHeap heap(k);
        for (std::size_t p = begin; p < end; ++p) {
            const PointId pid = static_cast<PointId>(p);
            const float* prow = data.row(pid).data();
            heap.clear();
            seen[pid] = pid;
            for (const auto& tree : forest.trees()) {
                for (PointId cand : tree.co_members(pid)) {
                    if (seen[cand] == pid) continue;
                    seen[cand] = pid;
                    heap.push(detail::sqdist(prow, data.row(cand).data(), dim), cand);
                }
            }
            const auto sorted = heap.take_sorted();
            lists.set_list(pid, sorted);
        }
    });
    return lists;
}

} // namespace knnvis

#endif
