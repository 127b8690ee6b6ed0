#ifndef KNNVIS_CORE_HPP
#define KNNVIS_CORE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

/**
 * @file core.hpp
 *
 * @brief Shared domain types, the distance kernel and deterministic RNG plumbing.
 */

namespace knnvis {

/** Index of a point inside a `DataMatrix`. Only meaningful against the matrix it came from. */
using PointId = std::uint32_t;

inline constexpr PointId kInvalidPoint = static_cast<PointId>(-1);

/**
 * @brief Dense row-major matrix of input vectors.
 *
 * Rows are points, columns are feature dimensions. Values are stored as 32-bit
 * floats; all heavier math downstream accumulates in doubles. The matrix is
 * immutable after construction and safe to share across worker threads.
 */
class DataMatrix {
public:
    /**
     * @param n_points Number of rows, at least 1.
     * @param dim Number of columns, at least 1.
     * @param values Row-major storage of exactly `n_points * dim` finite values.
     */
    DataMatrix(std::size_t n_points, std::size_t dim, std::vector<float> values)
        : n_(n_points), dim_(dim), values_(std::move(values)) {
        if (n_ < 1 || dim_ < 1) {
            throw std::invalid_argument("DataMatrix: need at least one point and one dimension");
        }
        if (values_.size() != n_ * dim_) {
            throw std::invalid_argument("DataMatrix: storage size does not match n_points * dim");
        }
        for (float v : values_) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("DataMatrix: non-finite value");
            }
        }
    }

    std::size_t n_points() const { return n_; }
    std::size_t dim() const { return dim_; }

    std::span<const float> row(PointId i) const {
        return {values_.data() + static_cast<std::size_t>(i) * dim_, dim_};
    }

    std::span<const float> values() const { return values_; }

private:
    std::size_t n_;
    std::size_t dim_;
    std::vector<float> values_;
};

namespace detail {

// Unchecked kernel; callers validate dimensions once, not per pair.
inline double sqdist(const float* a, const float* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
        acc += d * d;
    }
    return acc;
}

} // namespace detail

/**
 * Squared Euclidean distance between two rows. Distances stay squared through
 * the whole pipeline; nothing downstream needs the root.
 */
inline double squared_distance(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("squared_distance: dimension mismatch");
    }
    return detail::sqdist(a.data(), b.data(), a.size());
}

/**
 * @brief Splittable counter-based random number generator.
 *
 * A generator is identified by a (seed, stream) pair; the same pair always
 * reproduces the same draw sequence. `fork(s)` derives a child generator from
 * the parent's identity alone, so forking is independent of how many values
 * the parent has produced. Workers each own a fork and never share state.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), state_(mix64(mix64(seed) ^ (0x9E3779B97F4A7C15ULL + mix64(stream ^ 0xD1B54A32D192ED03ULL)))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /** Child generator on stream `s`, fully determined by this generator's (seed, stream). */
    Rng fork(std::uint64_t s) const {
        return Rng(mix64(seed_ ^ mix64(stream_ + 0x9E3779B97F4A7C15ULL)), s);
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    /** Uniform double in [0, 1). */
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /** Uniform integer in [0, n). Requires n >= 1. */
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /** Standard normal via the Box-Muller transform; platform-independent. */
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/** Worker count to use when the caller passes 0: hardware concurrency, capped. */
inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : (hw > 8 ? 8 : hw);
}

/**
 * Runs `fn(begin, end, worker_index)` over contiguous chunks of [0, n).
 * With one worker the call runs inline on the current thread.
 */
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (workers > n) workers = static_cast<unsigned>(n == 0 ? 1 : n);
    if (workers <= 1) {
        fn(std::size_t{0}, n, 0u);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = n / workers;
    const std::size_t rem = n % workers;
    std::size_t begin = 0;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t end = begin + chunk + (w < rem ? 1 : 0);
        if (w + 1 == workers) {
            fn(begin, end, w);
        } else {
            pool.emplace_back([&fn, begin, end, w] { fn(begin, end, w); });
        }
        begin = end;
    }
    for (auto& t : pool) t.join();
}

} // namespace knnvis

#endif
