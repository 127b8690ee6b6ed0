#ifndef KNNVIS_SYNTHETIC_HPP
#define KNNVIS_SYNTHETIC_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "core.hpp"
#include "eval.hpp"

/**
 * @file synthetic.hpp
 *
 * @brief Bundled Gaussian-mixture generator, so runs and tests need no external data.
 */

namespace knnvis {

struct MixtureParams {
    std::size_t n = 1000;
    std::size_t dim = 10;
    std::uint32_t clusters = 2;
    double spread = 1.0;       // point standard deviation around its center
    std::uint64_t seed = 1;
};

struct Mixture {
    DataMatrix data;
    LabeledSet labels;
};

/**
 * Points drawn around cluster centers placed uniformly in [-10, 10]^dim;
 * point i belongs to cluster i mod clusters, so labels are balanced.
 */
inline Mixture gaussian_mixture(const MixtureParams& params) {
    if (params.clusters < 1) throw std::invalid_argument("gaussian_mixture: need at least one cluster");
    if (params.n < 1 || params.dim < 1) throw std::invalid_argument("gaussian_mixture: need points and dimensions");

    Rng center_rng = Rng(params.seed, 0).fork(1);
    std::vector<double> centers(static_cast<std::size_t>(params.clusters) * params.dim);
    for (auto& c : centers) c = (center_rng.uniform() * 2.0 - 1.0) * 10.0;

    Rng point_rng = Rng(params.seed, 0).fork(2);
    std::vector<float> values(params.n * params.dim);
    LabeledSet labels;
    labels.ids.resize(params.n);
    for (std::uint32_t c = 0; c < params.clusters; ++c) {
        labels.names.push_back("cluster" + std::to_string(c));
    }

    for (std::size_t i = 0; i < params.n; ++i) {
        const std::uint32_t cluster = static_cast<std::uint32_t>(i % params.clusters);
        labels.ids[i] = cluster;
        const double* center = centers.data() + static_cast<std::size_t>(cluster) * params.dim;
        for (std::size_t d = 0; d < params.dim; ++d) {
            values[i * params.dim + d] =
                static_cast<float>(center[d] + params.spread * point_rng.normal());
        }
    }
    return Mixture{DataMatrix(params.n, params.dim, std::move(values)), std::move(labels)};
}

} // namespace knnvis

#endif
