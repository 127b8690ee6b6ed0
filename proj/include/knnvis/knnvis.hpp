#ifndef KNNVIS_KNNVIS_HPP
#define KNNVIS_KNNVIS_HPP

#include "core.hpp"
#include "eval.hpp"
#include "io.hpp"
#include "knn.hpp"
#include "layout.hpp"
#include "neighbors.hpp"
#include "pipeline.hpp"
#include "rptree.hpp"
#include "sampler.hpp"
#include "svg.hpp"
#include "synthetic.hpp"
#include "weighting.hpp"

/**
 * @file knnvis.hpp
 *
 * @brief Umbrella header: approximate KNN graph construction with random
 * projection trees plus neighbor exploring, and probabilistic graph layout
 * for 2D/3D visualization.
 */

#endif
