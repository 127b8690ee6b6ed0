#ifndef KNNVIS_PIPELINE_HPP
#define KNNVIS_PIPELINE_HPP

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "eval.hpp"
#include "io.hpp"
#include "knn.hpp"
#include "layout.hpp"
#include "svg.hpp"
#include "weighting.hpp"

/**
 * @file pipeline.hpp
 *
 * @brief End-to-end run: ingest, graph construction, weighting, layout,
 * outputs and the run manifest.
 */

namespace knnvis {

struct PipelineOptions {
    std::string input;
    std::string output;
    std::string labels;
    std::string svg;
    std::string metrics_out;
    bool exact_recall = false;

    std::uint32_t trees = 15;
    std::optional<std::uint32_t> neighbors;        // default 150; desk-scale default 15
    std::uint32_t explore_iters = 1;
    std::uint32_t leaf_capacity = 0;
    double perplexity = 50.0;

    std::uint32_t dim = 2;
    LinkFunction link{};
    std::uint32_t negatives = 5;
    double gamma = 7.0;
    std::optional<std::uint64_t> samples_per_node; // default 10000; desk-scale default 20000
    double rate = 1.0;
    double clip = 5.0;
    double epsilon = 0.1;
    std::uint32_t workers = 0;                     // 0 resolves to hardware concurrency
    std::uint64_t seed = 1;
};

struct PipelineResult {
    std::size_t n = 0;
    std::size_t input_dim = 0;
    GraphConfig graph;
    LayoutConfig layout;
    std::uint64_t samples_per_node = 0;
    double graph_seconds = 0.0;
    double weight_seconds = 0.0;
    double layout_seconds = 0.0;
    double total_seconds = 0.0;
    std::optional<double> mean_recall;
    std::optional<double> knn_accuracy;
    std::string manifest_path;
};

namespace detail {

class StageTimer {
public:
    StageTimer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("[") + name + "] " + e.what());
    }
}

} // namespace detail

/**
 * Runs ingest -> graph -> weighting -> layout and writes every requested
 * output plus a manifest next to the embedding. Failures carry a stage tag.
 * With paper-scale defaults being wasteful below 10,000 points, small inputs
 * fall back to 15 neighbors and 20,000 samples per node unless the caller
 * pinned those values.
 */
inline PipelineResult run_pipeline(const PipelineOptions& options) {
    const detail::StageTimer total_timer;
    PipelineResult result;

    const DataMatrix data = detail::stage("ingest", [&] { return ingest_vectors(options.input); });
    result.n = data.n_points();
    result.input_dim = data.dim();

    std::optional<LabeledSet> labels;
    if (!options.labels.empty()) {
        labels = detail::stage("ingest", [&] { return ingest_labels(options.labels, data.n_points()); });
    }

    const bool desk_scale = data.n_points() < 10000;
    GraphConfig graph_cfg;
    graph_cfg.trees = options.trees;
    graph_cfg.neighbors = options.neighbors
        ? *options.neighbors
        : (desk_scale ? std::min<std::uint32_t>(150, 15) : 150);
    graph_cfg.neighbors = std::min<std::uint32_t>(graph_cfg.neighbors,
                                                  static_cast<std::uint32_t>(data.n_points() - 1));
    graph_cfg.explore_iters = options.explore_iters;
    graph_cfg.leaf_capacity = options.leaf_capacity;
    graph_cfg.seed = options.seed;
    graph_cfg.workers = resolve_workers(options.workers);
    result.graph = graph_cfg;

    const std::uint64_t spn = options.samples_per_node
        ? *options.samples_per_node
        : (desk_scale ? 20000 : 10000);
    result.samples_per_node = spn;

    detail::StageTimer graph_timer;
    const NeighborLists knn = detail::stage("graph", [&] { return build_knn_graph(data, graph_cfg); });
    result.graph_seconds = graph_timer.seconds();

    detail::StageTimer weight_timer;
    const WeightedGraph graph = detail::stage("weighting", [&] {
        return weigh_graph(data, knn, options.perplexity, graph_cfg.workers);
    });
    result.weight_seconds = weight_timer.seconds();
    if (graph.clamped_calibrations > 0) {
        std::cerr << "weighting: perplexity " << options.perplexity << " unreachable for "
                  << graph.clamped_calibrations << " points (neighbor lists hold "
                  << graph_cfg.neighbors << " entries)\n";
    }

    LayoutConfig layout_cfg;
    layout_cfg.dim = options.dim;
    layout_cfg.link = options.link;
    layout_cfg.negatives = options.negatives;
    layout_cfg.gamma = options.gamma;
    layout_cfg.total_samples = spn * static_cast<std::uint64_t>(data.n_points());
    layout_cfg.initial_rate = options.rate;
    layout_cfg.workers = graph_cfg.workers;
    layout_cfg.clip = options.clip;
    layout_cfg.epsilon = options.epsilon;
    layout_cfg.seed = options.seed;
    result.layout = layout_cfg;

    detail::StageTimer layout_timer;
    const Embedding embedding = detail::stage("layout", [&] { return train(graph, layout_cfg); });
    result.layout_seconds = layout_timer.seconds();

    detail::stage("output", [&] {
        write_embedding(embedding, labels ? &*labels : nullptr, options.output);
        return 0;
    });
    if (!options.svg.empty()) {
        detail::stage("output", [&] {
            write_scatter_svg(embedding, labels ? &*labels : nullptr, options.svg);
            return 0;
        });
    }

    if (options.exact_recall) {
        detail::stage("metrics", [&] {
            const NeighborLists exact = brute_force_knn(data, graph_cfg.neighbors, graph_cfg.workers);
            result.mean_recall = recall(knn, exact).mean;
            return 0;
        });
    }
    if (labels) {
        detail::stage("metrics", [&] {
            const std::uint32_t k = std::min<std::uint32_t>(5, static_cast<std::uint32_t>(data.n_points() - 1));
            result.knn_accuracy = knn_classify_accuracy(embedding, *labels, k, graph_cfg.workers);
            return 0;
        });
    }

    nlohmann::json metrics;
    metrics["k"] = graph_cfg.neighbors;
    metrics["n"] = data.n_points();
    if (result.mean_recall) metrics["mean_recall"] = *result.mean_recall;
    if (result.knn_accuracy) metrics["knn_accuracy"] = *result.knn_accuracy;
    if (!options.metrics_out.empty()) {
        detail::stage("metrics", [&] {
            std::ofstream out(options.metrics_out);
            if (!out) throw std::runtime_error(options.metrics_out + ": cannot open for writing");
            out << metrics.dump() << '\n';
            return 0;
        });
    }

    result.total_seconds = total_timer.seconds();

    detail::stage("manifest", [&] {
        nlohmann::json manifest;
        manifest["config"] = {
            {"trees", graph_cfg.trees},
            {"neighbors", graph_cfg.neighbors},
            {"explore_iters", graph_cfg.explore_iters},
            {"leaf_capacity", graph_cfg.leaf_capacity},
            {"perplexity", options.perplexity},
            {"dim", layout_cfg.dim},
            {"link", layout_cfg.link.kind == LinkKind::InverseQuadratic ? "invq" : "sigmoid"},
            {"a", layout_cfg.link.a},
            {"negatives", layout_cfg.negatives},
            {"gamma", layout_cfg.gamma},
            {"samples_per_node", spn},
            {"total_samples", layout_cfg.total_samples},
            {"rate", layout_cfg.initial_rate},
            {"clip", layout_cfg.clip},
            {"epsilon", layout_cfg.epsilon},
            {"workers", layout_cfg.workers},
            {"seed", options.seed},
        };
        manifest["inputs"]["vectors"] = {{"path", options.input}, {"digest", fnv1a64_digest(options.input)}};
        if (!options.labels.empty()) {
            manifest["inputs"]["labels"] = {{"path", options.labels}, {"digest", fnv1a64_digest(options.labels)}};
        }
        nlohmann::json outputs = nlohmann::json::array({options.output});
        if (!options.svg.empty()) outputs.push_back(options.svg);
        if (!options.metrics_out.empty()) outputs.push_back(options.metrics_out);
        manifest["outputs"] = outputs;
        manifest["points"] = data.n_points();
        manifest["input_dim"] = data.dim();
        manifest["metrics"] = metrics;
        manifest["timings_seconds"] = {
            {"graph", result.graph_seconds},
            {"weighting", result.weight_seconds},
            {"layout", result.layout_seconds},
            {"total", result.total_seconds},
        };
        result.manifest_path = options.output + ".manifest.json";
        std::ofstream out(result.manifest_path);
        if (!out) throw std::runtime_error(result.manifest_path + ": cannot open for writing");
        out << manifest.dump(2) << '\n';
        return 0;
    });

    return result;
}

} // namespace knnvis

#endif
