// Command-line front end: `run` executes the two-stage visualization
// pipeline, `gen` produces synthetic Gaussian-mixture inputs.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "knnvis/knnvis.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Visualize high-dimensional point sets: approximate KNN graph "
                 "construction followed by probabilistic 2D/3D layout"};
    app.require_subcommand(1);

    // --- run ---
    knnvis::PipelineOptions options;
    std::uint32_t neighbors = 0;
    std::uint64_t samples_per_node = 0;
    std::string link_name = "invq";

    CLI::App* run = app.add_subcommand("run", "Run the full pipeline on a vector file");
    run->add_option("--input", options.input, "Input vectors (`N d` header, one row per point)")->required();
    run->add_option("--output", options.output, "Embedding output path")->required();
    run->add_option("--labels", options.labels, "Optional label file, one token per point");
    run->add_option("--svg", options.svg, "Write a scatter plot here (2-d only)");
    run->add_option("--trees", options.trees, "Random projection trees");
    CLI::Option* k_opt = run->add_option("--k", neighbors, "Neighbors per point (default 150; 15 below 10k points)");
    run->add_option("--iters", options.explore_iters, "Neighbor-exploring iterations");
    run->add_option("--perplexity", options.perplexity, "Target perplexity for edge weighting");
    run->add_option("--dim", options.dim, "Output dimension (2 or 3)")->check(CLI::Range(2u, 3u));
    run->add_option("--negatives", options.negatives, "Negative samples per edge")->check(CLI::PositiveNumber);
    run->add_option("--gamma", options.gamma, "Weight of repulsive terms");
    CLI::Option* spn_opt = run->add_option("--samples-per-node", samples_per_node,
                                           "Edge samples per point (default 10000; 20000 below 10k points)");
    run->add_option("--rate", options.rate, "Initial learning rate");
    run->add_option("--link", link_name, "Edge probability function")->check(CLI::IsMember({"invq", "sigmoid"}));
    run->add_option("--a", options.link.a, "Inverse-quadratic link parameter");
    run->add_option("--workers", options.workers, "Worker threads (0 = hardware)");
    run->add_option("--seed", options.seed, "Random seed");
    run->add_flag("--exact-recall", options.exact_recall,
                  "Measure graph recall against the brute-force oracle (quadratic)");
    run->add_option("--metrics-out", options.metrics_out, "Write metrics JSON here");

    // --- gen ---
    knnvis::MixtureParams mixture;
    std::string gen_output, gen_labels;
    CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic Gaussian mixture");
    gen->add_option("--n", mixture.n, "Number of points")->required();
    gen->add_option("--d", mixture.dim, "Input dimensionality")->required();
    gen->add_option("--clusters", mixture.clusters, "Number of clusters");
    gen->add_option("--spread", mixture.spread, "Point standard deviation around cluster centers");
    gen->add_option("--seed", mixture.seed, "Random seed");
    gen->add_option("--output", gen_output, "Vector file to write")->required();
    gen->add_option("--labels", gen_labels, "Also write cluster labels here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (k_opt->count() > 0) options.neighbors = neighbors;
            if (spn_opt->count() > 0) options.samples_per_node = samples_per_node;
            options.link.kind = link_name == "sigmoid" ? knnvis::LinkKind::SigmoidOfSquare
                                                       : knnvis::LinkKind::InverseQuadratic;

            const knnvis::PipelineResult result = knnvis::run_pipeline(options);
            std::cout << "points: " << result.n << "  input dim: " << result.input_dim
                      << "  neighbors: " << result.graph.neighbors
                      << "  samples: " << result.layout.total_samples << "\n"
                      << "graph " << result.graph_seconds << "s, weighting " << result.weight_seconds
                      << "s, layout " << result.layout_seconds << "s, total "
                      << result.total_seconds << "s\n";
            if (result.mean_recall) std::cout << "mean recall: " << *result.mean_recall << "\n";
            if (result.knn_accuracy) std::cout << "5-nn accuracy: " << *result.knn_accuracy << "\n";
            std::cout << "embedding: " << options.output << "\nmanifest: " << result.manifest_path << "\n";
        } else if (gen->parsed()) {
            const knnvis::Mixture data = knnvis::gaussian_mixture(mixture);
            knnvis::write_vectors(data.data, gen_output);
            if (!gen_labels.empty()) knnvis::write_labels(data.labels, gen_labels);
            std::cout << "wrote " << mixture.n << " points of dimension " << mixture.dim
                      << " to " << gen_output << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
