#ifndef KNNVIS_SVG_HPP
#define KNNVIS_SVG_HPP

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "eval.hpp"
#include "layout.hpp"

/**
 * @file svg.hpp
 *
 * @brief Scatter-plot writer for 2-d embeddings.
 */

namespace knnvis {

/** Fixed 20-color palette; label ids cycle through it. */
inline constexpr std::array<const char*, 20> kPalette = {
    "#1f77b4", "#aec7e8", "#ff7f0e", "#ffbb78", "#2ca02c",
    "#98df8a", "#d62728", "#ff9896", "#9467bd", "#c5b0d5",
    "#8c564b", "#c49c94", "#e377c2", "#f7b6d2", "#7f7f7f",
    "#c7c7c7", "#bcbd22", "#dbdb8d", "#17becf", "#9edae5",
};

/**
 * Writes one circle per point into a 1000x1000 viewBox with a 5% margin,
 * preserving aspect ratio. A degenerate bounding box (single point, or zero
 * extent on both axes) falls back to a unit box around the data.
 */
inline void write_scatter_svg(const Embedding& embedding, const LabeledSet* labels,
                              const std::string& path, double point_radius = 3.0) {
    if (embedding.dim() != 2) {
        throw std::invalid_argument("write_scatter_svg: only 2-d embeddings are supported");
    }
    const std::size_t n = embedding.n_points();

    double min_x = embedding.row(0)[0], max_x = min_x;
    double min_y = embedding.row(0)[1], max_y = min_y;
    for (std::size_t i = 1; i < n; ++i) {
        const auto row = embedding.row(static_cast<PointId>(i));
        min_x = std::min<double>(min_x, row[0]);
        max_x = std::max<double>(max_x, row[0]);
        min_y = std::min<double>(min_y, row[1]);
        max_y = std::max<double>(max_y, row[1]);
    }
    if (max_x - min_x == 0.0 && max_y - min_y == 0.0) {
        min_x -= 0.5; max_x += 0.5;
        min_y -= 0.5; max_y += 0.5;
    }

    constexpr double kBox = 1000.0;
    constexpr double kMargin = 0.05 * kBox;
    const double inner = kBox - 2.0 * kMargin;
    const double width = max_x - min_x;
    const double height = max_y - min_y;
    const double scale = inner / std::max(width, height);
    const double pad_x = (inner - width * scale) / 2.0;
    const double pad_y = (inner - height * scale) / 2.0;

    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    std::fprintf(out,
                 "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 %.0f %.0f\">\n",
                 kBox, kBox);
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = embedding.row(static_cast<PointId>(i));
        const double cx = kMargin + pad_x + (row[0] - min_x) * scale;
        const double cy = kMargin + pad_y + (max_y - row[1]) * scale;   // svg y grows downward
        const char* color = labels ? kPalette[labels->ids[i] % kPalette.size()] : kPalette[0];
        std::fprintf(out, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n",
                     cx, cy, point_radius, color);
    }
    std::fputs("</svg>\n", out);
    std::fclose(out);
}

} // namespace knnvis

#endif
