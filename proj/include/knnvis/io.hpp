#ifndef KNNVIS_IO_HPP
#define KNNVIS_IO_HPP

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "eval.hpp"
#include "layout.hpp"
#include "neighbors.hpp"
#include "weighting.hpp"

/**
 * @file io.hpp
 *
 * @brief Text formats: input vectors, labels, embeddings, edge lists and the
 * KNN debug dump.
 */

namespace knnvis {

namespace detail {

inline std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

template <typename T>
bool parse_next(std::string_view& s, T& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{}) return false;
    s.remove_prefix(static_cast<std::size_t>(ptr - s.data()));
    return true;
}

[[noreturn]] inline void parse_error(const std::string& path, std::size_t line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

} // namespace detail

/**
 * Reads the vector format: a `N d` header line followed by N rows of d
 * decimal reals. Trailing whitespace is tolerated; anything else is an error
 * naming the offending line.
 */
inline DataMatrix ingest_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");

    std::string line;
    if (!std::getline(in, line)) detail::parse_error(path, 1, "missing header");
    std::string_view header = detail::strip(line);
    std::uint64_t n = 0, dim = 0;
    if (!detail::parse_next(header, n) || !detail::parse_next(header, dim) ||
        !detail::strip(header).empty() || n < 1 || dim < 1) {
        detail::parse_error(path, 1, "header must be two positive integers: N d");
    }

    std::vector<float> values;
    values.reserve(n * dim);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::size_t line_no = i + 2;
        if (!std::getline(in, line)) detail::parse_error(path, line_no, "expected a data row");
        std::string_view row = line;
        for (std::uint64_t d = 0; d < dim; ++d) {
            float v;
            if (!detail::parse_next(row, v)) {
                detail::parse_error(path, line_no, "expected " + std::to_string(dim) + " values");
            }
            if (!std::isfinite(v)) detail::parse_error(path, line_no, "non-finite value");
            values.push_back(v);
        }
        if (!detail::strip(row).empty()) {
            detail::parse_error(path, line_no, "trailing content after " + std::to_string(dim) + " values");
        }
    }
    return DataMatrix(n, dim, std::move(values));
}

/** Writes vectors in the same format, 9 significant digits per value. */
inline void write_vectors(const DataMatrix& data, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    std::fprintf(out, "%zu %zu\n", data.n_points(), data.dim());
    for (std::size_t i = 0; i < data.n_points(); ++i) {
        const auto row = data.row(static_cast<PointId>(i));
        for (std::size_t d = 0; d < row.size(); ++d) {
            std::fprintf(out, d ? " %.9g" : "%.9g", static_cast<double>(row[d]));
        }
        std::fputc('\n', out);
    }
    std::fclose(out);
}

/** Reads n label lines; tokens map to dense ids in first-appearance order. */
inline LabeledSet ingest_labels(const std::string& path, std::size_t n) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");

    LabeledSet set;
    set.ids.reserve(n);
    std::unordered_map<std::string, std::uint32_t> dense;
    std::string line;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) {
            detail::parse_error(path, i + 1, "expected " + std::to_string(n) + " label lines");
        }
        const std::string token{detail::strip(line)};
        if (token.empty()) detail::parse_error(path, i + 1, "empty label");
        const auto [it, inserted] = dense.emplace(token, static_cast<std::uint32_t>(set.names.size()));
        if (inserted) set.names.push_back(token);
        set.ids.push_back(it->second);
    }
    if (std::getline(in, line) && !detail::strip(line).empty()) {
        detail::parse_error(path, n + 1, "more labels than points");
    }
    return set;
}

inline void write_labels(const LabeledSet& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (std::uint32_t id : labels.ids) out << labels.names[id] << '\n';
}

/**
 * Embedding output: a `N s` header, then one `label c_1 ... c_s` row per
 * point with coordinates at 6 decimal places. Labels fall back to the
 * zero-based point index when none were ingested.
 */
inline void write_embedding(const Embedding& embedding, const LabeledSet* labels,
                            const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    std::fprintf(out, "%zu %zu\n", embedding.n_points(), embedding.dim());
    for (std::size_t i = 0; i < embedding.n_points(); ++i) {
        if (labels) {
            std::fputs(labels->names[labels->ids[i]].c_str(), out);
        } else {
            std::fprintf(out, "%zu", i);
        }
        for (float c : embedding.row(static_cast<PointId>(i))) {
            std::fprintf(out, " %.6f", static_cast<double>(c));
        }
        std::fputc('\n', out);
    }
    std::fclose(out);
}

/** Debug dump of the KNN graph: one `id k (neighbor,dist2)...` line per point. */
inline void write_knn_dump(const NeighborLists& lists, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (std::size_t i = 0; i < lists.size(); ++i) {
        const auto ids = lists.ids(static_cast<PointId>(i));
        const auto d2 = lists.dists(static_cast<PointId>(i));
        std::fprintf(out, "%zu %zu", i, ids.size());
        for (std::size_t j = 0; j < ids.size(); ++j) {
            std::fprintf(out, " (%u,%.9g)", ids[j], d2[j]);
        }
        std::fputc('\n', out);
    }
    std::fclose(out);
}

/** Edge-list dump, one undirected edge per `i j w` line, 9 significant digits. */
inline void write_edge_list(const WeightedGraph& graph, const std::string& path) {
    std::FILE* out = std::fopen(path.c_str(), "w");
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (std::size_t e = 0; e < graph.directed_edge_count(); ++e) {
        if (graph.sources[e] < graph.targets[e]) {
            std::fprintf(out, "%u %u %.9g\n", graph.sources[e], graph.targets[e], graph.weights[e]);
        }
    }
    std::fclose(out);
}

/** Reads an `i j w` edge list back into a symmetric graph; n is inferred from the ids. */
inline WeightedGraph read_edge_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::vector<std::tuple<PointId, PointId, double>> edges;
    std::string line;
    std::size_t line_no = 0;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = detail::strip(line);
        if (s.empty()) continue;
        std::uint32_t a, b;
        double w;
        std::string_view cursor = s;
        if (!detail::parse_next(cursor, a) || !detail::parse_next(cursor, b) ||
            !detail::parse_next(cursor, w) || !detail::strip(cursor).empty()) {
            detail::parse_error(path, line_no, "expected `i j w`");
        }
        edges.emplace_back(a, b, w);
        n = std::max<std::size_t>(n, std::max(a, b) + 1);
    }
    return make_graph(n, std::move(edges));
}

/** FNV-1a 64-bit digest of a file's bytes, as 16 hex characters. */
inline std::string fnv1a64_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::uint64_t h = 0xCBF29CE484222325ULL;
    char buffer[1 << 16];
    while (in) {
        in.read(buffer, sizeof(buffer));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buffer[i]);
            h *= 0x100000001B3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

} // namespace knnvis

#endif
