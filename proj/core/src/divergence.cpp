// Copyright 2026 The rkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "rkd/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "rkd/embedding_io.hpp"
#include "rkd/error.hpp"
#include "rkd/relational.hpp"

namespace rkd {

namespace {

Histogram histogram(const Matrix& values, double lo, double hi) {
    Histogram h{lo, hi, std::vector<std::size_t>(kHistogramBins, 0)};
    const double width = (hi - lo) / static_cast<double>(kHistogramBins);
    for (double v : values.data()) {
        auto bin = static_cast<std::ptrdiff_t>((v - lo) / width);
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(kHistogramBins) - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    return h;
}

double max_value(const Matrix& m) {
    double mx = 0.0;
    for (double v : m.data()) mx = std::max(mx, v);
    return mx;
}

// Unit difference vectors for all ordered pairs, row a * n + b.
Matrix unit_differences(const Matrix& e) {
    const std::size_t n = e.rows(), d = e.cols();
    Matrix out(n * n, d);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            auto row = out.row(a * n + b);
            double norm_sq = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
                row[c] = e(a, c) - e(b, c);
                norm_sq += row[c] * row[c];
            }
            const double den = std::max(std::sqrt(norm_sq), ad::kEps);
            for (double& v : row) v /= den;
        }
    return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

// Streams every angle triplet once: mean Huber divergence plus both histograms.
void angle_statistics(const Matrix& a, const Matrix& b, DivergenceReport& report) {
    const std::size_t n = a.rows();
    const Matrix ua = unit_differences(a);
    const Matrix ub = unit_differences(b);
    report.angle_potentials_a = Histogram{-1.0, 1.0, std::vector<std::size_t>(kHistogramBins, 0)};
    report.angle_potentials_b = report.angle_potentials_a;
    auto bin = [](double v) {
        auto k = static_cast<std::ptrdiff_t>((v + 1.0) / 2.0 * static_cast<double>(kHistogramBins));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, kHistogramBins - 1));
    };
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            for (std::size_t k = i + 1; k < n; ++k) {
                if (k == j) continue;
                const double ca = dot(ua.row(i * n + j), ua.row(k * n + j));
                const double cb = dot(ub.row(i * n + j), ub.row(k * n + j));
                total += huber(ca, cb);
                ++count;
                ++report.angle_potentials_a.counts[bin(ca)];
                ++report.angle_potentials_b.counts[bin(cb)];
            }
        }
    report.angle_divergence = total / static_cast<double>(count);
}

nlohmann::json histogram_json(const Histogram& h) {
    return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}};
}

} // namespace

DivergenceReport relational_divergence(const Matrix& a, const Matrix& b, std::uint64_t seed,
                                       std::size_t max_rows) {
    if (a.rows() != b.rows()) {
        throw DomainError("embedding sets have different sizes: " + std::to_string(a.rows()) +
                          " vs " + std::to_string(b.rows()));
    }
    if (a.rows() < 3) throw DomainError("relational comparison needs at least 3 rows");

    DivergenceReport report;
    report.rows_total = a.rows();
    report.seed = seed;
    report.dim_a = a.cols();
    report.dim_b = b.cols();

    Matrix sa = a, sb = b;
    if (max_rows >= 3 && a.rows() > max_rows) {
        std::vector<std::size_t> order(a.rows());
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(max_rows);
        std::sort(order.begin(), order.end());
        sa = gather_rows(a, order);
        sb = gather_rows(b, order);
        report.subsampled = true;
    }
    report.rows_used = sa.rows();

    report.distance_divergence = rkd_distance_value(sa, sb);
    angle_statistics(sa, sb, report);

    const auto pairs = enumerate_pairs(sa.rows());
    const Matrix dist_a = distance_potentials(sa, pairs);
    const Matrix dist_b = distance_potentials(sb, pairs);
    double hi = std::max(max_value(dist_a), max_value(dist_b));
    if (hi <= 0.0) hi = 1.0;
    report.distance_potentials_a = histogram(dist_a, 0.0, hi);
    report.distance_potentials_b = histogram(dist_b, 0.0, hi);
    return report;
}

DivergenceReport relational_divergence_report(const std::filesystem::path& a,
                                              const std::filesystem::path& b, std::uint64_t seed) {
    const EmbeddingBatch ea = read_embeddings(a);
    const EmbeddingBatch eb = read_embeddings(b);
    return relational_divergence(ea.embeddings, eb.embeddings, seed);
}

std::string to_json(const DivergenceReport& r) {
    nlohmann::json j = {
        {"rows_total", r.rows_total},
        {"rows_used", r.rows_used},
        {"subsampled", r.subsampled},
        {"subsample_seed", r.seed},
        {"dim_a", r.dim_a},
        {"dim_b", r.dim_b},
        {"rkd_distance", r.distance_divergence},
        {"rkd_angle", r.angle_divergence},
        {"psi_distance_hist_a", histogram_json(r.distance_potentials_a)},
        {"psi_distance_hist_b", histogram_json(r.distance_potentials_b)},
        {"psi_angle_hist_a", histogram_json(r.angle_potentials_a)},
        {"psi_angle_hist_b", histogram_json(r.angle_potentials_b)},
    };
    if (r.subsampled) {
        j["note"] = "subsampled " + std::to_string(r.rows_used) + " of " +
                    std::to_string(r.rows_total) + " rows";
    }
    return j.dump(2);
}

} // namespace rkd
