#pragma once

// Allocation-free row kernels and the shared alternating driver used by
// REFCMFS and the baselines.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "refcmfs/model.hpp"
#include "refcmfs/refcmfs.hpp"

namespace refcmfs::detail {

inline double squared_distance(std::span<const double> x, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double diff = x[j] - b[j];
        acc += diff * diff;
    }
    return acc;
}

inline void squared_distances_into(std::span<const double> x, const CentroidMatrix& centroids,
                                   std::span<double> out) noexcept {
    for (std::size_t k = 0; k < centroids.cluster_count(); ++k)
        out[k] = squared_distance(x, centroids.row(k));
}

inline void distances_into(std::span<const double> x, const CentroidMatrix& centroids,
                           std::span<double> out) noexcept {
    for (std::size_t k = 0; k < centroids.cluster_count(); ++k)
        out[k] = std::sqrt(squared_distance(x, centroids.row(k)));
}

inline void rank_into(std::span<const double> h, std::vector<std::size_t>& order) {
    order.resize(h.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return h[a] < h[b]; });
}

// Writes the sparse closed-form row into `out`. Returns true when the
// zero-distance rule fired. `order` is scratch.
inline bool membership_row_into(std::span<const double> h, std::size_t k_tilde, double r,
                                double zero_distance, std::vector<std::size_t>& order,
                                std::span<double> out) {
    rank_into(h, order);
    std::fill(out.begin(), out.end(), 0.0);
    const std::span<const std::size_t> support(order.data(), k_tilde);

    std::size_t coincident = 0;
    for (std::size_t k : support)
        if (h[k] <= zero_distance) ++coincident;
    if (coincident > 0) {
        const double share = 1.0 / static_cast<double>(coincident);
        for (std::size_t k : support)
            if (h[k] <= zero_distance) out[k] = share;
        return true;
    }

    // a_k is proportional to (h_k / h_min)^(1/(1-r)); dividing by the
    // smallest support distance keeps every term in (0, 1].
    const double exponent = 1.0 / (1.0 - r);
    const double h_min = h[support.front()];
    double total = 0.0;
    for (std::size_t k : support) {
        out[k] = std::pow(h[k] / h_min, exponent);
        total += out[k];
    }
    for (std::size_t k : support) {
        // Floor at the smallest normal double so an underflowed weight still
        // counts toward the k_tilde nonzeros.
        out[k] = std::max(out[k] / total, std::numeric_limits<double>::min());
    }
    return false;
}

inline double row_loss(std::span<const double> h, std::span<const double> row, double r) noexcept {
    double acc = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k)
        if (row[k] != 0.0) acc += h[k] * std::pow(row[k], r);
    return acc;
}

// Sample indices for reseeding `count` clusters: largest loss first, lowest
// index on ties, without repetition.
inline std::vector<std::size_t> reseed_samples(std::span<const double> loss, std::size_t n,
                                               std::size_t count) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto loss_of = [&](std::size_t i) { return loss.empty() ? 0.0 : loss[i]; };
    count = std::min(count, n);
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double la = loss_of(a), lb = loss_of(b);
                          return la > lb || (la == lb && a < b);
                      });
    idx.resize(count);
    return idx;
}

// Weighted means b_k = sum_i w_ik x_i / sum_i w_ik, accumulated in ascending
// sample order. `weight(i, k)` must be non-negative.
template <class WeightFn>
CentroidMatrix weighted_means(const DataMatrix& data, std::size_t c, WeightFn&& weight,
                              std::span<const double> loss, std::vector<ReseedEvent>& reseeds) {
    const std::size_t n = data.rows(), d = data.dim();
    Matrix sums(c, d, 0.0);
    std::vector<double> denom(c, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (std::size_t k = 0; k < c; ++k) {
            const double w = weight(i, k);
            if (w == 0.0) continue;
            denom[k] += w;
            auto s = sums.row(k);
            for (std::size_t j = 0; j < d; ++j) s[j] += w * x[j];
        }
    }

    std::vector<std::size_t> starved;
    for (std::size_t k = 0; k < c; ++k) {
        if (denom[k] <= kStarvedDenominator) {
            starved.push_back(k);
            continue;
        }
        for (double& v : sums.row(k)) v /= denom[k];
    }
    if (!starved.empty()) {
        const auto picks = reseed_samples(loss, n, starved.size());
        for (std::size_t s = 0; s < starved.size(); ++s) {
            const std::size_t sample = picks[s % picks.size()];
            std::copy(data.row(sample).begin(), data.row(sample).end(),
                      sums.row(starved[s]).begin());
            reseeds.push_back({0, starved[s], sample});
        }
    }
    return CentroidMatrix(std::move(sums));
}

struct LoopControl {
    int max_iter = 300;
    double tolerance = 1e-7;
    bool fixed_iterations = false;
};

// Shared alternating loop.
//
//   membership_step(B, alpha, loss) -> degenerate row count; fills alpha and
//                                      the per-row objective terms `loss`
//   centroid_step(B, alpha, loss, reseeds) -> new CentroidMatrix
//
// Iteration t updates the membership from B(t-1) and records
// obj(t) = sum_i loss_i. The loop stops before the next centroid update, so
// the returned (alpha, B) pair is the one the last trace entry describes.
template <class MembershipStep, class CentroidStep>
FitResult alternate(std::size_t n, CentroidMatrix centroids, std::size_t k_tilde,
                    const LoopControl& control, MembershipStep&& membership_step,
                    CentroidStep&& centroid_step) {
    const std::size_t c = centroids.cluster_count();
    Matrix alpha(n, c, 0.0);
    std::vector<double> loss(n, 0.0);
    std::vector<double> trace;
    Diagnostics diag;
    bool converged = false;
    int iterations = 0;

    for (int t = 1; t <= control.max_iter; ++t) {
        const std::size_t degenerate = membership_step(centroids, alpha, loss);
        diag.degenerate_rows += degenerate;
        diag.final_degenerate_rows = degenerate;
        double obj = 0.0;
        for (double l : loss) obj += l;
        trace.push_back(obj);
        iterations = t;

        if (!control.fixed_iterations && t > 1) {
            const double change = std::abs(trace[trace.size() - 2] - obj);
            if (change / std::max(1.0, obj) <= control.tolerance) {
                converged = true;
                break;
            }
        }
        if (t == control.max_iter) break;

        std::vector<ReseedEvent> reseeds;
        centroids = centroid_step(centroids, alpha, loss, reseeds);
        for (auto& e : reseeds) {
            e.iteration = t;
            diag.reseeds.push_back(e);
        }
    }

    auto labels = argmax_labels(alpha);
    return FitResult{MembershipMatrix(std::move(alpha), k_tilde),
                     std::move(centroids),
                     std::move(labels),
                     std::move(trace),
                     iterations,
                     converged,
                     std::move(diag)};
}

} // namespace refcmfs::detail
