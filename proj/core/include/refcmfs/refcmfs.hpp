#pragma once

// Robust fuzzy C-means with an L2,1 loss and exact per-row L0 sparsity.
//
// The objective is  sum_i sum_k ||x_i - b_k|| * a_ik^r  subject to every
// membership row lying on the simplex with exactly k_tilde nonzeros. The
// membership step is solved in closed form by ranking each row of distances;
// the centroid step is one iteratively-reweighted least-squares update,
// kept per cluster only when it does not raise that cluster's loss.

#include <cstddef>
#include <span>
#include <vector>

#include "refcmfs/model.hpp"

namespace refcmfs {

/// Distances at or below this are treated as coincident in the membership step.
inline constexpr double kZeroDistance = 1e-12;
/// IRLS weights use max(distance, kWeightFloor) in the denominator.
inline constexpr double kWeightFloor = 1e-9;
/// A cluster whose centroid-update denominator is at most this is reseeded.
inline constexpr double kStarvedDenominator = 1e-300;

using DistanceRow = std::vector<double>;

/// Stable ascending order of a distance row.
struct RankingPermutation {
    std::vector<std::size_t> order; // values[order[0]] <= values[order[1]] <= ...
    std::vector<double> sorted;
};

struct MembershipRow {
    std::vector<double> values;
    std::vector<std::size_t> support; // in rank order
    bool degenerate = false;          // zero-distance rule fired
};

/// IRLS weights s_ik, n x c.
struct WeightMatrix {
    Matrix values;
};

struct CentroidUpdate {
    CentroidMatrix centroids;
    std::vector<ReseedEvent> reseeds; // iteration field left at 0
};

DistanceRow distance_row(std::span<const double> x, const CentroidMatrix& centroids);

RankingPermutation rank_ascending(std::span<const double> h);

/// Closed-form minimizer of sum_k h_k a_k^r over the simplex with exactly
/// k_tilde nonzeros: the support is the k_tilde smallest distances and
/// a_k is proportional to h_k^(1/(1-r)) on it. If any support distance is at
/// most kZeroDistance, the mass is split evenly over those entries instead.
MembershipRow update_membership_row(std::span<const double> h, std::size_t k_tilde, double r);

/// sum_k h_k * row_k^r
double row_objective(std::span<const double> h, std::span<const double> row, double r);

WeightMatrix update_weights(const DataMatrix& data, const CentroidMatrix& centroids);

/// b_k = sum_i s_ik a_ik^r x_i / sum_i s_ik a_ik^r. Starved clusters are moved
/// to the samples with the largest `row_loss` (lowest index on ties); with an
/// empty `row_loss` every sample counts as zero loss.
CentroidUpdate update_centroids(const DataMatrix& data, const MembershipMatrix& membership,
                                const WeightMatrix& weights, double r,
                                std::span<const double> row_loss = {});

double objective(const DataMatrix& data, const CentroidMatrix& centroids,
                 const MembershipMatrix& membership, double r);

/// Alternates membership and centroid updates until the relative decrease
/// |obj(t-1) - obj(t)| / max(1, obj(t)) drops to config.tolerance or
/// config.max_iter membership updates have run. The returned centroids are
/// the ones the final membership was computed from, so
/// objective(result) == result.objective_trace.back() exactly.
/// Throws ConfigError when validate_config reports a violation.
FitResult fit(const DataMatrix& data, const FitConfig& config);

/// Runs exactly `iterations` membership updates with no convergence test.
/// config.max_iter and config.tolerance are ignored.
FitResult run_iterations(const DataMatrix& data, const FitConfig& config, int iterations);

} // namespace refcmfs
