#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "refcmfs/model.hpp"

namespace refcmfs::baselines {

enum class Variant { KMeans, FCM, SimREFCMFS };

struct BaselineConfig {
    Variant variant = Variant::KMeans;
    int cluster_count = 0;
    std::optional<double> fuzzifier; // FCM and SimREFCMFS
    std::optional<int> k_tilde;      // SimREFCMFS
    double tolerance = 1e-7;
    int max_iter = 300;
    InitStrategy init = KMeansPlusPlus{};
    std::uint64_t rng_seed = 0;
};

ValidationReport validate_config(const BaselineConfig& config, const DataMatrix& data);

/// Number of candidates drawn per step by greedy k-means++: 2 + floor(ln c).
std::size_t default_seeding_trials(std::size_t c);

/// k-means++ seeding. The first centre is uniform over samples; each later
/// centre is chosen among `trials` D^2-weighted candidates as the one that
/// lowers the total D^2 the most (trials == 1 is the classic sampler). If all
/// remaining D^2 are zero the next centre is uniform over unchosen samples.
/// Throws ConfigError when c is zero or exceeds the sample count.
CentroidMatrix kmeanspp_seed(const DataMatrix& data, std::size_t c, std::uint64_t seed,
                             std::optional<std::size_t> trials = std::nullopt);

/// Same as kmeanspp_seed but also returns the chosen sample indices.
std::vector<std::size_t> kmeanspp_indices(const DataMatrix& data, std::size_t c,
                                          std::uint64_t seed,
                                          std::optional<std::size_t> trials = std::nullopt);

/// c distinct samples drawn uniformly without replacement.
CentroidMatrix random_sample_seed(const DataMatrix& data, std::size_t c, std::uint64_t seed);

/// Resolves an InitStrategy to concrete centroids.
CentroidMatrix initial_centroids(const DataMatrix& data, const InitStrategy& init,
                                 std::size_t c, std::uint64_t seed);

/// Lloyd iterations on the sum of squared distances; one-hot memberships.
FitResult kmeans_fit(const DataMatrix& data, const BaselineConfig& config);

/// Bezdek fuzzy C-means: objective sum ||x_i - b_k||^2 a_ik^r, full rows.
FitResult fcm_fit(const DataMatrix& data, const BaselineConfig& config);

/// Sparse-membership fuzzy C-means with a squared-distance loss.
FitResult sim_refcmfs_fit(const DataMatrix& data, const BaselineConfig& config);

/// Dispatches on config.variant.
FitResult fit(const DataMatrix& data, const BaselineConfig& config);

/// Objective values for the baseline losses, evaluated the same way the fits
/// record their traces.
double squared_objective(const DataMatrix& data, const CentroidMatrix& centroids,
                         const MembershipMatrix& membership, double r);

} // namespace refcmfs::baselines
