#include "refcmfs/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "kernels.hpp"
#include "refcmfs/rng.hpp"

namespace refcmfs::baselines {

namespace {

void check_seed_count(const DataMatrix& data, std::size_t c) {
    if (c == 0) throw ConfigError("seeding: cluster count must be positive");
    if (c > data.rows()) throw ConfigError("seeding: cluster count exceeds the sample count");
}

CentroidMatrix gather(const DataMatrix& data, const std::vector<std::size_t>& indices) {
    Matrix rows(indices.size(), data.dim());
    for (std::size_t k = 0; k < indices.size(); ++k)
        std::copy(data.row(indices[k]).begin(), data.row(indices[k]).end(), rows.row(k).begin());
    return CentroidMatrix(std::move(rows));
}

// Draws an index with probability proportional to weight. Zero-weight
// entries are never returned.
std::size_t sample_weighted(std::span<const double> weight, double total, Rng& rng) {
    const double target = rng.uniform() * total;
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weight.size(); ++i) {
        if (weight[i] <= 0.0) continue;
        cumulative += weight[i];
        last_positive = i;
        if (cumulative > target) return i;
    }
    return last_positive;
}

} // namespace

std::size_t default_seeding_trials(std::size_t c) {
    return 2 + static_cast<std::size_t>(std::floor(std::log(static_cast<double>(std::max<std::size_t>(c, 1)))));
}

std::vector<std::size_t> kmeanspp_indices(const DataMatrix& data, std::size_t c,
                                          std::uint64_t seed, std::optional<std::size_t> trials) {
    check_seed_count(data, c);
    const std::size_t n = data.rows();
    const std::size_t tries = std::max<std::size_t>(1, trials.value_or(default_seeding_trials(c)));
    Rng rng(seed);

    std::vector<std::size_t> chosen{rng.index(n)};
    std::vector<bool> taken(n, false);
    taken[chosen.front()] = true;

    std::vector<double> closest(n);
    for (std::size_t i = 0; i < n; ++i)
        closest[i] = detail::squared_distance(data.row(i), data.row(chosen.front()));

    std::vector<double> trial_closest(n), best_closest(n);
    while (chosen.size() < c) {
        double total = 0.0;
        for (double v : closest) total += v;

        if (!(total > 0.0)) {
            // Every remaining sample duplicates a chosen one.
            std::vector<std::size_t> free;
            for (std::size_t i = 0; i < n; ++i)
                if (!taken[i]) free.push_back(i);
            const std::size_t pick = free[rng.index(free.size())];
            chosen.push_back(pick);
            taken[pick] = true;
            continue;
        }

        std::size_t best = n;
        double best_potential = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < tries; ++t) {
            const std::size_t candidate = sample_weighted(closest, total, rng);
            double potential = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                trial_closest[i] = std::min(
                    closest[i], detail::squared_distance(data.row(i), data.row(candidate)));
                potential += trial_closest[i];
            }
            if (potential < best_potential) {
                best_potential = potential;
                best = candidate;
                best_closest.swap(trial_closest);
            }
        }
        chosen.push_back(best);
        taken[best] = true;
        closest.swap(best_closest);
    }
    return chosen;
}

CentroidMatrix kmeanspp_seed(const DataMatrix& data, std::size_t c, std::uint64_t seed,
                             std::optional<std::size_t> trials) {
    return gather(data, kmeanspp_indices(data, c, seed, trials));
}

CentroidMatrix random_sample_seed(const DataMatrix& data, std::size_t c, std::uint64_t seed) {
    check_seed_count(data, c);
    Rng rng(seed);
    std::vector<std::size_t> idx(data.rows());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < c; ++k)
        std::swap(idx[k], idx[k + rng.index(idx.size() - k)]);
    idx.resize(c);
    return gather(data, idx);
}

CentroidMatrix initial_centroids(const DataMatrix& data, const InitStrategy& init,
                                 std::size_t c, std::uint64_t seed) {
    if (std::holds_alternative<KMeansPlusPlus>(init)) return kmeanspp_seed(data, c, seed);
    if (std::holds_alternative<RandomSamples>(init)) return random_sample_seed(data, c, seed);
    const auto& explicit_centroids = std::get<CentroidMatrix>(init);
    if (explicit_centroids.cluster_count() != c || explicit_centroids.dim() != data.dim())
        throw ConfigError("explicit centroids have the wrong shape");
    return explicit_centroids;
}

ValidationReport validate_config(const BaselineConfig& config, const DataMatrix& data) {
    ValidationReport report;
    const bool wants_fuzzifier = config.variant != Variant::KMeans;
    const bool wants_k_tilde = config.variant == Variant::SimREFCMFS;

    if (wants_fuzzifier != config.fuzzifier.has_value())
        report.violations.emplace_back(wants_fuzzifier ? "fuzzifier is required for this variant"
                                                       : "fuzzifier is not used by k-means");
    if (wants_k_tilde != config.k_tilde.has_value())
        report.violations.emplace_back(wants_k_tilde ? "k_tilde is required for sim-REFCMFS"
                                                     : "k_tilde is only used by sim-REFCMFS");

    // Reuse the REFCMFS checks with neutral stand-ins for absent fields.
    FitConfig shared{config.cluster_count,
                     config.fuzzifier.value_or(2.0),
                     config.k_tilde.value_or(std::max(config.cluster_count, 1)),
                     config.tolerance,
                     config.max_iter,
                     config.init,
                     config.rng_seed};
    auto base = refcmfs::validate_config(shared, data);
    report.violations.insert(report.violations.end(), base.violations.begin(),
                             base.violations.end());
    if (wants_k_tilde)
        report.warnings.insert(report.warnings.end(), base.warnings.begin(), base.warnings.end());
    return report;
}

namespace {

// Shared loop for the squared-distance losses. Memberships come from the
// ranked closed form applied to squared distances with `k_tilde` support;
// centroids are means weighted by a^loss_r.
FitResult squared_loss_fit(const DataMatrix& data, const BaselineConfig& config,
                           std::size_t k_tilde, double membership_r, double loss_r) {
    const auto report = validate_config(config, data);
    if (!report.ok()) throw ConfigError("invalid configuration: " + report.summary());

    const std::size_t n = data.rows();
    const auto c = static_cast<std::size_t>(config.cluster_count);
    std::vector<double> dist(c);
    std::vector<std::size_t> order;

    auto membership_step = [&](const CentroidMatrix& centroids, Matrix& alpha,
                               std::vector<double>& loss) {
        std::size_t degenerate = 0;
        for (std::size_t i = 0; i < n; ++i) {
            detail::squared_distances_into(data.row(i), centroids, dist);
            auto row = alpha.row(i);
            if (detail::membership_row_into(dist, k_tilde, membership_r, kZeroDistance, order, row))
                ++degenerate;
            loss[i] = detail::row_loss(dist, row, loss_r);
        }
        return degenerate;
    };

    auto centroid_step = [&](const CentroidMatrix&, const Matrix& alpha,
                             std::span<const double> loss, std::vector<ReseedEvent>& reseeds) {
        return detail::weighted_means(
            data, c,
            [&](std::size_t i, std::size_t k) {
                const double a = alpha(i, k);
                return a == 0.0 ? 0.0 : std::pow(a, loss_r);
            },
            loss, reseeds);
    };

    auto init = initial_centroids(data, config.init, c, config.rng_seed);
    const detail::LoopControl control{config.max_iter, config.tolerance, false};
    return detail::alternate(n, std::move(init), k_tilde, control, membership_step, centroid_step);
}

BaselineConfig with_variant(BaselineConfig config, Variant variant) {
    config.variant = variant;
    return config;
}

} // namespace

FitResult kmeans_fit(const DataMatrix& data, const BaselineConfig& config) {
    // With one-entry support the fuzzifier plays no role; 2 is a placeholder.
    return squared_loss_fit(data, with_variant(config, Variant::KMeans), 1, 2.0, 1.0);
}

FitResult fcm_fit(const DataMatrix& data, const BaselineConfig& config) {
    const auto checked = with_variant(config, Variant::FCM);
    const double r = checked.fuzzifier.value_or(0.0);
    const auto c = static_cast<std::size_t>(std::max(checked.cluster_count, 0));
    // a_ik = 1 / sum_s (d_ik / d_is)^(2/(r-1)) is the full-support closed form
    // on squared distances.
    return squared_loss_fit(data, checked, c, r, r);
}

FitResult sim_refcmfs_fit(const DataMatrix& data, const BaselineConfig& config) {
    const auto checked = with_variant(config, Variant::SimREFCMFS);
    const double r = checked.fuzzifier.value_or(0.0);
    const auto k = static_cast<std::size_t>(std::max(checked.k_tilde.value_or(0), 0));
    return squared_loss_fit(data, checked, k, r, r);
}

FitResult fit(const DataMatrix& data, const BaselineConfig& config) {
    switch (config.variant) {
    case Variant::KMeans: return kmeans_fit(data, config);
    case Variant::FCM: return fcm_fit(data, config);
    case Variant::SimREFCMFS: return sim_refcmfs_fit(data, config);
    }
    throw ConfigError("unknown baseline variant");
}

double squared_objective(const DataMatrix& data, const CentroidMatrix& centroids,
                         const MembershipMatrix& membership, double r) {
    if (membership.rows() != data.rows() || membership.cluster_count() != centroids.cluster_count())
        throw std::invalid_argument("squared_objective: shape mismatch");
    std::vector<double> dist(centroids.cluster_count());
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        detail::squared_distances_into(data.row(i), centroids, dist);
        total += detail::row_loss(dist, membership.row(i), r);
    }
    return total;
}

} // namespace refcmfs::baselines
