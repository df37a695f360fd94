#include "refcmfs/refcmfs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kernels.hpp"
#include "refcmfs/baselines.hpp"

namespace refcmfs {

DistanceRow distance_row(std::span<const double> x, const CentroidMatrix& centroids) {
    if (x.size() != centroids.dim())
        throw std::invalid_argument("distance_row: sample and centroid dimensions differ");
    DistanceRow h(centroids.cluster_count());
    detail::distances_into(x, centroids, h);
    return h;
}

RankingPermutation rank_ascending(std::span<const double> h) {
    RankingPermutation perm;
    detail::rank_into(h, perm.order);
    perm.sorted.reserve(h.size());
    for (std::size_t k : perm.order) perm.sorted.push_back(h[k]);
    return perm;
}

MembershipRow update_membership_row(std::span<const double> h, std::size_t k_tilde, double r) {
    if (k_tilde < 1 || k_tilde > h.size())
        throw std::invalid_argument("update_membership_row: k_tilde must lie in [1, c]");
    if (!(r > 1.0)) throw std::invalid_argument("update_membership_row: fuzzifier must exceed 1");

    MembershipRow row;
    row.values.resize(h.size());
    std::vector<std::size_t> order;
    row.degenerate = detail::membership_row_into(h, k_tilde, r, kZeroDistance, order, row.values);
    row.support.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k_tilde));
    return row;
}

double row_objective(std::span<const double> h, std::span<const double> row, double r) {
    if (h.size() != row.size())
        throw std::invalid_argument("row_objective: distance and membership lengths differ");
    return detail::row_loss(h, row, r);
}

WeightMatrix update_weights(const DataMatrix& data, const CentroidMatrix& centroids) {
    if (data.dim() != centroids.dim())
        throw std::invalid_argument("update_weights: data and centroid dimensions differ");
    const std::size_t c = centroids.cluster_count();
    WeightMatrix weights{Matrix(data.rows(), c)};
    for (std::size_t i = 0; i < data.rows(); ++i) {
        auto s = weights.values.row(i);
        detail::distances_into(data.row(i), centroids, s);
        for (double& v : s) v = 1.0 / (2.0 * std::max(v, kWeightFloor));
    }
    return weights;
}

CentroidUpdate update_centroids(const DataMatrix& data, const MembershipMatrix& membership,
                                const WeightMatrix& weights, double r,
                                std::span<const double> row_loss) {
    const std::size_t n = data.rows(), c = membership.cluster_count();
    if (membership.rows() != n || weights.values.rows() != n || weights.values.cols() != c)
        throw std::invalid_argument("update_centroids: shape mismatch");
    if (!row_loss.empty() && row_loss.size() != n)
        throw std::invalid_argument("update_centroids: row_loss length must equal the sample count");

    std::vector<ReseedEvent> reseeds;
    auto centroids = detail::weighted_means(
        data, c,
        [&](std::size_t i, std::size_t k) {
            const double a = membership(i, k);
            return a == 0.0 ? 0.0 : weights.values(i, k) * std::pow(a, r);
        },
        row_loss, reseeds);
    return {std::move(centroids), std::move(reseeds)};
}

double objective(const DataMatrix& data, const CentroidMatrix& centroids,
                 const MembershipMatrix& membership, double r) {
    if (membership.rows() != data.rows() || membership.cluster_count() != centroids.cluster_count())
        throw std::invalid_argument("objective: shape mismatch");
    std::vector<double> h(centroids.cluster_count());
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        detail::distances_into(data.row(i), centroids, h);
        total += detail::row_loss(h, membership.row(i), r);
    }
    return total;
}

namespace {

// sum_i a_ik^r ||x_i - b|| over the samples with a_ik > 0.
double cluster_loss(const DataMatrix& data, const Matrix& alpha, std::size_t k,
                    std::span<const double> b, double r) {
    double total = 0.0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const double a = alpha(i, k);
        if (a == 0.0) continue;
        total += std::sqrt(detail::squared_distance(data.row(i), b)) * std::pow(a, r);
    }
    return total;
}

FitResult run(const DataMatrix& data, const FitConfig& config, const detail::LoopControl& control) {
    const auto report = validate_config(config, data);
    if (!report.ok()) throw ConfigError("invalid configuration: " + report.summary());

    const std::size_t n = data.rows();
    const auto c = static_cast<std::size_t>(config.cluster_count);
    const auto k_tilde = static_cast<std::size_t>(config.k_tilde);
    const double r = config.fuzzifier;

    std::vector<double> h(c);
    std::vector<std::size_t> order;

    auto membership_step = [&](const CentroidMatrix& centroids, Matrix& alpha,
                               std::vector<double>& loss) {
        std::size_t degenerate = 0;
        for (std::size_t i = 0; i < n; ++i) {
            detail::distances_into(data.row(i), centroids, h);
            auto row = alpha.row(i);
            if (detail::membership_row_into(h, k_tilde, r, kZeroDistance, order, row))
                ++degenerate;
            loss[i] = detail::row_loss(h, row, r);
        }
        return degenerate;
    };

    auto centroid_step = [&](const CentroidMatrix& centroids, const Matrix& alpha,
                             std::span<const double> loss, std::vector<ReseedEvent>& reseeds) {
        const MembershipMatrix membership(alpha, k_tilde);
        const auto weights = update_weights(data, centroids);
        auto update = update_centroids(data, membership, weights, r, loss);

        // The weight floor lets a centroid sitting on a sample drift by about
        // kWeightFloor, which can raise the loss slightly. Such steps are
        // dropped so every cluster's loss is non-increasing.
        Matrix next = update.centroids.matrix();
        for (std::size_t k = 0; k < c; ++k) {
            const bool reseeded = std::any_of(update.reseeds.begin(), update.reseeds.end(),
                                              [&](const ReseedEvent& e) { return e.cluster == k; });
            if (reseeded) continue;
            if (cluster_loss(data, alpha, k, next.row(k), r) >
                cluster_loss(data, alpha, k, centroids.row(k), r))
                std::copy(centroids.row(k).begin(), centroids.row(k).end(), next.row(k).begin());
        }
        reseeds = std::move(update.reseeds);
        return CentroidMatrix(std::move(next));
    };

    auto init = baselines::initial_centroids(data, config.init, c, config.rng_seed);
    return detail::alternate(n, std::move(init), k_tilde, control, membership_step, centroid_step);
}

} // namespace

FitResult fit(const DataMatrix& data, const FitConfig& config) {
    return run(data, config, {config.max_iter, config.tolerance, false});
}

FitResult run_iterations(const DataMatrix& data, const FitConfig& config, int iterations) {
    if (iterations < 1) throw ConfigError("run_iterations: iterations must be at least 1");
    FitConfig checked = config;
    checked.max_iter = iterations;
    return run(data, checked, {iterations, config.tolerance, true});
}

} // namespace refcmfs
