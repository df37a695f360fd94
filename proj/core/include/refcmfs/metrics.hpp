#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace refcmfs::metrics {

/// counts[a][b] = #{i : pred_i = a and truth_i = b}; shape is
/// (max pred + 1) x (max truth + 1).
struct ContingencyTable {
    std::vector<std::vector<long long>> counts;
    long long n = 0;

    std::size_t pred_clusters() const noexcept { return counts.size(); }
    std::size_t true_clusters() const noexcept { return counts.empty() ? 0 : counts.front().size(); }
};

/// assignment[a] is the true cluster matched to predicted cluster a, or
/// kUnmatched when a has no partner.
struct LabelMapping {
    static constexpr int kUnmatched = -1;
    std::vector<int> assignment;
};

/// Throws std::invalid_argument on length mismatch, empty input or negative labels.
ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth);

/// Minimum-cost perfect assignment on a square cost matrix (Kuhn-Munkres,
/// O(m^3)). Returns column index for each row.
std::vector<std::size_t> hungarian_min_cost(const std::vector<std::vector<double>>& cost);

/// Injective mapping maximizing the matched count.
LabelMapping best_mapping(const ContingencyTable& table);

/// Fraction of samples whose predicted label maps to their true label under
/// the best injective mapping.
double accuracy(std::span<const int> pred, std::span<const int> truth);

/// Mutual information in bits divided by max(H(pred), H(truth)). Both
/// partitions constant gives 1; exactly one constant gives 0.
double nmi(std::span<const int> pred, std::span<const int> truth);

} // namespace refcmfs::metrics
