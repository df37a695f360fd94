#include "refcmfs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace refcmfs::metrics {

ContingencyTable contingency(std::span<const int> pred, std::span<const int> truth) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("contingency: label vectors differ in length");
    if (pred.empty()) throw std::invalid_argument("contingency: label vectors are empty");
    const int max_pred = *std::max_element(pred.begin(), pred.end());
    const int max_true = *std::max_element(truth.begin(), truth.end());
    if (*std::min_element(pred.begin(), pred.end()) < 0 ||
        *std::min_element(truth.begin(), truth.end()) < 0)
        throw std::invalid_argument("contingency: labels must be non-negative");

    ContingencyTable table;
    table.counts.assign(static_cast<std::size_t>(max_pred) + 1,
                        std::vector<long long>(static_cast<std::size_t>(max_true) + 1, 0));
    for (std::size_t i = 0; i < pred.size(); ++i)
        ++table.counts[static_cast<std::size_t>(pred[i])][static_cast<std::size_t>(truth[i])];
    table.n = static_cast<long long>(pred.size());
    return table;
}

// Shortest augmenting path with row/column potentials.
std::vector<std::size_t> hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const std::size_t m = cost.size();
    for (const auto& row : cost)
        if (row.size() != m) throw std::invalid_argument("hungarian_min_cost: matrix must be square");
    if (m == 0) return {};

    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based; column 0 is a virtual source.
    std::vector<double> u(m + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> match_col(m + 1, 0), way(m + 1, 0);

    for (std::size_t row = 1; row <= m; ++row) {
        match_col[0] = row;
        std::size_t col0 = 0;
        std::vector<double> min_slack(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[col0] = true;
            const std::size_t row0 = match_col[col0];
            double delta = inf;
            std::size_t col1 = 0;
            for (std::size_t col = 1; col <= m; ++col) {
                if (used[col]) continue;
                const double slack = cost[row0 - 1][col - 1] - u[row0] - v[col];
                if (slack < min_slack[col]) {
                    min_slack[col] = slack;
                    way[col] = col0;
                }
                if (min_slack[col] < delta) {
                    delta = min_slack[col];
                    col1 = col;
                }
            }
            for (std::size_t col = 0; col <= m; ++col) {
                if (used[col]) {
                    u[match_col[col]] += delta;
                    v[col] -= delta;
                } else {
                    min_slack[col] -= delta;
                }
            }
            col0 = col1;
        } while (match_col[col0] != 0);
        do {
            const std::size_t col1 = way[col0];
            match_col[col0] = match_col[col1];
            col0 = col1;
        } while (col0 != 0);
    }

    std::vector<std::size_t> assignment(m);
    for (std::size_t col = 1; col <= m; ++col) assignment[match_col[col] - 1] = col - 1;
    return assignment;
}

LabelMapping best_mapping(const ContingencyTable& table) {
    const std::size_t rows = table.pred_clusters(), cols = table.true_clusters();
    const std::size_t m = std::max(rows, cols);
    // Pad to square with zero counts; maximize counts by minimizing negation.
    std::vector<std::vector<double>> cost(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = 0; b < cols; ++b)
            cost[a][b] = -static_cast<double>(table.counts[a][b]);

    const auto assignment = hungarian_min_cost(cost);
    LabelMapping mapping;
    mapping.assignment.assign(rows, LabelMapping::kUnmatched);
    for (std::size_t a = 0; a < rows; ++a)
        if (assignment[a] < cols) mapping.assignment[a] = static_cast<int>(assignment[a]);
    return mapping;
}

double accuracy(std::span<const int> pred, std::span<const int> truth) {
    const auto table = contingency(pred, truth);
    const auto mapping = best_mapping(table);
    long long matched = 0;
    for (std::size_t a = 0; a < mapping.assignment.size(); ++a)
        if (mapping.assignment[a] != LabelMapping::kUnmatched)
            matched += table.counts[a][static_cast<std::size_t>(mapping.assignment[a])];
    return static_cast<double>(matched) / static_cast<double>(table.n);
}

namespace {

double entropy_bits(const std::vector<long long>& marginal, double n) {
    double h = 0.0;
    for (long long count : marginal) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h += p * std::log2(n / static_cast<double>(count));
    }
    return h;
}

} // namespace

double nmi(std::span<const int> pred, std::span<const int> truth) {
    const auto table = contingency(pred, truth);
    const auto n = static_cast<double>(table.n);
    const std::size_t rows = table.pred_clusters(), cols = table.true_clusters();

    std::vector<long long> pred_marginal(rows, 0), true_marginal(cols, 0);
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = 0; b < cols; ++b) {
            pred_marginal[a] += table.counts[a][b];
            true_marginal[b] += table.counts[a][b];
        }

    const double h_pred = entropy_bits(pred_marginal, n);
    const double h_true = entropy_bits(true_marginal, n);
    const double normalizer = std::max(h_pred, h_true);
    if (normalizer == 0.0) return 1.0; // both partitions constant

    // p_ab log2(p_ab / (p_a p_b)) written with integer counts:
    // (n_ab / n) log2(n n_ab / (n_a n_b)).
    double mi = 0.0;
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = 0; b < cols; ++b) {
            const long long joint = table.counts[a][b];
            if (joint == 0) continue;
            const double ratio = (n * static_cast<double>(joint)) /
                                 (static_cast<double>(pred_marginal[a]) *
                                  static_cast<double>(true_marginal[b]));
            mi += (static_cast<double>(joint) / n) * std::log2(ratio);
        }
    return std::clamp(mi / normalizer, 0.0, 1.0);
}

} // namespace refcmfs::metrics
