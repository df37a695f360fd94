#include "refcmfs/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace refcmfs {

namespace {

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

} // namespace

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0)
        throw std::invalid_argument("DataMatrix: need at least one sample and one feature");
    if (!all_finite(values_.values()))
        throw std::invalid_argument("DataMatrix: entries must be finite");
}

CentroidMatrix::CentroidMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() == 0 || values_.cols() == 0)
        throw std::invalid_argument("CentroidMatrix: need at least one centroid and one feature");
    if (!all_finite(values_.values()))
        throw std::invalid_argument("CentroidMatrix: entries must be finite");
}

std::string init_name(const InitStrategy& init) {
    switch (init.index()) {
    case 0: return "kmeanspp";
    case 1: return "random";
    default: return "explicit";
    }
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i)
        os << (i ? "; " : "") << violations[i];
    return os.str();
}

ValidationReport validate_config(const FitConfig& config, const DataMatrix& data) {
    ValidationReport report;
    const auto n = static_cast<long long>(data.rows());
    const int c = config.cluster_count;

    if (c < 2) report.violations.emplace_back("cluster_count must be at least 2");
    if (c > n) report.violations.emplace_back("cluster_count must not exceed the sample count");
    if (!std::isfinite(config.fuzzifier) || config.fuzzifier <= 1.0)
        report.violations.emplace_back("fuzzifier must exceed 1");
    if (config.k_tilde < 1 || config.k_tilde > c)
        report.violations.emplace_back("k_tilde must lie in [1, cluster_count]");
    else if (config.k_tilde == 1 || config.k_tilde == c)
        report.warnings.emplace_back("k_tilde outside recommended range (1, c)");
    if (!std::isfinite(config.tolerance) || config.tolerance <= 0.0)
        report.violations.emplace_back("tolerance must be positive");
    if (config.max_iter < 1) report.violations.emplace_back("max_iter must be at least 1");

    if (const auto* centroids = std::get_if<CentroidMatrix>(&config.init)) {
        if (centroids->cluster_count() != static_cast<std::size_t>(std::max(c, 0)))
            report.violations.emplace_back("explicit centroids must have cluster_count rows");
        if (centroids->dim() != data.dim())
            report.violations.emplace_back("explicit centroids must match the data dimension");
    }
    return report;
}

std::vector<int> argmax_labels(const Matrix& membership) {
    std::vector<int> labels(membership.rows(), 0);
    for (std::size_t i = 0; i < membership.rows(); ++i) {
        const auto row = membership.row(i);
        // max_element returns the first maximum, which is the tie rule we want.
        labels[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return labels;
}

std::vector<std::string> check_membership(const MembershipMatrix& membership,
                                          const Matrix* distances, double zero_distance) {
    std::vector<std::string> problems;
    const std::size_t k_tilde = membership.k_tilde();
    for (std::size_t i = 0; i < membership.rows(); ++i) {
        const auto row = membership.row(i);
        double sum = 0.0;
        std::size_t nonzero = 0;
        bool negative = false;
        for (double v : row) {
            if (!(v >= 0.0)) negative = true;
            if (v != 0.0) ++nonzero;
            sum += v;
        }
        const std::string where = "row " + std::to_string(i) + ": ";
        if (negative) problems.push_back(where + "negative or NaN entry");
        if (!(std::abs(sum - 1.0) <= kRowSumTolerance))
            problems.push_back(where + "sum deviates from 1");
        if (nonzero > k_tilde) problems.push_back(where + "more than k_tilde nonzeros");
        if (nonzero < k_tilde && distances != nullptr) {
            const auto h = distances->row(i);
            const bool degenerate = std::any_of(h.begin(), h.end(),
                                                [&](double v) { return v <= zero_distance; });
            if (!degenerate)
                problems.push_back(where + "fewer than k_tilde nonzeros without a zero distance");
        }
    }
    return problems;
}

std::vector<std::string> check_fit_result(const FitResult& result, double slack) {
    auto problems = check_membership(result.membership);
    if (argmax_labels(result.membership.matrix()) != result.labels)
        problems.emplace_back("labels differ from membership argmax");
    const auto& trace = result.objective_trace;
    if (trace.size() != static_cast<std::size_t>(result.iterations))
        problems.emplace_back("trace length differs from iteration count");
    for (std::size_t t = 1; t < trace.size(); ++t)
        if (trace[t] > trace[t - 1] + slack)
            problems.push_back("objective increased at iteration " + std::to_string(t + 1));
    return problems;
}

} // namespace refcmfs
