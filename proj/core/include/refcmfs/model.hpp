#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "refcmfs/matrix.hpp"

namespace refcmfs {

/// Absolute tolerance on membership row sums.
inline constexpr double kRowSumTolerance = 1e-10;

/// Thrown when a configuration fails validation before any work is done.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Samples x features. All entries finite, at least one row and one column.
class DataMatrix {
public:
    explicit DataMatrix(Matrix values);
    DataMatrix(std::size_t n, std::size_t d, std::vector<double> values)
        : DataMatrix(Matrix(n, d, std::move(values))) {}

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t dim() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
    const Matrix& matrix() const noexcept { return values_; }

private:
    Matrix values_;
};

/// Clusters x features. Entries finite. The c >= 2 requirement of a fit is
/// enforced by validate_config, not here, so single-centroid helpers work.
class CentroidMatrix {
public:
    explicit CentroidMatrix(Matrix values);
    CentroidMatrix(std::size_t c, std::size_t d, std::vector<double> values)
        : CentroidMatrix(Matrix(c, d, std::move(values))) {}

    std::size_t cluster_count() const noexcept { return values_.rows(); }
    std::size_t dim() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t k) const noexcept { return values_.row(k); }
    const Matrix& matrix() const noexcept { return values_; }

private:
    Matrix values_;
};

/// Row-stochastic n x c matrix whose rows carry at most k_tilde nonzeros.
/// Construction does not validate; use check_membership.
class MembershipMatrix {
public:
    MembershipMatrix(Matrix values, std::size_t k_tilde)
        : values_(std::move(values)), k_tilde_(k_tilde) {}

    std::size_t rows() const noexcept { return values_.rows(); }
    std::size_t cluster_count() const noexcept { return values_.cols(); }
    std::size_t k_tilde() const noexcept { return k_tilde_; }
    std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
    double operator()(std::size_t i, std::size_t k) const noexcept { return values_(i, k); }
    const Matrix& matrix() const noexcept { return values_; }

private:
    Matrix values_;
    std::size_t k_tilde_;
};

struct KMeansPlusPlus {};
struct RandomSamples {};
using InitStrategy = std::variant<KMeansPlusPlus, RandomSamples, CentroidMatrix>;

std::string init_name(const InitStrategy& init);

struct FitConfig {
    int cluster_count = 0;
    double fuzzifier = 1.1;
    int k_tilde = 0; // no default; callers must choose
    double tolerance = 1e-7;
    int max_iter = 300;
    InitStrategy init = KMeansPlusPlus{};
    std::uint64_t rng_seed = 0;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::vector<std::string> warnings;

    bool ok() const noexcept { return violations.empty(); }
    std::string summary() const;
};

ValidationReport validate_config(const FitConfig& config, const DataMatrix& data);

struct ReseedEvent {
    int iteration = 0;
    std::size_t cluster = 0;
    std::size_t sample = 0;
};

struct Diagnostics {
    std::vector<ReseedEvent> reseeds;
    // Membership rows that hit the zero-distance rule, summed over iterations.
    std::size_t degenerate_rows = 0;
    // Same count restricted to the returned membership matrix.
    std::size_t final_degenerate_rows = 0;
};

struct FitResult {
    MembershipMatrix membership;
    CentroidMatrix centroids;
    std::vector<int> labels;
    std::vector<double> objective_trace;
    int iterations = 0;
    bool converged = false;
    Diagnostics diagnostics;
};

/// Index of the row maximum, lowest index on ties.
std::vector<int> argmax_labels(const Matrix& membership);

/// Returns every invariant violation of a membership matrix (empty when it is
/// valid). When `distances` is given (n x c, same layout), rows carrying fewer
/// than k_tilde nonzeros are accepted only if one of their distances is at
/// most `zero_distance`.
std::vector<std::string> check_membership(const MembershipMatrix& membership,
                                          const Matrix* distances = nullptr,
                                          double zero_distance = 1e-12);

/// check_membership on the result plus the FitResult invariants: labels match
/// argmax and the trace is non-increasing within `slack`.
std::vector<std::string> check_fit_result(const FitResult& result, double slack = 1e-9);

} // namespace refcmfs
