#pragma once

// Library side of the refcmfs command-line tool. `run` is the whole CLI;
// main() only forwards argv to it, so tests drive commands in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "refcmfs/data_io.hpp"
#include "refcmfs/model.hpp"

namespace refcmfs::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int {
    kExitOk = 0,
    kExitUnknownAlgorithm = 1,
    kExitDataError = 2,
    kExitConfigError = 3,
};

/// Error carrying the process exit code and a short machine-readable kind.
class CliError : public std::runtime_error {
public:
    CliError(int code, std::string kind, const std::string& detail)
        : std::runtime_error(detail), code_(code), kind_(std::move(kind)) {}
    int code() const noexcept { return code_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    int code_;
    std::string kind_;
};

enum class Algorithm { Refcmfs, KMeans, FCM, SimRefcmfs };

/// Throws CliError(kExitUnknownAlgorithm) for unknown or unsupported names.
Algorithm parse_algorithm(const std::string& name);
std::string algorithm_name(Algorithm algo);

struct RunOptions {
    std::string data_path;
    std::string labels_col = "none"; // none | last | <0-based index>
    bool header = false;
    std::string normalize = "minmax"; // none | minmax | zscore
    std::string algo = "refcmfs";
    int c = 0;
    std::optional<int> k_tilde;
    double r = 1.1;
    double tol = 1e-7;
    int max_iter = 300;
    std::string init = "kmeanspp"; // kmeanspp | random
    std::uint64_t seed = 0;
};

struct RunReport {
    std::string algorithm;
    RunOptions config;
    std::string dataset_name;
    std::size_t n = 0;
    std::size_t d = 0;
    std::optional<double> acc;
    std::optional<double> nmi;
    FitResult result;
    double wall_time_seconds = 0.0;
    std::vector<std::string> warnings;
};

/// Loads and normalizes the dataset named by the options.
/// Throws CliError(kExitDataError) on I/O or parse failure.
io::LabeledDataset load_dataset(const RunOptions& options);

/// Runs one algorithm once. Throws CliError for unknown algorithms and
/// invalid configurations.
RunReport run_once(const io::LabeledDataset& dataset, const RunOptions& options);

Json to_json(const RunReport& report);

/// Command-line arguments that reproduce the run echoed in a fit report.
std::vector<std::string> fit_args_from_report(const Json& report);

struct SweepCell {
    int k_tilde = 0;
    double r = 0.0;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::optional<double> acc;
    std::optional<double> nmi;
    int iterations = 0;
    double final_objective = 0.0;
};

struct SweepRow {
    int k_tilde = 0;
    double r = 0.0;
    int runs = 0;
    int failed = 0;
    double acc_mean = 0.0, acc_std = 0.0, nmi_mean = 0.0, nmi_std = 0.0;
};

/// Mean and sample standard deviation of the successful cells of each grid
/// point, in grid order.
std::vector<SweepRow> aggregate_sweep(const std::vector<SweepCell>& cells);

struct BenchOptions {
    std::vector<std::size_t> sizes{10000, 20000, 40000};
    std::size_t dim = 32;
    std::size_t c = 20;
    int k_tilde = 3;
    double r = 1.1;
    int iterations = 20;
    int repeats = 3;
    std::uint64_t seed = 0;
};

struct BenchRow {
    std::size_t n = 0;
    double seconds = 0.0; // best of `repeats`
    double seconds_per_iteration = 0.0;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    std::optional<double> loglog_slope; // absent for a single size
};

/// Times fixed-count REFCMFS iterations on seeded Gaussian blobs.
BenchTable bench_scaling(const BenchOptions& options);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Entire CLI: parses `args` (without the program name), writes results to
/// `out` unless --out is given, errors to `err`, and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace refcmfs::cli
