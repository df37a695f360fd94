#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "refcmfs/model.hpp"

namespace refcmfs::io {

struct LabeledDataset {
    DataMatrix data;
    std::optional<std::vector<int>> labels; // dense, 0-based
    std::string name;
};

/// Malformed CSV input. row and column are 1-based positions in the file
/// (column 0 when the problem concerns the whole row).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t row, std::size_t column);

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Which CSV column holds class labels.
struct LabelColumn {
    static LabelColumn last() { return {true, 0}; }
    static LabelColumn at(std::size_t index) { return {false, index}; }

    bool is_last = false;
    std::size_t index = 0; // 0-based, used when !is_last
};

/// Reads a comma-separated numeric table (LF or CRLF, '.' decimals). Label
/// cells are arbitrary strings re-encoded in first-seen order.
LabeledDataset load_csv(const std::filesystem::path& path, bool has_header,
                        std::optional<LabelColumn> label_column);

/// Same as load_csv but reads from an in-memory string.
LabeledDataset parse_csv(const std::string& text, bool has_header,
                         std::optional<LabelColumn> label_column, std::string name = "");

/// Writes features with shortest round-trip formatting; labels, when
/// present, go in a trailing column.
void write_csv(const std::filesystem::path& path, const LabeledDataset& dataset);

enum class Normalization { None, MinMaxPerFeature, ZScorePerFeature };

/// MinMax maps each feature onto [0, 1]. ZScore subtracts the mean and divides
/// by the population standard deviation. Constant features become 0 in both.
DataMatrix normalize(const DataMatrix& data, Normalization mode);

struct BlobCluster {
    std::vector<double> center;
    double stdev = 1.0;
    std::size_t count = 0;
};

struct BlobSpec {
    std::vector<BlobCluster> clusters;
    std::size_t outlier_count = 0;
    double outlier_box_scale = 10.0;
    std::uint64_t rng_seed = 0;
};

/// Isotropic Gaussian clusters labelled 0..m-1 in spec order, followed by
/// `outlier_count` points labelled m drawn uniformly from the bounding box of
/// the centres scaled by `outlier_box_scale` about its midpoint. Before
/// scaling, each box half-width is raised to at least the largest cluster
/// stdev so a single centre still yields a box with volume.
LabeledDataset generate_blobs(const BlobSpec& spec);

} // namespace refcmfs::io
