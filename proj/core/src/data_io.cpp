#include "refcmfs/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "refcmfs/rng.hpp"

namespace refcmfs::io {

namespace {

std::string position(std::size_t row, std::size_t column) {
    std::string where = "line " + std::to_string(row);
    if (column > 0) where += ", column " + std::to_string(column);
    return where;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

} // namespace

ParseError::ParseError(const std::string& message, std::size_t row, std::size_t column)
    : std::runtime_error(position(row, column) + ": " + message), row_(row), column_(column) {}

LabeledDataset parse_csv(const std::string& text, bool has_header,
                         std::optional<LabelColumn> label_column, std::string name) {
    std::vector<double> values;
    std::vector<int> labels;
    std::unordered_map<std::string, int> label_codes;
    std::size_t width = 0, rows = 0, line_no = 0;
    std::optional<std::size_t> label_index;

    std::istringstream in(text);
    std::string line;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);

        if (width == 0) {
            width = fields.size();
            if (label_column) {
                const std::size_t idx = label_column->is_last ? width - 1 : label_column->index;
                if (idx >= width) throw ParseError("label column out of range", line_no, idx + 1);
                if (width < 2) throw ParseError("no feature columns besides the labels", line_no, 0);
                label_index = idx;
            }
        } else if (fields.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no, 0);
        }
        if (header_pending) {
            header_pending = false;
            continue;
        }

        for (std::size_t j = 0; j < fields.size(); ++j) {
            const auto cell = trim(fields[j]);
            if (label_index && j == *label_index) {
                const auto [it, inserted] =
                    label_codes.emplace(std::string(cell), static_cast<int>(label_codes.size()));
                labels.push_back(it->second);
                continue;
            }
            double v = 0.0;
            const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || end != cell.data() + cell.size())
                throw ParseError("non-numeric cell '" + std::string(cell) + "'", line_no, j + 1);
            if (!std::isfinite(v)) throw ParseError("non-finite value", line_no, j + 1);
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("no data rows", line_no, 0);

    const std::size_t dim = width - (label_index ? 1 : 0);
    LabeledDataset dataset{DataMatrix(rows, dim, std::move(values)), std::nullopt, std::move(name)};
    if (label_index) dataset.labels = std::move(labels);
    return dataset;
}

LabeledDataset load_csv(const std::filesystem::path& path, bool has_header,
                        std::optional<LabelColumn> label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_csv(buffer.str(), has_header, label_column, path.stem().string());
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
    const auto& data = dataset.data;
    char buf[64];
    for (std::size_t i = 0; i < data.rows(); ++i) {
        const auto row = data.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const auto res = std::to_chars(buf, buf + sizeof buf, row[j]);
            if (j) out << ',';
            out.write(buf, res.ptr - buf);
        }
        if (dataset.labels) out << ',' << (*dataset.labels)[i];
        out << '\n';
    }
}

DataMatrix normalize(const DataMatrix& data, Normalization mode) {
    if (mode == Normalization::None) return data;
    const std::size_t n = data.rows(), d = data.dim();
    Matrix out = data.matrix();
    for (std::size_t j = 0; j < d; ++j) {
        if (mode == Normalization::MinMaxPerFeature) {
            double lo = data.row(0)[j], hi = lo;
            for (std::size_t i = 1; i < n; ++i) {
                lo = std::min(lo, data.row(i)[j]);
                hi = std::max(hi, data.row(i)[j]);
            }
            const double range = hi - lo;
            for (std::size_t i = 0; i < n; ++i)
                out(i, j) = range > 0.0 ? (data.row(i)[j] - lo) / range : 0.0;
        } else {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += data.row(i)[j];
            mean /= static_cast<double>(n);
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double diff = data.row(i)[j] - mean;
                var += diff * diff;
            }
            const double sd = std::sqrt(var / static_cast<double>(n));
            for (std::size_t i = 0; i < n; ++i)
                out(i, j) = sd > 0.0 ? (data.row(i)[j] - mean) / sd : 0.0;
        }
    }
    return DataMatrix(std::move(out));
}

LabeledDataset generate_blobs(const BlobSpec& spec) {
    if (spec.clusters.empty()) throw std::invalid_argument("generate_blobs: no clusters");
    const std::size_t d = spec.clusters.front().center.size();
    if (d == 0) throw std::invalid_argument("generate_blobs: empty centre");
    std::size_t total = spec.outlier_count;
    double max_stdev = 0.0;
    for (const auto& cl : spec.clusters) {
        if (cl.center.size() != d) throw std::invalid_argument("generate_blobs: centre dimensions differ");
        if (!(cl.stdev >= 0.0)) throw std::invalid_argument("generate_blobs: stdev must be non-negative");
        total += cl.count;
        max_stdev = std::max(max_stdev, cl.stdev);
    }
    if (total == 0) throw std::invalid_argument("generate_blobs: no points requested");
    if (spec.outlier_count > 0 && !(spec.outlier_box_scale > 1.0))
        throw std::invalid_argument("generate_blobs: outlier_box_scale must exceed 1");

    Rng rng(spec.rng_seed);
    std::vector<double> values;
    values.reserve(total * d);
    std::vector<int> labels;
    labels.reserve(total);

    for (std::size_t c = 0; c < spec.clusters.size(); ++c) {
        const auto& cl = spec.clusters[c];
        for (std::size_t p = 0; p < cl.count; ++p) {
            for (std::size_t j = 0; j < d; ++j) values.push_back(cl.center[j] + cl.stdev * rng.normal());
            labels.push_back(static_cast<int>(c));
        }
    }

    if (spec.outlier_count > 0) {
        std::vector<double> mid(d), half(d);
        for (std::size_t j = 0; j < d; ++j) {
            double lo = spec.clusters.front().center[j], hi = lo;
            for (const auto& cl : spec.clusters) {
                lo = std::min(lo, cl.center[j]);
                hi = std::max(hi, cl.center[j]);
            }
            mid[j] = 0.5 * (lo + hi);
            half[j] = spec.outlier_box_scale * std::max(0.5 * (hi - lo), max_stdev);
        }
        const int outlier_label = static_cast<int>(spec.clusters.size());
        for (std::size_t p = 0; p < spec.outlier_count; ++p) {
            for (std::size_t j = 0; j < d; ++j)
                values.push_back(rng.uniform(mid[j] - half[j], mid[j] + half[j]));
            labels.push_back(outlier_label);
        }
    }

    return {DataMatrix(total, d, std::move(values)), std::move(labels), "blobs"};
}

} // namespace refcmfs::io
