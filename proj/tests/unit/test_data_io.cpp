#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "refcmfs/data_io.hpp"

using namespace refcmfs;
using namespace refcmfs::io;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("refcmfs_test_" + name);
}

} // namespace

TEST_CASE("parse_csv reads plain numeric tables") {
    const auto ds = parse_csv("1,2\n3,4\n5,6\n", false, std::nullopt);
    CHECK(ds.data.rows() == 3);
    CHECK(ds.data.dim() == 2);
    CHECK(ds.data.row(2)[1] == 6.0);
    CHECK_FALSE(ds.labels.has_value());

    const auto crlf = parse_csv("a,b\r\n1.5, -2e3\r\n\r\n", true, std::nullopt);
    CHECK(crlf.data.rows() == 1);
    CHECK(crlf.data.row(0)[1] == -2000.0);
}

TEST_CASE("string labels are encoded in first-seen order") {
    const auto ds = parse_csv("1,cat\n2,dog\n3,cat\n4,emu\n", false, LabelColumn::last());
    REQUIRE(ds.labels);
    CHECK(*ds.labels == std::vector<int>{0, 1, 0, 2});
    CHECK(ds.data.dim() == 1);

    const auto first = parse_csv("b,1,2\na,3,4\n", false, LabelColumn::at(0));
    CHECK(*first.labels == std::vector<int>{0, 1});
    CHECK(first.data.row(1)[0] == 3.0);
}

TEST_CASE("parse errors carry positions") {
    auto position_of = [](const std::string& text, bool header = false) {
        try {
            parse_csv(text, header, std::nullopt);
        } catch (const ParseError& e) {
            return std::pair{e.row(), e.column()};
        }
        return std::pair<std::size_t, std::size_t>{0, 0};
    };
    CHECK(position_of("1,2\n3\n") == std::pair<std::size_t, std::size_t>{2, 0});
    CHECK(position_of("1,2\n3,x\n") == std::pair<std::size_t, std::size_t>{2, 2});
    CHECK(position_of("1,2\n3,\n") == std::pair<std::size_t, std::size_t>{2, 2});
    CHECK(position_of("1,2\n3,nan\n") == std::pair<std::size_t, std::size_t>{2, 2});
    CHECK_THROWS_AS(parse_csv("", false, std::nullopt), ParseError);
    CHECK_THROWS_AS(parse_csv("h1,h2\n", true, std::nullopt), ParseError);
    CHECK_THROWS_AS(parse_csv("1,2\n", false, LabelColumn::at(5)), ParseError);
    CHECK_THROWS_AS(load_csv(temp_file("does_not_exist.csv"), false, std::nullopt), ParseError);
}

TEST_CASE("write_csv round-trips exactly") {
    const std::vector<double> values{0.1, -1e-300, 12345.678901234567, 1.0 / 3.0, 5e10, -0.0};
    const LabeledDataset ds{DataMatrix(3, 2, values), std::vector<int>{2, 0, 1}, "rt"};
    const auto path = temp_file("roundtrip.csv");
    write_csv(path, ds);
    const auto back = load_csv(path, false, LabelColumn::last());
    std::filesystem::remove(path);
    CHECK(back.data.matrix() == ds.data.matrix());
    // Labels are re-encoded in first-seen order.
    CHECK(*back.labels == std::vector<int>{0, 1, 2});
    CHECK(back.name == "refcmfs_test_roundtrip");
}

TEST_CASE("normalize") {
    const DataMatrix data(3, 2, {0.0, 7.0, 5.0, 7.0, 10.0, 7.0});
    const auto mm = normalize(data, Normalization::MinMaxPerFeature);
    CHECK(mm.row(0)[0] == 0.0);
    CHECK(mm.row(1)[0] == 0.5);
    CHECK(mm.row(2)[0] == 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(mm.row(i)[1] == 0.0);

    const auto z = normalize(data, Normalization::ZScorePerFeature);
    const double sd = std::sqrt(50.0 / 3.0);
    CHECK(z.row(0)[0] == doctest::Approx(-5.0 / sd));
    CHECK(z.row(1)[0] == 0.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(z.row(i)[1] == 0.0);

    CHECK(normalize(data, Normalization::None).matrix() == data.matrix());
}

TEST_CASE("generate_blobs") {
    SUBCASE("zero stdev puts every point on its centre") {
        BlobSpec spec{{{{1.0, 2.0}, 0.0, 5}, {{-3.0, 4.0}, 0.0, 4}}, 0, 10.0, 1};
        const auto ds = generate_blobs(spec);
        CHECK(ds.data.rows() == 9);
        for (std::size_t i = 0; i < 9; ++i) {
            const auto& c = spec.clusters[(*ds.labels)[i]].center;
            CHECK(ds.data.row(i)[0] == c[0]);
            CHECK(ds.data.row(i)[1] == c[1]);
        }
        for (int l : *ds.labels) CHECK(l < 2);
    }
    SUBCASE("cluster means concentrate around the centres") {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            BlobSpec spec{{{{0.0, 0.0}, 0.5, 200}, {{6.0, -2.0}, 1.5, 100}}, 0, 10.0, seed};
            const auto ds = generate_blobs(spec);
            for (std::size_t c = 0; c < 2; ++c) {
                double sum[2] = {0.0, 0.0};
                std::size_t count = 0;
                for (std::size_t i = 0; i < ds.data.rows(); ++i)
                    if ((*ds.labels)[i] == int(c)) {
                        sum[0] += ds.data.row(i)[0];
                        sum[1] += ds.data.row(i)[1];
                        ++count;
                    }
                const auto& cl = spec.clusters[c];
                REQUIRE(count == cl.count);
                const double bound = 4.0 * cl.stdev / std::sqrt(double(count));
                for (int j = 0; j < 2; ++j) CHECK(std::abs(sum[j] / count - cl.center[j]) <= bound);
            }
        }
    }
    SUBCASE("outliers get their own label and stay inside the scaled box") {
        BlobSpec spec{{{{0.0, 0.0}, 0.2, 50}, {{6.0, 0.0}, 0.2, 50}}, 20, 10.0, 4};
        const auto ds = generate_blobs(spec);
        CHECK(ds.data.rows() == 120);
        for (std::size_t i = 100; i < 120; ++i) {
            CHECK((*ds.labels)[i] == 2);
            CHECK(std::abs(ds.data.row(i)[0] - 3.0) <= 30.0);
            CHECK(std::abs(ds.data.row(i)[1]) <= 2.0);
        }
        CHECK(generate_blobs(spec).data.matrix() == ds.data.matrix());
    }
    SUBCASE("invalid specs") {
        CHECK_THROWS(generate_blobs(BlobSpec{}));
        CHECK_THROWS(generate_blobs(BlobSpec{{{{0.0}, -1.0, 3}}, 0, 10.0, 0}));
        CHECK_THROWS(generate_blobs(BlobSpec{{{{0.0}, 1.0, 3}, {{0.0, 1.0}, 1.0, 3}}, 0, 10.0, 0}));
    }
}
