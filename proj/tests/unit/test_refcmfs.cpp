#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fit_checks.hpp"
#include "oracles.hpp"
#include "refcmfs/refcmfs.hpp"

using namespace refcmfs;

namespace {

std::vector<double> random_h(Rng& rng, std::size_t c, double lo = 0.1, double hi = 10.0) {
    std::vector<double> h(c);
    for (double& v : h) v = rng.uniform(lo, hi);
    return h;
}

double pick_r(Rng& rng) {
    const double rs[] = {1.1, 1.5, 2.0};
    return rs[rng.index(3)];
}

std::size_t nonzeros(std::span<const double> row) {
    return static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](double v) { return v != 0.0; }));
}

} // namespace

TEST_CASE("distance_row") {
    const CentroidMatrix b(2, 2, {3.0, 4.0, 0.0, 1.0});
    const std::vector<double> origin{0.0, 0.0};
    CHECK(distance_row(origin, b) == DistanceRow{5.0, 1.0});
    const std::vector<double> on_b{3.0, 4.0};
    CHECK(distance_row(on_b, b)[0] == 0.0);
    CHECK_THROWS(distance_row(std::vector<double>{1.0}, b));

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.index(12), c = 1 + rng.index(6);
        std::vector<double> x(d), bv(c * d);
        for (double& v : x) v = rng.uniform(-5, 5);
        for (double& v : bv) v = rng.uniform(-5, 5);
        const CentroidMatrix cm(c, d, bv);
        const auto h = distance_row(x, cm);
        for (std::size_t k = 0; k < c; ++k) {
            const double expect = oracle::naive_distance(x, cm.row(k));
            CHECK(std::abs(h[k] - expect) <= 1e-12 * std::max(1.0, expect));
        }
    }
}

TEST_CASE("rank_ascending reproduces the worked ranking") {
    const auto ranked = rank_ascending(std::vector<double>{2.4, 3.5, 0.6, 7.8, 1.9});
    CHECK(ranked.sorted == std::vector<double>{0.6, 1.9, 2.4, 3.5, 7.8});
    CHECK(ranked.order == std::vector<std::size_t>{2, 4, 0, 1, 3});
}

TEST_CASE("rank_ascending is stable and agrees with an insertion sort") {
    CHECK(rank_ascending(std::vector<double>{1, 1, 1}).order == std::vector<std::size_t>{0, 1, 2});
    CHECK(rank_ascending(std::vector<double>{2, 1, 2, 1}).order == std::vector<std::size_t>{1, 3, 0, 2});
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> h(1 + rng.index(20));
        // Coarse values force ties.
        for (double& v : h) v = double(rng.index(6));
        const auto ranked = rank_ascending(h);
        CHECK(ranked.sorted == oracle::insertion_sorted(h));
        for (std::size_t p = 0; p < h.size(); ++p) CHECK(h[ranked.order[p]] == ranked.sorted[p]);
        for (std::size_t p = 1; p < h.size(); ++p)
            if (ranked.sorted[p - 1] == ranked.sorted[p]) CHECK(ranked.order[p - 1] < ranked.order[p]);
    }
}

TEST_CASE("update_membership_row worked examples") {
    SUBCASE("r = 2 gives memberships proportional to 1/h on the three nearest") {
        const std::vector<double> h{2.4, 3.5, 0.6, 7.8, 1.9};
        const auto row = update_membership_row(h, 3, 2.0);
        CHECK(row.support == std::vector<std::size_t>{2, 4, 0});
        CHECK(row.values[2] == doctest::Approx(0.6387).epsilon(1e-4));
        CHECK(row.values[4] == doctest::Approx(0.2017).epsilon(1e-3));
        CHECK(row.values[0] == doctest::Approx(0.1597).epsilon(1e-3));
        CHECK(row.values[1] == 0.0);
        CHECK(row.values[3] == 0.0);
        CHECK_FALSE(row.degenerate);

        // Grid search over the support at 1e-4 resolution.
        const std::vector<double> hs{h[2], h[4], h[0]};
        const auto best = oracle::best_sparse_row(hs, 3, 2.0, 1e-4, 0);
        CHECK(best.weights[0] == doctest::Approx(0.6387).epsilon(2e-4));
        CHECK(best.weights[1] == doctest::Approx(0.2017).epsilon(1e-3));
        CHECK(best.weights[2] == doctest::Approx(0.1597).epsilon(1e-3));
    }
    SUBCASE("equal distances split evenly over the first k_tilde") {
        const auto row = update_membership_row(std::vector<double>{5, 5, 5, 5}, 2, 1.1);
        CHECK(row.support == std::vector<std::size_t>{0, 1});
        CHECK(row.values == std::vector<double>{0.5, 0.5, 0.0, 0.0});
    }
    SUBCASE("a zero distance absorbs the whole row") {
        const auto row = update_membership_row(std::vector<double>{0, 1, 2}, 2, 1.1);
        CHECK(row.values == std::vector<double>{1.0, 0.0, 0.0});
        CHECK(row.degenerate);
    }
    SUBCASE("several zero distances share the mass") {
        const auto row = update_membership_row(std::vector<double>{3, 0, 1e-13, 2}, 3, 1.5);
        CHECK(row.values == std::vector<double>{0.0, 0.5, 0.5, 0.0});
        CHECK(row.degenerate);
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS(update_membership_row(std::vector<double>{1, 2}, 0, 1.1));
        CHECK_THROWS(update_membership_row(std::vector<double>{1, 2}, 3, 1.1));
        CHECK_THROWS(update_membership_row(std::vector<double>{1, 2}, 1, 1.0));
    }
}

TEST_CASE("update_membership_row picks the k_tilde nearest and beats exhaustive search") {
    Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t c = 2 + rng.index(4);
        const std::size_t k = 1 + rng.index(std::min<std::size_t>(3, c));
        const double r = pick_r(rng);
        const auto h = random_h(rng, c);
        const auto row = update_membership_row(h, k, r);
        const double value = row_objective(h, row.values, r);
        const auto best = oracle::best_sparse_row(h, k, r, 1e-2, 4);
        CHECK(value <= best.value + 1e-6);

        auto sorted = oracle::insertion_sorted(h);
        for (std::size_t s : row.support) CHECK(h[s] <= sorted[k - 1]);
        CHECK(nonzeros(row.values) == k);
    }
}

TEST_CASE("membership is invariant to scaling the distances") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t c = 2 + rng.index(7);
        const std::size_t k = 1 + rng.index(c);
        const double r = pick_r(rng);
        const auto h = random_h(rng, c);
        const double gamma = std::exp(rng.uniform(-5.0, 5.0));
        std::vector<double> scaled(h);
        for (double& v : scaled) v *= gamma;
        const auto a = update_membership_row(h, k, r), b = update_membership_row(scaled, k, r);
        for (std::size_t j = 0; j < c; ++j) CHECK(std::abs(a.values[j] - b.values[j]) <= 1e-12);
    }
}

TEST_CASE("optimal row value matches the closed-form expression") {
    Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t c = 2 + rng.index(9);
        const std::size_t k = 1 + rng.index(c);
        const double r = pick_r(rng);
        const auto h = random_h(rng, c, 1e-3, 50.0);
        const auto row = update_membership_row(h, k, r);
        long double sum = 0.0L;
        for (std::size_t s : row.support) sum += std::pow((long double)h[s], 1.0L / (1.0L - r));
        const double expect = static_cast<double>(std::pow(sum, (long double)(1.0 - r)));
        CHECK(std::abs(row_objective(h, row.values, r) - expect) <= 1e-10 * expect);
    }
}

TEST_CASE("random feasible rows on the same support never do better") {
    Rng rng(23);
    const std::vector<double> h{2.4, 3.5, 0.6, 7.8, 1.9};
    for (double r : {1.1, 1.5, 2.0}) {
        const auto row = update_membership_row(h, 3, r);
        const double best = row_objective(h, row.values, r);
        for (int draw = 0; draw < 1000; ++draw) {
            std::vector<double> trial(5, 0.0);
            double total = 0.0;
            for (std::size_t s : row.support) total += trial[s] = -std::log(1.0 - rng.uniform());
            for (double& v : trial) v /= total;
            CHECK(row_objective(h, trial, r) >= best - 1e-12);
        }
    }
}

TEST_CASE("row_objective of a one-hot row at the nearest centroid is the minimum distance") {
    const std::vector<double> h{2.4, 3.5, 0.6, 7.8, 1.9};
    CHECK(row_objective(h, std::vector<double>{0, 0, 1, 0, 0}, 1.7) == 0.6);
}

TEST_CASE("limits k_tilde = 1 and k_tilde = c") {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t c = 2 + rng.index(7);
        const double r = pick_r(rng);
        const auto h = random_h(rng, c);
        const auto hard = update_membership_row(h, 1, r);
        const auto nearest = static_cast<std::size_t>(std::min_element(h.begin(), h.end()) - h.begin());
        for (std::size_t j = 0; j < c; ++j) CHECK(hard.values[j] == (j == nearest ? 1.0 : 0.0));
        const auto full = update_membership_row(h, c, r);
        for (double v : full.values) CHECK(v > 0.0);
    }
}

TEST_CASE("update_weights") {
    const DataMatrix data(2, 1, {0.5, 2.0});
    const auto w = update_weights(data, CentroidMatrix(2, 1, {0.0, 2.0}));
    CHECK(w.values(0, 0) == 1.0);
    CHECK(w.values(1, 1) == doctest::Approx(5e8).epsilon(1e-15));

    Rng rng(8);
    const auto x = oracle::random_data(rng, 40, 3, 3);
    const CentroidMatrix b(3, 3, {0, 0, 0, 5, 5, 5, 10, 0, 3});
    const auto s = update_weights(x, b);
    const auto dist = oracle::euclidean_distances(x, b);
    for (std::size_t i = 0; i < 40; ++i)
        for (std::size_t k = 0; k < 3; ++k)
            if (dist(i, k) > kWeightFloor) CHECK(std::abs(s.values(i, k) * 2.0 * dist(i, k) - 1.0) <= 1e-12);
}

TEST_CASE("update_centroids") {
    SUBCASE("one-hot memberships with uniform weights give cluster means") {
        const DataMatrix data(4, 1, {0.0, 2.0, 10.0, 14.0});
        const MembershipMatrix alpha(Matrix(4, 2, std::vector<double>{1, 0, 1, 0, 0, 1, 0, 1}), 1);
        const WeightMatrix s{Matrix(4, 2, 3.0)};
        const auto up = update_centroids(data, alpha, s, 1.1);
        CHECK(up.centroids.row(0)[0] == doctest::Approx(1.0));
        CHECK(up.centroids.row(1)[0] == doctest::Approx(12.0));
        CHECK(up.reseeds.empty());
    }
    SUBCASE("single cluster uses the weights as the mean weights") {
        Rng rng(4);
        const auto data = oracle::random_data(rng, 30, 2, 2);
        const MembershipMatrix alpha(Matrix(30, 1, 1.0), 1);
        Matrix sv(30, 1);
        for (double& v : sv.values()) v = rng.uniform(0.1, 3.0);
        const auto up = update_centroids(data, alpha, WeightMatrix{sv}, 1.5);
        for (std::size_t j = 0; j < 2; ++j) {
            long double num = 0.0L, den = 0.0L;
            for (std::size_t i = 0; i < 30; ++i) {
                num += (long double)sv(i, 0) * data.row(i)[j];
                den += sv(i, 0);
            }
            CHECK(up.centroids.row(0)[j] == doctest::Approx(double(num / den)).epsilon(1e-12));
        }
    }
    SUBCASE("two symmetric points meet halfway") {
        const DataMatrix data(2, 1, {0.0, 1.0});
        const MembershipMatrix alpha(Matrix(2, 1, 1.0), 1);
        const auto up = update_centroids(data, alpha, WeightMatrix{Matrix(2, 1, 0.7)}, 1.1);
        CHECK(up.centroids.row(0)[0] == 0.5);
    }
    SUBCASE("a cluster with no mass is reseeded at the worst-served sample") {
        const DataMatrix data(3, 1, {0.0, 1.0, 9.0});
        const MembershipMatrix alpha(Matrix(3, 2, std::vector<double>{1, 0, 1, 0, 1, 0}), 1);
        const std::vector<double> loss{0.5, 0.5, 8.5};
        const auto up = update_centroids(data, alpha, WeightMatrix{Matrix(3, 2, 1.0)}, 1.1, loss);
        REQUIRE(up.reseeds.size() == 1);
        CHECK(up.reseeds[0].cluster == 1);
        CHECK(up.reseeds[0].sample == 2);
        CHECK(up.centroids.row(1)[0] == 9.0);
    }
}

TEST_CASE("objective") {
    const DataMatrix data(2, 2, {1.0, 1.0, 4.0, 5.0});
    const CentroidMatrix b(2, 2, {1.0, 1.0, 4.0, 5.0});
    const MembershipMatrix alpha(Matrix(2, 2, std::vector<double>{1, 0, 0, 1}), 1);
    CHECK(objective(data, b, alpha, 1.1) == 0.0);

    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.index(40), d = 1 + rng.index(5), c = 2 + rng.index(4);
        const auto x = oracle::random_data(rng, n, d, c);
        std::vector<double> bv(c * d);
        for (double& v : bv) v = rng.uniform(0, 10);
        const CentroidMatrix cm(c, d, bv);
        Matrix a(n, c);
        for (std::size_t i = 0; i < n; ++i) {
            double total = 0.0;
            for (std::size_t k = 0; k < c; ++k) total += a(i, k) = rng.uniform();
            for (std::size_t k = 0; k < c; ++k) a(i, k) /= total;
        }
        const double r = pick_r(rng);
        const MembershipMatrix m(a, c);
        const double expect = oracle::triple_loop_objective(x, cm, m, r, false);
        CHECK(std::abs(objective(x, cm, m, r) - expect) <= 1e-10 * expect);
    }
}

TEST_CASE("fit recovers singleton clusters exactly") {
    std::vector<double> v;
    std::vector<int> truth;
    const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
    for (int k = 0; k < 3; ++k)
        for (int rep = 0; rep < 5; ++rep) {
            v.push_back(centers[k][0]);
            v.push_back(centers[k][1]);
            truth.push_back(k);
        }
    const DataMatrix data(15, 2, v);
    FitConfig cfg;
    cfg.cluster_count = 3;
    cfg.k_tilde = 1;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        cfg.rng_seed = seed;
        const auto res = fit(data, cfg);
        CHECK(fit_checks::problems(res, data, fit_checks::Loss::Plain).empty());
        CHECK(res.objective_trace.back() == 0.0);
        CHECK(oracle::brute_force_accuracy(res.labels, truth) == 1.0);
    }
}

TEST_CASE("fit descends monotonically on random instances and keeps every invariant") {
    Rng rng(1);
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t n = 20 + rng.index(181), d = 2 + rng.index(9), c = 2 + rng.index(7);
        const auto data = oracle::random_data(rng, n, d, c);
        FitConfig cfg;
        cfg.cluster_count = static_cast<int>(c);
        cfg.k_tilde = static_cast<int>(1 + rng.index(c));
        cfg.fuzzifier = pick_r(rng);
        cfg.rng_seed = inst;
        cfg.init = rng.index(2) ? InitStrategy{RandomSamples{}} : InitStrategy{KMeansPlusPlus{}};
        const auto res = fit(data, cfg);
        const auto found = fit_checks::problems(res, data, fit_checks::Loss::Plain);
        INFO("instance " << inst << ": " << fit_checks::joined(found));
        CHECK(found.empty());
        CHECK(res.objective_trace.size() == std::size_t(res.iterations));
        CHECK(objective(data, res.centroids, res.membership, cfg.fuzzifier) == res.objective_trace.back());
        CHECK(res.iterations <= cfg.max_iter);
    }
}

TEST_CASE("fit rejects invalid configurations before iterating") {
    const DataMatrix data(4, 1, {0.0, 1.0, 2.0, 3.0});
    FitConfig cfg;
    cfg.cluster_count = 2;
    cfg.k_tilde = 1;
    cfg.fuzzifier = 0.9;
    CHECK_THROWS_AS(fit(data, cfg), ConfigError);
    cfg.fuzzifier = 1.1;
    cfg.cluster_count = 5;
    CHECK_THROWS_AS(fit(data, cfg), ConfigError);
}

TEST_CASE("fit is deterministic and equivariant under centroid relabeling") {
    Rng rng(77);
    const auto data = oracle::random_data(rng, 120, 3, 4);
    std::vector<double> bv(4 * 3);
    for (double& v : bv) v = rng.uniform(0, 10);
    const std::size_t perm[4] = {2, 0, 3, 1};
    std::vector<double> pv(bv.size());
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 3; ++j) pv[k * 3 + j] = bv[perm[k] * 3 + j];

    FitConfig cfg;
    cfg.cluster_count = 4;
    cfg.k_tilde = 2;
    cfg.init = CentroidMatrix(4, 3, bv);
    const auto a = fit(data, cfg);
    const auto again = fit(data, cfg);
    CHECK(a.membership.matrix() == again.membership.matrix());
    CHECK(a.objective_trace == again.objective_trace);

    cfg.init = CentroidMatrix(4, 3, pv);
    const auto b = fit(data, cfg);
    CHECK(a.iterations == b.iterations);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (std::size_t k = 0; k < 4; ++k)
            CHECK(b.membership(i, k) == doctest::Approx(a.membership(i, perm[k])).epsilon(1e-9));
        CHECK(perm[b.labels[i]] == std::size_t(a.labels[i]));
    }
}

TEST_CASE("run_iterations runs exactly the requested count") {
    Rng rng(12);
    const auto data = oracle::random_data(rng, 60, 2, 3);
    FitConfig cfg;
    cfg.cluster_count = 3;
    cfg.k_tilde = 2;
    const auto res = run_iterations(data, cfg, 7);
    CHECK(res.iterations == 7);
    CHECK(res.objective_trace.size() == 7);
    CHECK(fit_checks::problems(res, data, fit_checks::Loss::Plain).empty());
}
