#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "trackfuse/assoc.hpp"

using namespace trackfuse;
using testutil::code_of;

namespace {

struct RandomMatrix {
    CostMatrix matrix;
    std::vector<std::vector<double>> cost;
    std::vector<std::vector<bool>> mask;
};

RandomMatrix random_matrix(std::mt19937_64& gen, std::size_t rows, std::size_t cols, double gate_prob) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RandomMatrix m{CostMatrix(rows, cols), std::vector<std::vector<double>>(rows, std::vector<double>(cols)),
                   std::vector<std::vector<bool>>(rows, std::vector<bool>(cols))};
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m.cost[r][c] = u(gen) * 10.0;
            m.mask[r][c] = u(gen) >= gate_prob;
            m.matrix.set(r, c, m.cost[r][c], m.mask[r][c]);
        }
    }
    return m;
}

void check_structure(const AssignmentResult& res, const CostMatrix& cm) {
    std::vector<int> rows(cm.rows(), 0), cols(cm.cols(), 0);
    for (auto [r, c] : res.matches) {
        CHECK(cm.admissible(r, c));
        ++rows[r];
        ++cols[c];
    }
    for (auto r : res.unmatched_tracks) ++rows[r];
    for (auto c : res.unmatched_detections) ++cols[c];
    for (int v : rows) CHECK(v == 1);
    for (int v : cols) CHECK(v == 1);
}

}  // namespace

TEST_SUITE("assoc") {

TEST_CASE("iou examples") {
    CHECK(iou({0, 0, 10, 10}, {0, 0, 10, 10}) == 1.0);
    CHECK(iou({0, 0, 1, 1}, {5, 5, 6, 6}) == 0.0);
    const double expected = oracle::rasterized_iou(0, 0, 2, 2, 1, 0, 3, 2);
    CHECK(expected == doctest::Approx(1.0 / 3.0));
    CHECK(iou({0, 0, 2, 2}, {1, 0, 3, 2}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("iou agrees with the rasterized oracle and is symmetric") {
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> coord(0, 30), extent(1, 15);
    for (int trial = 0; trial < 2000; ++trial) {
        const int ax = coord(gen), ay = coord(gen), aw = extent(gen), ah = extent(gen);
        const int bx = coord(gen), by = coord(gen), bw = extent(gen), bh = extent(gen);
        const BoundingBox a{double(ax), double(ay), double(ax + aw), double(ay + ah)};
        const BoundingBox b{double(bx), double(by), double(bx + bw), double(by + bh)};
        const double v = iou(a, b);
        CHECK(v == iou(b, a));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(iou(a, a) == 1.0);
        CHECK(v == doctest::Approx(oracle::rasterized_iou(ax, ay, ax + aw, ay + ah, bx, by, bx + bw, by + bh))
                       .epsilon(1e-12));
    }
}

TEST_CASE("centroid distance examples") {
    const BoundingBox a{-1, -1, 1, 1};
    CHECK(centroid_distance(a, a) == 0.0);
    CHECK(centroid_distance(a, {2, 3, 4, 5}) == 5.0);
    const BoundingBox c1{0, 0, 2, 2}, c2{1, 2, 3, 4};
    const double expected = static_cast<double>(std::sqrt(5.0L));
    CHECK(centroid_distance(c1, c2) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(centroid_distance(c1, c2) == doctest::Approx(2.23607).epsilon(1e-6));
}

TEST_CASE("cosine similarity examples and errors") {
    const std::vector<double> e0{1, 0}, e1{0, 1}, d{1, 1};
    CHECK(cosine_similarity(e0, e0) == 1.0);
    CHECK(cosine_similarity(e0, e1) == 0.0);
    CHECK(cosine_similarity(d, e0) == doctest::Approx(oracle::cosine({1, 1}, {1, 0})).epsilon(1e-15));
    CHECK(cosine_similarity(d, e0) == doctest::Approx(0.70711).epsilon(1e-5));
    const std::vector<double> three{1, 0, 0}, zero{0, 0};
    CHECK(code_of([&] { cosine_similarity(e0, three); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { cosine_similarity(e0, zero); }) == ErrorCode::ZeroVector);
}

TEST_CASE("solve_assignment: diagonal and empty cases") {
    CostMatrix cm(2, 2);
    cm.set(0, 0, 1);
    cm.set(0, 1, 2);
    cm.set(1, 0, 2);
    cm.set(1, 1, 1);
    const auto res = solve_assignment(cm);
    REQUIRE(res.matches.size() == 2);
    CHECK(res.matches[0] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(res.matches[1] == std::pair<std::size_t, std::size_t>{1, 1});
    CHECK(res.total_cost(cm) == 2.0);

    const auto one_by_zero = solve_assignment(CostMatrix(1, 0));
    CHECK(one_by_zero.matches.empty());
    CHECK(one_by_zero.unmatched_tracks == std::vector<std::size_t>{0});
    CHECK(one_by_zero.unmatched_detections.empty());
    const auto empty = solve_assignment(CostMatrix());
    CHECK(empty.matches.empty());
}

TEST_CASE("solve_assignment: 5x5 equals the 120-permutation minimum") {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 50; ++trial) {
        auto m = random_matrix(gen, 5, 5, 0.0);
        const auto res = solve_assignment(m.matrix);
        CHECK(res.matches.size() == 5);
        CHECK(std::fabs(res.total_cost(m.matrix) - oracle::permutation_minimum(m.cost)) <= 1e-9);
    }
}

TEST_CASE("solve_assignment: gated rectangular matrices match brute force") {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<std::size_t> dim(0, 6);
    std::uniform_real_distribution<double> gp(0.0, 0.8);
    for (int trial = 0; trial < 300; ++trial) {
        auto m = random_matrix(gen, dim(gen), dim(gen), gp(gen));
        const auto res = solve_assignment(m.matrix);
        check_structure(res, m.matrix);
        const auto brute = oracle::brute_force_assignment(m.cost, m.mask);
        CHECK(res.matches.size() == brute.cardinality);
        CHECK(std::fabs(res.total_cost(m.matrix) - brute.cost) <= 1e-9);
    }
}

TEST_CASE("solve_assignment: invariant under a constant shift of admissible costs") {
    std::mt19937_64 gen(23);
    for (int trial = 0; trial < 200; ++trial) {
        auto m = random_matrix(gen, 4, 6, 0.3);
        CostMatrix shifted(4, 6);
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t c = 0; c < 6; ++c) shifted.set(r, c, m.cost[r][c] + 3.5, m.mask[r][c]);
        const auto a = solve_assignment(m.matrix);
        const auto b = solve_assignment(shifted);
        CHECK(a.matches == b.matches);
        CHECK(b.total_cost(shifted) ==
              doctest::Approx(a.total_cost(m.matrix) + 3.5 * static_cast<double>(a.matches.size())));
    }
}

TEST_CASE("solve_assignment is deterministic") {
    std::mt19937_64 gen(29);
    auto m = random_matrix(gen, 6, 6, 0.2);
    const auto a = solve_assignment(m.matrix);
    const auto b = solve_assignment(m.matrix);
    CHECK(a.matches == b.matches);
    CHECK(a.unmatched_tracks == b.unmatched_tracks);
}

TEST_CASE("solve_greedy picks lowest cost first") {
    CostMatrix cm(2, 2);
    cm.set(0, 0, 0.1);
    cm.set(0, 1, 0.2);
    cm.set(1, 0, 0.15);
    cm.set(1, 1, 0.9);
    const auto g = solve_greedy(cm);
    // Greedy takes (0,0) then is left with (1,1); optimal would be (0,1),(1,0).
    REQUIRE(g.matches.size() == 2);
    CHECK(g.matches[0] == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(g.matches[1] == std::pair<std::size_t, std::size_t>{1, 1});
    const auto o = solve_assignment(cm);
    CHECK(o.total_cost(cm) == doctest::Approx(0.35));

    cm.gate(1, 1);
    const auto gated = solve_greedy(cm);
    CHECK(gated.matches.size() == 1);
    CHECK(gated.unmatched_tracks == std::vector<std::size_t>{1});
}

}
