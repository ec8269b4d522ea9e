#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "blockmix/construction.hpp"

using namespace blockmix;

namespace {

ConstructionParams make_params(int level) {
    ConstructionParams p;
    p.arity = 6;
    p.level = level;
    p.thinning = 0.5;
    p.seed = 1234;
    return p;
}

}  // namespace

TEST_CASE("parameter validation") {
    ConstructionParams p = make_params(1);
    REQUIRE_NOTHROW(p.validate());
    p.arity = 5;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.arity = 4;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = make_params(1);
    p.level = -1;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = make_params(1);
    p.thinning = 0.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p.thinning = 1.0;
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
    p = make_params(30);  // 6^30 overflows int64
    REQUIRE_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("block length is L^n") {
    REQUIRE(make_params(0).block_length() == 1);
    REQUIRE(make_params(1).block_length() == 6);
    REQUIRE(make_params(3).block_length() == 216);
}

TEST_CASE("level-0 block is one symmetric bounded value") {
    const auto params = make_params(0);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto block = build_block(params, 0, RngStream(s));
        REQUIRE(block.values.size() == 1);
        REQUIRE(std::abs(block.values[0]) <= kSqrt3);
        REQUIRE(block.values[0] != 0.0);
    }
}

TEST_CASE("level-1 coordinate signs multiply to -1 on every draw") {
    const auto params = make_params(1);
    RngStream seeds(2024);
    for (int rep = 0; rep < 10000; ++rep) {
        const auto block = build_block(params, 1, seeds.derive(rep));
        double prod = 1.0;
        for (double v : block.values) prod *= (v >= 0.0) ? 1.0 : -1.0;
        REQUIRE(prod == -1.0);
    }
}

TEST_CASE("product of top sub-block sums is negative at every level") {
    const auto params = make_params(0);
    RngStream seeds(777);
    for (int level = 1; level <= 3; ++level) {
        for (int rep = 0; rep < 200; ++rep) {
            const auto block =
                build_block(params, level, seeds.derive(level * 1000 + rep));
            const auto sums = subblock_sums(params, block, level - 1);
            REQUIRE(sums.size() == 6);
            double prod = 1.0;
            for (double t : sums) prod *= t;
            REQUIRE(prod < 0.0);
        }
    }
}

TEST_CASE("subblock sums are consistent with the block total") {
    const auto params = make_params(0);
    const auto block = build_block(params, 2, RngStream(9));
    const double total =
        std::accumulate(block.values.begin(), block.values.end(), 0.0);
    for (int sublevel = 0; sublevel <= 2; ++sublevel) {
        const auto sums = subblock_sums(params, block, sublevel);
        const double s = std::accumulate(sums.begin(), sums.end(), 0.0);
        REQUIRE(s == Catch::Approx(total).margin(1e-12));
    }
    REQUIRE(subblock_sums(params, block, 2).size() == 1);
    REQUIRE_THROWS_AS(subblock_sums(params, block, 3), std::invalid_argument);
}

TEST_CASE("window samplers are deterministic in the stream") {
    const auto params = make_params(2);
    const auto w1 = sample_x_window(params, 50, RngStream(31));
    const auto w2 = sample_x_window(params, 50, RngStream(31));
    REQUIRE(w1.values == w2.values);
    const auto y1 = sample_y_window(params, 50, RngStream(31));
    const auto y2 = sample_y_window(params, 50, RngStream(31));
    REQUIRE(y1.values == y2.values);
    const auto t1 = sample_xtilde_window(params, 50, RngStream(31));
    const auto t2 = sample_xtilde_window(params, 50, RngStream(31));
    REQUIRE(t1.values == t2.values);
    REQUIRE(*t1.marks == *t2.marks);
}

TEST_CASE("y windows are block-aligned") {
    // A window of length 2 L^n must consist of two independent blocks:
    // the first L^n values coincide with a length-L^n window from the
    // same stream.
    const auto params = make_params(1);
    const auto full = sample_y_window(params, 12, RngStream(5));
    const auto head = sample_y_window(params, 6, RngStream(5));
    for (int k = 0; k < 6; ++k) REQUIRE(full.values[k] == head.values[k]);
}

TEST_CASE("thinned windows have zeros exactly at the 0-marks") {
    const auto params = make_params(1);
    RngStream seeds(404);
    for (int rep = 0; rep < 200; ++rep) {
        const auto w = sample_xtilde_window(params, 24, seeds.derive(rep));
        REQUIRE(w.marks.has_value());
        for (std::size_t k = 0; k < w.values.size(); ++k) {
            if ((*w.marks)[k] == 0) {
                REQUIRE(w.values[k] == 0.0);
            } else {
                REQUIRE(w.values[k] != 0.0);
            }
        }
    }
}

TEST_CASE("x window marginal variance is 1") {
    const auto params = make_params(1);
    RngStream seeds(606);
    double sum_sq = 0.0;
    const int reps = 100000;
    for (int rep = 0; rep < reps; ++rep) {
        auto stream = seeds.derive(rep);
        const auto w = sample_x_window(params, 1, stream);
        sum_sq += w.values[0] * w.values[0];
    }
    // Var(eps sqrt(3) U) = 1; fourth moment 9/5 gives se ~ sqrt(0.8/reps)
    const double est = sum_sq / reps;
    REQUIRE(std::abs(est - 1.0) < 4.0 * std::sqrt(0.8 / reps));
}

TEST_CASE("window length must be positive") {
    const auto params = make_params(1);
    REQUIRE_THROWS_AS(sample_y_window(params, 0, RngStream(1)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(sample_x_window(params, -3, RngStream(1)),
                      std::invalid_argument);
}
