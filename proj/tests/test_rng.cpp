#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "blockmix/rng.hpp"

using blockmix::RngStream;

TEST_CASE("identical keys give identical sequences") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("different keys give different sequences") {
    RngStream a(1), b(2);
    int agree = 0;
    for (int i = 0; i < 64; ++i) agree += (a.next_u64() == b.next_u64());
    REQUIRE(agree == 0);
}

TEST_CASE("derive is deterministic and label-sensitive") {
    RngStream base(7);
    RngStream c1 = base.derive(10);
    RngStream c2 = base.derive(10);
    RngStream c3 = base.derive(11);
    const auto v1 = c1.next_u64();
    REQUIRE(v1 == c2.next_u64());
    REQUIRE(v1 != c3.next_u64());
}

TEST_CASE("deriving does not disturb the parent stream") {
    RngStream a(5), b(5);
    (void)a.derive(99);
    REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform01 lies in [0,1) and uniform01_pos in (0,1]") {
    RngStream s(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = s.uniform01_pos();
        REQUIRE(v > 0.0);
        REQUIRE(v <= 1.0);
    }
}

TEST_CASE("below(n) stays below n and hits every residue") {
    RngStream s(11);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = s.below(6);
        REQUIRE(v < 6);
        seen.insert(v);
    }
    REQUIRE(seen.size() == 6);
}

TEST_CASE("sign returns only +1 and -1, roughly balanced") {
    RngStream s(13);
    int plus = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const int v = s.sign();
        REQUIRE((v == 1 || v == -1));
        plus += (v == 1);
    }
    // 4 standard errors around n/2
    REQUIRE(std::abs(plus - n / 2) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("bernoulli frequency tracks p") {
    RngStream s(17);
    const double p = 0.3;
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += s.bernoulli(p);
    const double se = std::sqrt(p * (1 - p) * n);
    REQUIRE(std::abs(hits - p * n) < 4 * se);
}

TEST_CASE("nested derives with distinct paths decorrelate") {
    RngStream base(123);
    auto a = base.derive(1).derive(2);
    auto b = base.derive(2).derive(1);
    int agree = 0;
    for (int i = 0; i < 64; ++i) agree += (a.next_u64() == b.next_u64());
    REQUIRE(agree == 0);
}
