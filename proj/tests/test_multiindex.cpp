#include <catch2/catch_amalgamated.hpp>

#include "gnt/multiindex.hpp"

using gnt::MultiIndex;

TEST_CASE("zero index and degree", "[multiindex]") {
    const auto z = MultiIndex::zero(3);
    CHECK(z.size() == 3);
    CHECK(z.degree() == 0);
    CHECK(MultiIndex({2, 0, 1}).degree() == 3);
    CHECK_THROWS_AS(MultiIndex::zero(0), std::invalid_argument);
    CHECK_THROWS_AS(MultiIndex({1, -1}), std::invalid_argument);
}

TEST_CASE("lower annihilates at zero entries", "[multiindex]") {
    const MultiIndex u({2, 0, 1});
    auto d0 = gnt::lower(0, u);
    REQUIRE(d0.has_value());
    CHECK(*d0 == MultiIndex({1, 0, 1}));
    CHECK_FALSE(gnt::lower(1, u).has_value());
    auto d2 = gnt::lower(2, u);
    REQUIRE(d2.has_value());
    CHECK(*d2 == MultiIndex({2, 0, 0}));
    CHECK_THROWS_AS(gnt::lower(3, u), std::invalid_argument);
    CHECK_THROWS_AS(gnt::lower(-1, u), std::invalid_argument);
}

TEST_CASE("raise followed by lower is the identity", "[multiindex]") {
    const MultiIndex u({0, 3});
    for (int axis = 0; axis < u.size(); ++axis) {
        const auto up = gnt::raise(axis, u);
        CHECK(up.degree() == u.degree() + 1);
        const auto back = gnt::lower(axis, up);
        REQUIRE(back.has_value());
        CHECK(*back == u);
    }
}

TEST_CASE("enumeration is graded with larger leading entries first", "[multiindex]") {
    const auto got = gnt::enumerate_multi_indices(2, 2);
    const std::vector<MultiIndex> expected = {
        MultiIndex({0, 0}), MultiIndex({1, 0}), MultiIndex({0, 1}),
        MultiIndex({2, 0}), MultiIndex({1, 1}), MultiIndex({0, 2}),
    };
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == expected[i]);

    // The enumeration must agree with the comparator.
    for (std::size_t i = 0; i + 1 < got.size(); ++i) CHECK(got[i] < got[i + 1]);
}

TEST_CASE("enumeration count is the binomial coefficient", "[multiindex]") {
    auto binom = [](int a, int b) {
        double r = 1.0;
        for (int k = 1; k <= b; ++k) r = r * (a - b + k) / k;
        return static_cast<std::size_t>(r + 0.5);
    };
    for (int q = 1; q <= 4; ++q)
        for (int d = 0; d <= 5; ++d)
            CHECK(gnt::enumerate_multi_indices(q, d).size() == binom(d + q, q));
}

TEST_CASE("permutation composition and entrywise sum", "[multiindex]") {
    const MultiIndex u({3, 1, 0});
    CHECK(gnt::permute(u, {2, 0, 1}) == MultiIndex({0, 3, 1}));
    CHECK(gnt::permute(u, {0, 1, 2}) == u);
    CHECK_THROWS_AS(gnt::permute(u, {0, 1}), std::invalid_argument);
    CHECK(MultiIndex({1, 2}) + MultiIndex({0, 3}) == MultiIndex({1, 5}));
    CHECK_THROWS_AS(MultiIndex({1}) + MultiIndex({1, 2}), std::invalid_argument);
}

TEST_CASE("string form", "[multiindex]") {
    CHECK(MultiIndex({2, 0, 1}).to_string() == "(2,0,1)");
    CHECK(MultiIndex::zero(1).to_string() == "(0)");
}
