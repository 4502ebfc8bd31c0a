#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <sstream>

#include "ptycho/scan.hpp"

using namespace ptycho;

TEST_CASE("raster")
{
    const ScanPattern p = raster(8, 2);
    CHECK(p.q() == 4);
    CHECK(p.kind() == ScanKind::raster);
    REQUIRE(p.positions().size() == 16);
    CHECK(p.positions().front().t == Shift{0, 0});
    CHECK(p.positions()[1].t == Shift{0, 2});  // l runs fastest, along the second axis
    CHECK(p.positions().back().t == Shift{6, 6});
    CHECK(p.at(2, 1).t == Shift{4, 2});

    const ScanPattern single = raster(8, 8);
    REQUIRE(single.positions().size() == 1);
    CHECK(single.positions()[0].t == Shift{0, 0});

    CHECK_THROWS_AS(raster(8, 3), Error);
    CHECK_THROWS_AS(raster(8, 0), Error);
}

TEST_CASE("perturbed separable")
{
    CHECK(perturbed_separable(8, 2, {0, 0, 0, 0}, {0, 0, 0, 0}) == raster(8, 2));

    const ScanPattern p = perturbed_separable(8, 2, {0, 0, -1, 0}, {0, 0, -1, 0});
    CHECK(p.kind() == ScanKind::perturbed_separable);
    CHECK(p.at(2, 0).t == Shift{3, 0});
    CHECK(p.at(2, 2).t == Shift{3, 3});
    CHECK(p.at(3, 1).t == Shift{6, 2});
    CHECK(p.max_abs_perturbation() == 1);

    CHECK_THROWS_AS(perturbed_separable(8, 2, {1, 0, 0, 0}, {0, 0, 0, 0}), Error);
    CHECK_THROWS_AS(perturbed_separable(8, 2, {0, 0, 0, 0}, {0, 1, 0}), Error);
    CHECK_THROWS_AS(perturbed_separable(8, 3, {0, 0, 0}, {0, 0, 0}), Error);
}

TEST_CASE("perturbed full")
{
    using T = std::vector<std::vector<int>>;
    const T zero(4, std::vector<int>(4, 0));
    CHECK(perturbed_full(8, 2, zero, zero) == raster(8, 2));

    const T d1 = random_full_delta(4, 4, 7);
    const T d2 = random_full_delta(4, 4, 8);
    for (const auto& row : d1) {
        for (int v : row) {
            CHECK(v >= -4);
            CHECK(v <= 4);
        }
    }
    const ScanPattern p = perturbed_full(8, 2, d1, d2);
    CHECK(p.kind() == ScanKind::perturbed_full);
    CHECK(p.at(1, 3).t == Shift{2 + d1[1][3], 6 + d2[1][3]});
    CHECK(random_full_delta(4, 4, 7) == d1);

    T big = zero;
    big[0][0] = 9;
    const ScanPattern flagged = perturbed_full(8, 2, big, zero);
    const UniquenessReport rep = audit(flagged, 4);
    CHECK_FALSE(rep.conditions_evaluated);
    CHECK(rep.max_abs_delta == 9);
    CHECK_FALSE(rep.perturbation_bounded);

    CHECK_THROWS_AS(perturbed_full(8, 2, T(3, std::vector<int>(4)), zero), Error);
    CHECK_THROWS_AS(perturbed_full(8, 2, zero, T(4, std::vector<int>(3))), Error);
}

TEST_CASE("random separable tables")
{
    const auto d = random_separable_delta(8, 2, 42);
    REQUIRE(d.size() == 8);
    CHECK(d[0] == 0);
    for (int v : d) {
        CHECK(v >= -2);
        CHECK(v <= 2);
    }
    CHECK(random_separable_delta(8, 2, 42) == d);
    CHECK(random_separable_delta(8, 2, 43) != d);
}

TEST_CASE("second differences")
{
    CHECK(second_differences({0, 0, -1, 0}) == std::vector<int>{1, -2});
    CHECK(second_differences({0, 0, 0, 0, 0}) == std::vector<int>{0, 0, 0});
    CHECK(second_differences({0, 1, 2, 3}) == std::vector<int>{0, 0});
    CHECK_THROWS_AS(second_differences({0, 1}), Error);

    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> u(-20, 20);
    for (int trial = 0; trial < 50; ++trial) {
        const int c = u(rng), s = u(rng);
        std::vector<int> d(7);
        for (int k = 0; k < 7; ++k) d[k] = c + s * k;
        for (int a : second_differences(d)) CHECK(a == 0);
    }
}

TEST_CASE("audit")
{
    SUBCASE("pure raster is not coprime")
    {
        const UniquenessReport rep = audit(raster(16, 4), 8);
        CHECK(rep.conditions_evaluated);
        CHECK(rep.a1 == std::vector<int>{0, 0});
        CHECK(rep.gcd1 == 0);
        CHECK(rep.gcd2 == 0);
        CHECK_FALSE(rep.coprime_ok);
        CHECK(rep.overlap_ratio == doctest::Approx(0.5));
    }
    SUBCASE("simple perturbation qualifies when the size conditions hold")
    {
        const ScanPattern p = perturbed_separable(8, 2, {0, 0, -1, 0}, {0, 0, -1, 0});
        const UniquenessReport rep = audit(p, 6);
        CHECK(rep.a1 == std::vector<int>{1, -2});
        CHECK(rep.a2 == std::vector<int>{1, -2});
        CHECK(rep.passes_small1 == std::vector<bool>{true, true});
        CHECK(rep.passes_cover2 == std::vector<bool>{true, true});
        CHECK(rep.passes_small2 == std::vector<bool>{true, true});
        CHECK(rep.qualifying == std::vector<int>{0, 1});
        CHECK(rep.gcd1 == 1);
        CHECK(rep.gcd2 == 1);
        CHECK(rep.coprime_ok);
        CHECK(rep.perturbation_bounded);
    }
    SUBCASE("small2 counts the largest step excess over all positions")
    {
        // m - tau = 2 < 1 + |a_0| + max step (1): j = 0 fails small2.
        const ScanPattern p = perturbed_separable(8, 2, {0, 0, -1, 0}, {0, 0, -1, 0});
        const UniquenessReport rep = audit(p, 4);
        CHECK(rep.passes_small1[0]);
        CHECK(rep.passes_cover2[0]);
        CHECK_FALSE(rep.passes_small2[0]);
        CHECK_FALSE(rep.coprime_ok);
    }
    SUBCASE("no overlap fails everything")
    {
        const UniquenessReport rep = audit(raster(16, 4), 4);
        CHECK(rep.overlap_ratio == 0.0);
        for (bool b : rep.passes_small1) CHECK_FALSE(b);
        for (bool b : rep.passes_cover2) CHECK_FALSE(b);
        for (bool b : rep.passes_small2) CHECK_FALSE(b);
        CHECK_FALSE(rep.coprime_ok);
        CHECK_FALSE(rep.perturbation_bounded);
    }
    SUBCASE("q < 3 cannot be audited")
    {
        const UniquenessReport rep = audit(raster(8, 4), 6);
        CHECK_FALSE(rep.conditions_evaluated);
        CHECK_FALSE(rep.coprime_ok);
    }
    SUBCASE("coprime implies both gcds are one")
    {
        for (std::uint64_t s = 0; s < 200; ++s) {
            const ScanPattern p = perturbed_separable(24, 4, random_separable_delta(6, 2, s),
                                                      random_separable_delta(6, 2, s + 1000));
            const UniquenessReport rep = audit(p, 10);
            if (rep.coprime_ok) {
                CHECK(rep.gcd1 == 1);
                CHECK(rep.gcd2 == 1);
            }
        }
    }
    SUBCASE("a constant offset on one axis changes nothing after renormalisation")
    {
        const std::vector<int> d1{0, 1, -1, 2, 0, -2};
        const std::vector<int> d2{0, -1, 0, 1, 1, 0};
        std::vector<int> moved = d1;
        for (int& v : moved) v += 3;
        for (int& v : moved) v -= moved.front();
        const UniquenessReport a = audit(perturbed_separable(24, 4, d1, d2), 10);
        const UniquenessReport b = audit(perturbed_separable(24, 4, moved, d2), 10);
        CHECK(a.qualifying == b.qualifying);
        CHECK(a.gcd1 == b.gcd1);
        CHECK(a.gcd2 == b.gcd2);
        CHECK(a.coprime_ok == b.coprime_ok);
    }
}

TEST_CASE("coverage union")
{
    SUBCASE("raster within the bound")
    {
        CHECK(coverage_union(raster(16, 4), 8, 0, 0, 1));
        CHECK(coverage_union(raster(16, 4), 8, 0, 0, 2));
        CHECK(coverage_union(raster(12, 3), 6, 3, 1, 2));
    }
    SUBCASE("no overlap")
    {
        CHECK_FALSE(coverage_union(raster(16, 4), 4, 0, 0, 1));
        CHECK_FALSE(coverage_union(raster(12, 3), 3, 0, 0, 2));
    }
    SUBCASE("simple perturbation at n=12, m=6, tau=3")
    {
        const ScanPattern p = perturbed_separable(12, 3, {0, 0, -1, 0}, {0, 0, -1, 0});
        CHECK(coverage_union(p, 6, 0, 0, 1));
    }
    SUBCASE("invalid triplets")
    {
        CHECK_THROWS_AS(coverage_union(raster(12, 3), 6, 2, 0, 1), Error);
        CHECK_THROWS_AS(coverage_union(raster(12, 3), 6, 0, 2, 2), Error);
        CHECK_THROWS_AS(coverage_union(raster(12, 3), 6, 0, 0, 3), Error);
    }
    SUBCASE("closed-form verdicts are sufficient")
    {
        int checked = 0;
        for (std::uint64_t s = 0; s < 150; ++s) {
            for (auto [tau, q, m] : {std::tuple{3, 6, 8}, std::tuple{4, 5, 11}, std::tuple{4, 6, 12}}) {
                const ScanPattern p = perturbed_separable(tau * q, tau, random_separable_delta(q, 1, s),
                                                          random_separable_delta(q, 1, s + 77));
                const UniquenessReport rep = audit(p, m);
                for (int k : rep.qualifying) {
                    for (int l = 0; l < q; ++l) {
                        CHECK(coverage_union(p, m, k, l, 1));
                        CHECK(coverage_union(p, m, l, k, 2));
                        ++checked;
                    }
                }
            }
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("scan file round trip")
{
    for (const ScanPattern& p : {raster(8, 2), perturbed_separable(12, 3, {0, 1, -1, 0}, {0, 0, 1, -1}),
                                 perturbed_full(8, 2, random_full_delta(4, 1, 3), random_full_delta(4, 1, 4))}) {
        std::stringstream ss;
        write_scan_pattern(ss, p);
        const ScanPattern back = read_scan_pattern(ss);
        CHECK(back.shifts() == p.shifts());
        CHECK(back.kind() == p.kind());
        CHECK(back.tau() == p.tau());
    }
    std::stringstream bad("2 4 raster\n0 0 0 0\n");
    CHECK_THROWS_AS(read_scan_pattern(bad), Error);
    std::stringstream garbage("hello\n");
    CHECK_THROWS_AS(read_scan_pattern(garbage), Error);
}
