#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>

#include "testutil.hpp"
#include "tsplab/candidates.hpp"
#include "tsplab/oracle.hpp"

using namespace tsplab;

namespace {

TspInstance square() {
    TspInstance inst;
    inst.n = 4;
    inst.coords = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    return inst;
}

} // namespace

TEST_CASE("bruteforce on the square") {
    OracleResult res = exact_bruteforce(square());
    CHECK(res.length == doctest::Approx(4.0));
    CHECK(res.tour.order == std::vector<int>{0, 1, 2, 3});
    CHECK(res.method == OracleMethod::bruteforce);
}

TEST_CASE("triangle is the unique n=3 tour") {
    TspInstance tri;
    tri.n = 3;
    tri.coords = {{0, 0}, {1, 0}, {0, 1}};
    OracleResult res = exact_bruteforce(tri);
    CHECK(res.tour.order == std::vector<int>{0, 1, 2});
    CHECK(res.length == doctest::Approx(2.0 + std::sqrt(2.0)));
}

TEST_CASE("bruteforce and held-karp agree on random instances") {
    for (int rep = 0; rep < 15; ++rep) {
        int n = 5 + rep % 6;
        TspInstance inst = generate_uniform(n, 3000 + rep);
        OracleResult bf = exact_bruteforce(inst);
        OracleResult dp = exact_held_karp(inst);
        CHECK(std::abs(bf.length - dp.length) < 1e-9);
        CHECK(bf.tour.order == dp.tour.order);
    }
}

TEST_CASE("held-karp matches brute enumeration length") {
    TspInstance inst = generate_uniform(9, 123);
    PiVector zero(9, 0.0);
    auto brute = testutil::enumerate_tours(inst, zero);
    CHECK(exact_held_karp(inst).length == doctest::Approx(brute.best).epsilon(1e-12));
}

TEST_CASE("size guards") {
    TspInstance big = generate_uniform(11, 1);
    CHECK_THROWS_AS(exact_bruteforce(big), Error);
    try {
        exact_bruteforce(big);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::too_large);
    }
    TspInstance huge = generate_uniform(19, 1);
    CHECK_THROWS_AS(exact_held_karp(huge), Error);
}

TEST_CASE("n=16 held-karp completes within the documented budget") {
    TspInstance inst = generate_uniform(16, 2);
    auto t0 = std::chrono::steady_clock::now();
    OracleResult res = exact_held_karp(inst);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(res.length > 0.0);
    CHECK(secs < 10.0); // documented budget: well under ten seconds
}

TEST_CASE("canonical_tour normal form") {
    Tour t = Tour::from_order({2, 1, 0, 3});
    Tour c = canonical_tour(t);
    CHECK(c.order[0] == 0);
    CHECK(c.order[1] < c.order.back());
    Tour c2 = canonical_tour(c);
    CHECK(c2.order == c.order);
    // Same cycle, same canonical form regardless of rotation/direction.
    Tour r = Tour::from_order({3, 0, 1, 2});
    CHECK(canonical_tour(r).order == canonical_tour(Tour::from_order({2, 1, 0, 3})).order);
}

TEST_CASE("optimal_edges on the square") {
    TspInstance sq = square();
    SparseGraph g = build_sparse_graph(sq, 2);
    std::vector<std::uint8_t> ind = optimal_edges(sq, g);
    int marked = 0;
    for (std::uint8_t b : ind) marked += b;
    CHECK(marked == 8); // all side edges in both directions
}

TEST_CASE("optimal_edges is consistent with candidate_quality") {
    for (int rep = 0; rep < 8; ++rep) {
        TspInstance inst = generate_uniform(12, 600 + rep);
        SparseGraph g = build_sparse_graph(inst, 5);
        OracleResult opt = exact_solve(inst);
        std::vector<std::uint8_t> ind = optimal_edges(inst, g);

        int marked = 0;
        for (std::uint8_t b : ind) marked += b;
        CHECK(marked <= 2 * inst.n);

        // Missing directed tour edges == marks short of 2n.
        std::vector<double> scores(ind.begin(), ind.end());
        CandidateSet set = from_scores(g, scores, g.gamma);
        CandidateQuality q = candidate_quality(set, opt.tour);
        CHECK(q.missed_fraction == doctest::Approx((2.0 * inst.n - marked) / (2.0 * inst.n)));
    }
}

TEST_CASE("count_optimal_tours sees symmetry ties") {
    // Regular pentagon: unique optimum. Square grid with equal spacing: many.
    TspInstance penta;
    penta.n = 5;
    for (int i = 0; i < 5; ++i) {
        double a = 2.0 * 3.14159265358979323846 * i / 5;
        penta.coords.push_back({std::cos(a), std::sin(a)});
    }
    CHECK(count_optimal_tours(penta) == 1);

    TspInstance grid;
    grid.n = 9;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) grid.coords.push_back({double(c), double(r)});
    CHECK(count_optimal_tours(grid) > 1);
}
