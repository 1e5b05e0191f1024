#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "testutil.hpp"
#include "tsplab/oracle.hpp"
#include "tsplab/rng.hpp"
#include "tsplab/subgrad.hpp"

using namespace tsplab;

namespace {

TspInstance square() {
    TspInstance inst;
    inst.n = 4;
    inst.coords = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    return inst;
}

} // namespace

TEST_CASE("held_karp_bound on the square is tight") {
    PiVector zero(4, 0.0);
    CHECK(held_karp_bound(square(), zero) == doctest::Approx(4.0));
}

TEST_CASE("held_karp_bound is a lower bound for any pi") {
    Rng rng(55);
    for (int rep = 0; rep < 30; ++rep) {
        TspInstance inst = generate_uniform(10, 600 + rep);
        PiVector pi(10);
        for (double& v : pi) v = rng.uniform_in(-0.2, 0.2);
        double w = held_karp_bound(inst, pi);
        double opt = exact_bruteforce(inst).length;
        CHECK(w <= opt + 1e-9);
    }
}

TEST_CASE("first ascent step applies pi += t * (d - 2)") {
    TspInstance inst = generate_uniform(9, 123);
    PiVector zero(9, 0.0);
    OneTree t0 = minimum_one_tree(inst, zero);
    REQUIRE(!t0.all_degree_two()); // otherwise the test is vacuous

    AscentSchedule sched;
    sched.initial_step = 0.1;
    sched.max_steps = 1;
    sched.initial_period = 1;
    AscentResult res = subgradient_ascent(inst, sched);
    REQUIRE(res.trace.size() == 2);

    PiVector pi1(9);
    for (int i = 0; i < 9; ++i) pi1[i] = 0.1 * (t0.degrees[i] - 2);
    CHECK(res.trace[1].w == doctest::Approx(held_karp_bound(inst, pi1)).epsilon(1e-12));
}

TEST_CASE("square converges at step zero") {
    AscentResult res = subgradient_ascent(square(), {});
    CHECK(res.converged_degree_two);
    CHECK(res.trace.size() == 1);
    CHECK(res.w_best == doctest::Approx(4.0));
    for (double v : res.pi_best) CHECK(v == 0.0);
}

TEST_CASE("ascent improves the bound and stays valid") {
    int improved = 0;
    double init_gap_sum = 0.0, final_gap_sum = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        TspInstance inst = generate_uniform(10, 800 + rep);
        double opt = exact_bruteforce(inst).length;
        AscentResult res = subgradient_ascent(inst, {});
        double w0 = res.trace[0].w;
        for (const auto& row : res.trace) CHECK(row.w <= opt + 1e-9);
        CHECK(res.w_best >= w0 - 1e-12);
        if (res.w_best > w0) ++improved;
        init_gap_sum += (opt - w0) / opt;
        final_gap_sum += (opt - res.w_best) / opt;

        // Monotone best: w_best is the running max of the trace.
        double run_max = -1e100;
        for (const auto& row : res.trace) run_max = std::max(run_max, row.w);
        CHECK(res.w_best == doctest::Approx(run_max));
    }
    CHECK(improved >= 8);
    CHECK(final_gap_sum < init_gap_sum);
}

TEST_CASE("trace dump format") {
    AscentSchedule sched;
    sched.initial_step = 0.5;
    AscentResult res = subgradient_ascent(square(), sched);
    std::string dump = write_ascent_trace(res);
    CHECK(dump == "0 4 0.5\n");
}

TEST_CASE("fixed point: degree-2 tree leaves pi unchanged") {
    // On the square every step multiplies (d - 2) = 0.
    TspInstance sq = square();
    PiVector zero(4, 0.0);
    OneTree t = minimum_one_tree(sq, zero);
    REQUIRE(t.all_degree_two());
    PiVector pi = zero;
    for (int i = 0; i < 4; ++i) pi[i] += 0.5 * (t.degrees[i] - 2);
    CHECK(pi == zero);
}

TEST_CASE("penalized tour length telescopes for any fixed tour") {
    Rng rng(91);
    TspInstance inst = generate_uniform(11, 14);
    PiVector pi(11);
    for (double& v : pi) v = rng.uniform_in(-0.5, 0.5);
    double pi_sum = 0.0;
    for (double v : pi) pi_sum += v;
    PiVector zero(11, 0.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<int> order(11);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        double penalized = testutil::order_cost(inst, pi, order);
        double original = testutil::order_cost(inst, zero, order);
        CHECK(penalized - 2.0 * pi_sum == doctest::Approx(original).epsilon(1e-12));
    }
}
