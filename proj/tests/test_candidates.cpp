#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "tsplab/candidates.hpp"
#include "tsplab/onetree.hpp"
#include "tsplab/oracle.hpp"
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

TEST_CASE("from_alpha on the square keeps the sides") {
    TspInstance sq = square();
    PiVector zero(4, 0.0);
    SparseGraph g = build_sparse_graph(sq, 3);
    std::vector<double> alpha = alpha_measures(sq, zero, g);
    CandidateSet set = from_alpha(sq, g, alpha, 2);
    for (int i = 0; i < 4; ++i) {
        REQUIRE(set.lists[i].size() == 2);
        CHECK(!set.contains(i, (i + 2) % 4)); // diagonal has the worst alpha
        CHECK(set.contains(i, (i + 1) % 4));
        CHECK(set.contains(i, (i + 3) % 4));
    }

    CandidateSet one = from_alpha(sq, g, alpha, 1);
    for (int i = 0; i < 4; ++i) REQUIRE(one.lists[i].size() == 1);
}

TEST_CASE("rank invariance: shifted alpha and monotone priority transforms") {
    TspInstance inst = generate_uniform(12, 3);
    PiVector zero(12, 0.0);
    SparseGraph g = build_sparse_graph(inst, 6);
    std::vector<double> alpha = alpha_measures(inst, zero, g);
    std::vector<double> shifted = alpha;
    for (double& a : shifted) a += 0.5;
    CandidateSet s1 = from_alpha(inst, g, alpha, 4);
    CandidateSet s2 = from_alpha(inst, g, shifted, 4);
    CHECK(s1.lists == s2.lists);

    // Monotone transform of scores preserves lists too.
    std::vector<double> beta(g.edge_count());
    for (int i = 0; i < g.edge_count(); ++i) beta[i] = 1.0 / (1.0 + alpha[i]);
    std::vector<double> beta2(g.edge_count());
    for (int i = 0; i < g.edge_count(); ++i) beta2[i] = 2.0 * beta[i] + 3.0;
    CHECK(from_scores(g, beta, 4).lists == from_scores(g, beta2, 4).lists);
}

TEST_CASE("from_scores basics") {
    TspInstance inst = generate_uniform(10, 17);
    SparseGraph g = build_sparse_graph(inst, 5);

    std::vector<double> uniform_scores(g.edge_count(), 0.25);
    CandidateSet nn = from_scores(g, uniform_scores, 3);
    CandidateSet byd = from_nearest(inst, 3);
    CHECK(nn.lists == byd.lists); // ties fall back to distance order

    std::vector<double> onehot(g.edge_count(), 0.0);
    for (int i = 0; i < g.n; ++i) onehot[g.slot(i, 2)] = 1.0;
    CandidateSet top1 = from_scores(g, onehot, 1);
    for (int i = 0; i < g.n; ++i) {
        REQUIRE(top1.lists[i].size() == 1);
        CHECK(top1.lists[i][0] == g.neighbor(i, 2));
    }

    CHECK_THROWS_AS(from_scores(g, uniform_scores, 6), Error);
}

TEST_CASE("oracle one-hot scores recover the sparse-graph miss rate") {
    for (int rep = 0; rep < 10; ++rep) {
        TspInstance inst = generate_uniform(12, 5000 + rep);
        SparseGraph g = build_sparse_graph(inst, 5);
        OracleResult opt = exact_solve(inst);
        std::vector<std::uint8_t> ind = tour_edge_indicator(opt.tour, g);
        std::vector<double> scores(ind.begin(), ind.end());
        CandidateSet set = from_scores(g, scores, 5);
        CandidateQuality q = candidate_quality(set, opt.tour);

        int missing = 0;
        for (int i = 0; i < inst.n; ++i) {
            for (int j : {opt.tour.succ(i), opt.tour.pred(i)}) {
                bool found = false;
                for (int s = 0; s < g.gamma; ++s)
                    if (g.neighbor(i, s) == j) found = true;
                if (!found) ++missing;
            }
        }
        CHECK(q.missed_fraction == doctest::Approx(missing / (2.0 * inst.n)));
        if (q.avg_rank) CHECK(*q.avg_rank <= 2.0);
    }
}

TEST_CASE("from_nearest basics") {
    TspInstance sq = square();
    CandidateSet set = from_nearest(sq, 2);
    for (int i = 0; i < 4; ++i) {
        CHECK(set.contains(i, (i + 1) % 4));
        CHECK(set.contains(i, (i + 3) % 4));
    }
    CandidateSet full = from_nearest(sq, 3);
    for (int i = 0; i < 4; ++i) CHECK(full.lists[i].size() == 3);
    CHECK_THROWS_AS(from_nearest(sq, 4), Error);
}

TEST_CASE("alpha candidates after ascent beat nearest on missed fraction") {
    double missed_alpha = 0.0, missed_nearest = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        TspInstance inst = generate_uniform(12, 9000 + rep);
        OracleResult opt = exact_solve(inst);
        AscentResult ascent = subgradient_ascent(inst, {});
        SparseGraph g = build_sparse_graph(inst, 11);
        std::vector<double> alpha = alpha_measures(inst, ascent.pi_best, g);
        missed_alpha += candidate_quality(from_alpha(inst, g, alpha, 5), opt.tour).missed_fraction;
        missed_nearest += candidate_quality(from_nearest(inst, 5), opt.tour).missed_fraction;
    }
    CHECK(missed_nearest >= missed_alpha);
}

TEST_CASE("candidate_quality corner cases") {
    TspInstance sq = square();
    Tour tour = Tour::from_order({0, 1, 2, 3});

    CandidateSet ideal = from_nearest(sq, 2); // both tour edges at rank 1/2
    CandidateQuality q = candidate_quality(ideal, tour);
    CHECK(q.missed_fraction == 0.0);
    REQUIRE(q.avg_rank.has_value());
    CHECK(*q.avg_rank == doctest::Approx(1.5)); // the ideal value

    CandidateSet empty;
    empty.n = 4;
    empty.k = 0;
    empty.lists.resize(4);
    empty.priority.resize(4);
    CandidateQuality qe = candidate_quality(empty, tour);
    CHECK(qe.missed_fraction == 1.0);
    CHECK(!qe.avg_rank.has_value());
}

TEST_CASE("from_alpha over all pairs with k = n-1 misses nothing") {
    TspInstance inst = generate_uniform(9, 31);
    PiVector zero(9, 0.0);
    SparseGraph g = build_sparse_graph(inst, 8);
    std::vector<double> alpha = alpha_measures(inst, zero, g);
    CandidateSet set = from_alpha(inst, g, alpha, 8);
    OracleResult opt = exact_bruteforce(inst);
    CHECK(candidate_quality(set, opt.tour).missed_fraction == 0.0);
}

TEST_CASE("candidate file round trip") {
    TspInstance inst = generate_uniform(11, 77);
    SparseGraph g = build_sparse_graph(inst, 6);
    AscentResult ascent = subgradient_ascent(inst, {});
    std::vector<double> alpha = alpha_measures(inst, ascent.pi_best, g);
    CandidateSet set = from_alpha(inst, g, alpha, 5);

    std::string doc = write_candidates(set);
    CandidateSet back = read_candidates(doc);
    CHECK(back.n == set.n);
    CHECK(back.k == set.k);
    CHECK(back.lists == set.lists);
    CHECK(back.priority == set.priority);
    CHECK(write_candidates(back) == doc);
}

TEST_CASE("candidate file parse errors and empty lists") {
    CHECK_THROWS_AS(read_candidates("candidates 2 1\n0 1 1 0.5\n1 1 0 0.5\nextra"), Error);

    // duplicate neighbor
    std::string dup = "candidates 3 2\n0 2 1 0.9 1 0.8\n1 0\n2 0\n";
    try {
        read_candidates(dup);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse_error);
    }

    // k = 0 lists are a valid empty set
    CandidateSet empty = read_candidates("candidates 2 0\n0 0\n1 0\n");
    CHECK(empty.n == 2);
    CHECK(empty.lists[0].empty());
    CHECK(empty.lists[1].empty());
}
