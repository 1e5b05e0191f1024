#include "tsplab/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tsplab {

namespace {

constexpr int kBruteforceMax = 10;
constexpr int kHeldKarpMax = 18;

double order_length(const TspInstance& inst, const std::vector<int>& order) {
    double len = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        len += distance(inst, order[i], order[(i + 1) % order.size()]);
    return len;
}

} // namespace

Tour canonical_tour(const Tour& tour) {
    require(tour.valid(), ErrorKind::invalid_argument, "canonical_tour: invalid tour");
    const int n = tour.n();
    std::vector<int> order(n);
    int start = tour.position[0];
    for (int i = 0; i < n; ++i) order[i] = tour.order[(start + i) % n];
    if (n >= 3 && order[1] > order[n - 1]) std::reverse(order.begin() + 1, order.end());
    return Tour::from_order(std::move(order));
}

OracleResult exact_bruteforce(const TspInstance& inst) {
    require(inst.n >= 3, ErrorKind::invalid_size, "bruteforce: n < 3");
    require(inst.n <= kBruteforceMax, ErrorKind::too_large, "bruteforce: n > 10");
    const int n = inst.n;
    std::vector<int> perm(n - 1);
    std::iota(perm.begin(), perm.end(), 1);

    std::vector<int> best_order;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> order(n);
    order[0] = 0;
    do {
        if (perm.front() > perm.back()) continue; // canonical direction only
        std::copy(perm.begin(), perm.end(), order.begin() + 1);
        double len = order_length(inst, order);
        if (len < best) {
            best = len;
            best_order = order;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    OracleResult res;
    res.tour = Tour::from_order(std::move(best_order));
    res.length = best;
    res.method = OracleMethod::bruteforce;
    return res;
}

OracleResult exact_held_karp(const TspInstance& inst) {
    require(inst.n >= 3, ErrorKind::invalid_size, "held_karp: n < 3");
    require(inst.n <= kHeldKarpMax, ErrorKind::too_large, "held_karp: n > 18");
    const int n = inst.n;
    const int m = n - 1; // nodes 1..n-1, node 0 fixed as both ends
    const std::size_t full = std::size_t{1} << m;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> d0(m);
    std::vector<std::vector<double>> d(m, std::vector<double>(m, 0.0));
    for (int i = 0; i < m; ++i) {
        d0[i] = distance(inst, 0, i + 1);
        for (int j = 0; j < m; ++j)
            if (j != i) d[i][j] = distance(inst, i + 1, j + 1);
    }

    // dp[mask][j]: cheapest path 0 -> j+1 visiting exactly {mask}.
    std::vector<double> dp(full * m, inf);
    std::vector<std::int8_t> par(full * m, -1);
    for (int j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = d0[j];

    for (std::size_t mask = 1; mask < full; ++mask) {
        for (int j = 0; j < m; ++j) {
            if (!(mask & (std::size_t{1} << j))) continue;
            double cur = dp[mask * m + j];
            if (cur == inf) continue;
            std::size_t rest = full - 1 - mask;
            for (int k = 0; k < m; ++k) {
                if (!(rest & (std::size_t{1} << k))) continue;
                std::size_t nm = mask | (std::size_t{1} << k);
                double cand = cur + d[j][k];
                if (cand < dp[nm * m + k]) {
                    dp[nm * m + k] = cand;
                    par[nm * m + k] = static_cast<std::int8_t>(j);
                }
            }
        }
    }

    double best = inf;
    int best_end = -1;
    for (int j = 0; j < m; ++j) {
        double cand = dp[(full - 1) * m + j] + d0[j];
        if (cand < best) {
            best = cand;
            best_end = j;
        }
    }

    std::vector<int> order;
    order.reserve(n);
    std::size_t mask = full - 1;
    int j = best_end;
    while (j != -1) {
        order.push_back(j + 1);
        int p = par[mask * m + j];
        mask &= ~(std::size_t{1} << j);
        j = p;
    }
    order.push_back(0);
    std::reverse(order.begin(), order.end());

    OracleResult res;
    res.tour = canonical_tour(Tour::from_order(std::move(order)));
    res.length = best;
    res.method = OracleMethod::held_karp_dp;
    return res;
}

OracleResult exact_solve(const TspInstance& inst) { return exact_held_karp(inst); }

std::vector<std::uint8_t> tour_edge_indicator(const Tour& tour, const SparseGraph& graph) {
    require(tour.n() == graph.n, ErrorKind::invalid_argument, "tour_edge_indicator: size mismatch");
    std::vector<std::uint8_t> ind(graph.edge_count(), 0);
    for (int i = 0; i < graph.n; ++i) {
        int s = tour.succ(i), p = tour.pred(i);
        for (int slot = 0; slot < graph.gamma; ++slot) {
            int j = graph.neighbor(i, slot);
            if (j == s || j == p) ind[graph.slot(i, slot)] = 1;
        }
    }
    return ind;
}

std::vector<std::uint8_t> optimal_edges(const TspInstance& inst, const SparseGraph& graph) {
    OracleResult res = exact_solve(inst);
    return tour_edge_indicator(res.tour, graph);
}

int count_optimal_tours(const TspInstance& inst, double tol) {
    require(inst.n >= 3, ErrorKind::invalid_size, "count_optimal_tours: n < 3");
    require(inst.n <= kBruteforceMax, ErrorKind::too_large, "count_optimal_tours: n > 10");
    const int n = inst.n;
    std::vector<int> perm(n - 1);
    std::iota(perm.begin(), perm.end(), 1);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> lengths;
    std::vector<int> order(n);
    order[0] = 0;
    do {
        if (perm.front() > perm.back()) continue;
        std::copy(perm.begin(), perm.end(), order.begin() + 1);
        double len = order_length(inst, order);
        best = std::min(best, len);
        lengths.push_back(len);
    } while (std::next_permutation(perm.begin(), perm.end()));
    int count = 0;
    for (double len : lengths)
        if (len <= best + tol) ++count;
    return count;
}

} // namespace tsplab
