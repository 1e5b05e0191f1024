#pragma once

// Independent oracles used by the unit and acceptance suites. Everything here
// is deliberately brute force and shares no code path with the library
// implementations it checks.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "tsplab/instance.hpp"
#include "tsplab/onetree.hpp"
#include "tsplab/tour.hpp"

namespace testutil {

using tsplab::PiVector;
using tsplab::TspInstance;

inline double pcost(const TspInstance& inst, const PiVector& pi, int a, int b) {
    return tsplab::distance(inst, a, b) + pi[a] + pi[b];
}

// Decodes one Pruefer sequence over m labels into tree edges (label pairs).
inline std::vector<std::pair<int, int>> pruefer_decode(const std::vector<int>& seq, int m) {
    std::vector<int> degree(m, 1);
    for (int v : seq) ++degree[v];
    std::vector<std::pair<int, int>> edges;
    std::vector<char> used(m, 0);
    for (int v : seq) {
        int leaf = -1;
        for (int u = 0; u < m; ++u) {
            if (degree[u] == 1 && !used[u]) {
                leaf = u;
                break;
            }
        }
        edges.push_back({leaf, v});
        used[leaf] = 1;
        --degree[leaf];
        --degree[v];
    }
    int a = -1, b = -1;
    for (int u = 0; u < m; ++u) {
        if (degree[u] == 1 && !used[u]) (a == -1 ? a : b) = u;
    }
    edges.push_back({a, b});
    return edges;
}

// Minimum spanning tree length over `nodes` by enumerating all m^(m-2)
// Pruefer sequences. m <= 8 or so.
inline double min_spanning_tree_bruteforce(const TspInstance& inst, const PiVector& pi,
                                           const std::vector<int>& nodes) {
    const int m = static_cast<int>(nodes.size());
    if (m == 2) return pcost(inst, pi, nodes[0], nodes[1]);
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> seq(m - 2, 0);
    for (;;) {
        double len = 0.0;
        for (auto [a, b] : pruefer_decode(seq, m)) len += pcost(inst, pi, nodes[a], nodes[b]);
        best = std::min(best, len);
        int i = m - 3;
        while (i >= 0 && seq[i] == m - 1) seq[i--] = 0;
        if (i < 0) break;
        ++seq[i];
    }
    return best;
}

// Minimum 1-tree length for a fixed special node: spanning trees over
// V \ {special} by enumeration, plus the best pair of special edges.
inline double min_one_tree_bruteforce(const TspInstance& inst, const PiVector& pi, int special) {
    std::vector<int> rest;
    for (int v = 0; v < inst.n; ++v)
        if (v != special) rest.push_back(v);
    double tree = min_spanning_tree_bruteforce(inst, pi, rest);
    double best_pair = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < rest.size(); ++a)
        for (std::size_t b = a + 1; b < rest.size(); ++b)
            best_pair = std::min(best_pair, pcost(inst, pi, special, rest[a]) +
                                                pcost(inst, pi, special, rest[b]));
    return tree + best_pair;
}

inline double order_cost(const TspInstance& inst, const PiVector& pi, const std::vector<int>& order) {
    double len = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i)
        len += pcost(inst, pi, order[i], order[(i + 1) % order.size()]);
    return len;
}

// All tour lengths by enumeration (node 0 fixed, both directions collapsed).
// Returns the sorted set of canonical orders attaining the minimum within tol.
struct BruteTours {
    double best = 0.0;
    std::vector<std::vector<int>> argmin; // canonical orders
};
inline BruteTours enumerate_tours(const TspInstance& inst, const PiVector& pi, double tol = 1e-9) {
    const int n = inst.n;
    std::vector<int> perm(n - 1);
    std::iota(perm.begin(), perm.end(), 1);
    std::vector<std::pair<double, std::vector<int>>> all;
    std::vector<int> order(n);
    order[0] = 0;
    do {
        if (perm.front() > perm.back()) continue;
        std::copy(perm.begin(), perm.end(), order.begin() + 1);
        all.push_back({order_cost(inst, pi, order), order});
    } while (std::next_permutation(perm.begin(), perm.end()));
    BruteTours out;
    out.best = std::min_element(all.begin(), all.end())->first;
    for (auto& [len, ord] : all)
        if (len <= out.best + tol) out.argmin.push_back(ord);
    std::sort(out.argmin.begin(), out.argmin.end());
    return out;
}

// Best improvement over every 2-opt neighbor (all segment reversals).
inline double best_two_opt_gain(const TspInstance& inst, const PiVector& pi,
                                const std::vector<int>& order) {
    const int n = static_cast<int>(order.size());
    double base = order_cost(inst, pi, order);
    double best = 0.0;
    for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
            std::vector<int> cand = order;
            std::reverse(cand.begin() + p, cand.begin() + q + 1);
            best = std::max(best, base - order_cost(inst, pi, cand));
        }
    }
    return best;
}

// Best improvement over every 3-opt neighbor: all cut triples, all seven
// non-identity reconnections of the two movable segments.
inline double best_three_opt_gain(const TspInstance& inst, const PiVector& pi,
                                  const std::vector<int>& order) {
    const int n = static_cast<int>(order.size());
    double base = order_cost(inst, pi, order);
    double best = 0.0;
    for (int i = 0; i < n - 2; ++i) {
        for (int j = i + 1; j < n - 1; ++j) {
            for (int k = j + 1; k < n; ++k) {
                std::vector<int> head(order.begin(), order.begin() + i + 1);
                std::vector<int> s1(order.begin() + i + 1, order.begin() + j + 1);
                std::vector<int> s2(order.begin() + j + 1, order.begin() + k + 1);
                std::vector<int> tail(order.begin() + k + 1, order.end());
                std::vector<int> s1r(s1.rbegin(), s1.rend());
                std::vector<int> s2r(s2.rbegin(), s2.rend());
                const std::vector<const std::vector<int>*> variants[7] = {
                    {&s1r, &s2}, {&s1, &s2r}, {&s1r, &s2r}, {&s2, &s1},
                    {&s2, &s1r}, {&s2r, &s1}, {&s2r, &s1r}};
                for (const auto& var : variants) {
                    std::vector<int> cand = head;
                    cand.insert(cand.end(), var[0]->begin(), var[0]->end());
                    cand.insert(cand.end(), var[1]->begin(), var[1]->end());
                    cand.insert(cand.end(), tail.begin(), tail.end());
                    best = std::max(best, base - order_cost(inst, pi, cand));
                }
            }
        }
    }
    return best;
}

// Lloyd's k-means; returns mean squared distance to the assigned center.
inline double kmeans_within_variance(const TspInstance& inst, int k, int iters = 25) {
    std::vector<tsplab::Point> centers(inst.coords.begin(), inst.coords.begin() + k);
    std::vector<int> assign(inst.n, 0);
    for (int it = 0; it < iters; ++it) {
        for (int i = 0; i < inst.n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                double dx = inst.coords[i].x - centers[c].x;
                double dy = inst.coords[i].y - centers[c].y;
                double d = dx * dx + dy * dy;
                if (d < best) {
                    best = d;
                    assign[i] = c;
                }
            }
        }
        std::vector<double> sx(k, 0), sy(k, 0);
        std::vector<int> cnt(k, 0);
        for (int i = 0; i < inst.n; ++i) {
            sx[assign[i]] += inst.coords[i].x;
            sy[assign[i]] += inst.coords[i].y;
            ++cnt[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (cnt[c] > 0) centers[c] = {sx[c] / cnt[c], sy[c] / cnt[c]};
        }
    }
    double total = 0.0;
    for (int i = 0; i < inst.n; ++i) {
        double dx = inst.coords[i].x - centers[assign[i]].x;
        double dy = inst.coords[i].y - centers[assign[i]].y;
        total += dx * dx + dy * dy;
    }
    return total / inst.n;
}

} // namespace testutil
