#pragma once

#include <vector>

#include "tsplab/instance.hpp"
#include "tsplab/tour.hpp"

namespace tsplab {

enum class OracleMethod { bruteforce, held_karp_dp };

struct OracleResult {
    Tour tour;   // canonical: starts at 0, order[1] < order[n-1]
    double length = 0.0;
    OracleMethod method = OracleMethod::bruteforce;
};

/// Rotate/reflect so the tour starts at node 0 with the smaller second node.
Tour canonical_tour(const Tour& tour);

/// Minimum over all (n-1)!/2 tours; ties resolved to the lexicographically
/// smallest canonical order. n <= 10.
OracleResult exact_bruteforce(const TspInstance& inst);

/// Bitmask dynamic program with path reconstruction, O(n^2 2^n). n <= 18.
OracleResult exact_held_karp(const TspInstance& inst);

/// Picks the DP solver (bruteforce for tiny n would do equally).
OracleResult exact_solve(const TspInstance& inst);

/// Indicator over the directed sparse edges: slot (i,s) is 1 iff edge
/// (i, neighbor(i,s)) lies on the optimal tour.
std::vector<std::uint8_t> optimal_edges(const TspInstance& inst, const SparseGraph& graph);
std::vector<std::uint8_t> tour_edge_indicator(const Tour& tour, const SparseGraph& graph);

/// Number of distinct canonical tours within `tol` of the optimum; exact
/// enumeration, n <= 10 only. Used to filter label datasets for unique optima.
int count_optimal_tours(const TspInstance& inst, double tol = 1e-9);

} // namespace tsplab
