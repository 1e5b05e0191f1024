#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "tsplab/instance.hpp"

namespace tsplab {

/// Node penalties, added to both endpoints of every edge:
/// c(i,j) = s(i,j) + pi[i] + pi[j].
using PiVector = std::vector<double>;

inline double penalized_cost(const TspInstance& inst, const PiVector& pi, int i, int j) {
    return distance(inst, i, j) + pi[i] + pi[j];
}

struct MstResult {
    std::vector<std::pair<int, int>> edges;
    double length = 0.0;
};

/// Spanning tree over all nodes but `special`, plus the two cheapest edges at
/// `special`. A tour relaxation: every tour is a 1-tree, so the minimum
/// 1-tree length lower-bounds the optimal tour under the same costs.
struct OneTree {
    int special = -1;
    std::vector<std::pair<int, int>> tree_edges;          // n-2 edges over V \ {special}
    std::array<std::pair<int, double>, 2> special_edges;  // (neighbor, cost), ascending cost
    std::vector<int> degrees;
    double length = 0.0;
    // Topology cache for the spanning tree part, rooted at `root`.
    int root = -1;
    std::vector<int> parent;          // -1 for root and for special
    std::vector<double> parent_cost;
    std::vector<int> depth;

    bool all_degree_two() const {
        for (int d : degrees)
            if (d != 2) return false;
        return true;
    }
};

/// Dense Prim over penalized costs, ties broken by (cost, min id, max id).
MstResult minimum_spanning_tree(const TspInstance& inst, const PiVector& pi,
                                std::optional<int> exclude = std::nullopt);

OneTree minimum_one_tree(const TspInstance& inst, const PiVector& pi);

/// alpha(i,j) = L(T+(i,j)) - L(T): the 1-tree length increase forced by
/// requiring edge (i,j). Computed for every directed sparse edge via the
/// path-max method; values are symmetric and clamped at 0.
std::vector<double> alpha_measures(const TspInstance& inst, const PiVector& pi, const SparseGraph& graph);

/// Oracle for alpha_measures: recomputes the constrained minimum 1-tree with
/// the edge forced (Prim grown from both endpoints) and returns the length
/// difference.
double alpha_bruteforce(const TspInstance& inst, const PiVector& pi, int i, int j);

} // namespace tsplab
