#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsplab/instance.hpp"
#include "tsplab/tour.hpp"

namespace tsplab {

/// Per-node shortlist of neighbors the search may add edges to, ordered by
/// descending priority (-alpha, learned score, or -distance depending on the
/// construction).
struct CandidateSet {
    int n = 0;
    int k = 0; // requested per-node maximum; lists may be shorter
    std::vector<std::vector<int>> lists;
    std::vector<std::vector<double>> priority;

    bool contains(int i, int j) const {
        for (int v : lists[i])
            if (v == j) return true;
        return false;
    }
    /// 1-based rank of j in i's list, 0 if absent.
    int rank_of(int i, int j) const {
        for (std::size_t s = 0; s < lists[i].size(); ++s)
            if (lists[i][s] == j) return static_cast<int>(s) + 1;
        return 0;
    }
};

struct CandidateQuality {
    double missed_fraction = 0.0;           // over all 2n directed tour edges
    std::optional<double> avg_rank;         // over present edges; absent if none
    int present_edges = 0;
    int missed_edges = 0;
};

/// k smallest-alpha neighbors per node, priority = -alpha; ties by ascending
/// distance then id. alpha must be aligned with graph slots.
CandidateSet from_alpha(const TspInstance& inst, const SparseGraph& graph,
                        const std::vector<double>& alpha, int k);

/// Top-k by learned score beta (descending), priority = beta. Requires k <= gamma.
CandidateSet from_scores(const SparseGraph& graph, const std::vector<double>& beta, int k);

/// k nearest neighbors per node, priority = -distance. Requires k < n.
CandidateSet from_nearest(const TspInstance& inst, int k);

CandidateQuality candidate_quality(const CandidateSet& set, const Tour& optimal_tour);

std::string write_candidates(const CandidateSet& set);
CandidateSet read_candidates(const std::string& text);

} // namespace tsplab
