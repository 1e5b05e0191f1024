#include "tsplab/candidates.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace tsplab {

namespace {

struct Scored {
    int node;
    double priority;
    double dist;
};

// Descending priority; ties by ascending distance, then ascending id.
void sort_scored(std::vector<Scored>& v) {
    std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.node < b.node;
    });
}

CandidateSet take_top_k(int n, int k, std::vector<std::vector<Scored>>& per_node) {
    CandidateSet set;
    set.n = n;
    set.k = k;
    set.lists.resize(n);
    set.priority.resize(n);
    for (int i = 0; i < n; ++i) {
        sort_scored(per_node[i]);
        int m = std::min<int>(k, static_cast<int>(per_node[i].size()));
        set.lists[i].reserve(m);
        set.priority[i].reserve(m);
        for (int s = 0; s < m; ++s) {
            set.lists[i].push_back(per_node[i][s].node);
            set.priority[i].push_back(per_node[i][s].priority);
        }
    }
    return set;
}

} // namespace

CandidateSet from_alpha(const TspInstance& inst, const SparseGraph& graph,
                        const std::vector<double>& alpha, int k) {
    require(k >= 1, ErrorKind::invalid_argument, "from_alpha: k < 1");
    require(alpha.size() == graph.dist.size(), ErrorKind::invalid_argument,
            "from_alpha: alpha not aligned with graph");
    std::vector<std::vector<Scored>> per_node(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        per_node[i].reserve(graph.gamma);
        for (int s = 0; s < graph.gamma; ++s) {
            int slot = graph.slot(i, s);
            per_node[i].push_back({graph.neighbors[slot], -alpha[slot], graph.dist[slot]});
        }
    }
    return take_top_k(inst.n, k, per_node);
}

CandidateSet from_scores(const SparseGraph& graph, const std::vector<double>& beta, int k) {
    require(k >= 1 && k <= graph.gamma, ErrorKind::invalid_argument, "from_scores: k must be in [1, gamma]");
    require(beta.size() == graph.dist.size(), ErrorKind::invalid_argument,
            "from_scores: beta not aligned with graph");
    std::vector<std::vector<Scored>> per_node(graph.n);
    for (int i = 0; i < graph.n; ++i) {
        per_node[i].reserve(graph.gamma);
        for (int s = 0; s < graph.gamma; ++s) {
            int slot = graph.slot(i, s);
            per_node[i].push_back({graph.neighbors[slot], beta[slot], graph.dist[slot]});
        }
    }
    return take_top_k(graph.n, k, per_node);
}

CandidateSet from_nearest(const TspInstance& inst, int k) {
    require(k >= 1 && k < inst.n, ErrorKind::invalid_argument, "from_nearest: k must be in [1, n)");
    std::vector<std::vector<Scored>> per_node(inst.n);
    for (int i = 0; i < inst.n; ++i) {
        per_node[i].reserve(inst.n - 1);
        for (int j = 0; j < inst.n; ++j) {
            if (j == i) continue;
            double d = distance(inst, i, j);
            per_node[i].push_back({j, -d, d});
        }
    }
    return take_top_k(inst.n, k, per_node);
}

CandidateQuality candidate_quality(const CandidateSet& set, const Tour& tour) {
    require(tour.valid(), ErrorKind::invalid_argument, "candidate_quality: invalid tour");
    require(tour.n() == set.n, ErrorKind::invalid_argument, "candidate_quality: size mismatch");
    CandidateQuality q;
    const int n = tour.n();
    long rank_sum = 0;
    for (int idx = 0; idx < n; ++idx) {
        int a = tour.order[idx];
        int b = tour.order[(idx + 1) % n];
        // Both directed versions of the tour edge count separately.
        for (auto [from, to] : {std::pair{a, b}, std::pair{b, a}}) {
            int r = set.rank_of(from, to);
            if (r == 0) {
                ++q.missed_edges;
            } else {
                ++q.present_edges;
                rank_sum += r;
            }
        }
    }
    q.missed_fraction = static_cast<double>(q.missed_edges) / (2.0 * n);
    if (q.present_edges > 0) q.avg_rank = static_cast<double>(rank_sum) / q.present_edges;
    return q;
}

std::string write_candidates(const CandidateSet& set) {
    std::string out = "candidates " + std::to_string(set.n) + " " + std::to_string(set.k) + "\n";
    char buf[64];
    for (int i = 0; i < set.n; ++i) {
        out += std::to_string(i) + " " + std::to_string(set.lists[i].size());
        for (std::size_t s = 0; s < set.lists[i].size(); ++s) {
            std::snprintf(buf, sizeof(buf), " %d %.17g", set.lists[i][s], set.priority[i][s]);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

CandidateSet read_candidates(const std::string& text) {
    std::istringstream in(text);
    std::string tag;
    int n = 0, k = 0;
    if (!(in >> tag >> n >> k) || tag != "candidates" || n < 1 || k < 0)
        fail(ErrorKind::parse_error, "candidates: bad header");
    CandidateSet set;
    set.n = n;
    set.k = k;
    set.lists.resize(n);
    set.priority.resize(n);
    std::vector<char> seen(n, 0);
    for (int row = 0; row < n; ++row) {
        int id = -1, m = -1;
        if (!(in >> id >> m) || id < 0 || id >= n || m < 0 || m > k)
            fail(ErrorKind::parse_error, "candidates: bad node row");
        if (seen[id]) fail(ErrorKind::parse_error, "candidates: duplicate node row");
        seen[id] = 1;
        auto& list = set.lists[id];
        auto& prio = set.priority[id];
        for (int s = 0; s < m; ++s) {
            int nbr;
            double p;
            if (!(in >> nbr >> p)) fail(ErrorKind::parse_error, "candidates: truncated row");
            if (nbr < 0 || nbr >= n || nbr == id)
                fail(ErrorKind::parse_error, "candidates: bad neighbor id");
            if (std::find(list.begin(), list.end(), nbr) != list.end())
                fail(ErrorKind::parse_error, "candidates: duplicate neighbor");
            if (!prio.empty() && p > prio.back())
                fail(ErrorKind::parse_error, "candidates: priorities not non-increasing");
            list.push_back(nbr);
            prio.push_back(p);
        }
    }
    std::string leftover;
    if (in >> leftover) fail(ErrorKind::parse_error, "candidates: trailing data");
    return set;
}

} // namespace tsplab
