#include "tsplab/onetree.hpp"

#include <algorithm>
#include <limits>

namespace tsplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Edge order used everywhere ties can arise: (cost, min id, max id).
bool edge_less(double ca, int a1, int a2, double cb, int b1, int b2) {
    if (ca != cb) return ca < cb;
    int amin = std::min(a1, a2), amax = std::max(a1, a2);
    int bmin = std::min(b1, b2), bmax = std::max(b1, b2);
    if (amin != bmin) return amin < bmin;
    return amax < bmax;
}

struct PrimState {
    std::vector<char> in_tree;
    std::vector<double> key;
    std::vector<int> link; // tree endpoint realizing key
};

// Prim over the nodes where include(v) is true, starting from the seed set.
// Edges inside the seed set are NOT added; callers account for them.
MstResult prim(const TspInstance& inst, const PiVector& pi, const std::vector<char>& include,
               const std::vector<int>& seeds) {
    const int n = inst.n;
    PrimState st;
    st.in_tree.assign(n, 0);
    st.key.assign(n, kInf);
    st.link.assign(n, -1);

    int remaining = 0;
    for (int v = 0; v < n; ++v)
        if (include[v]) ++remaining;

    MstResult out;
    auto absorb = [&](int u) {
        st.in_tree[u] = 1;
        --remaining;
        for (int v = 0; v < n; ++v) {
            if (!include[v] || st.in_tree[v] || v == u) continue;
            double c = penalized_cost(inst, pi, u, v);
            if (st.key[v] == kInf || edge_less(c, u, v, st.key[v], st.link[v], v)) {
                st.key[v] = c;
                st.link[v] = u;
            }
        }
    };
    for (int s : seeds) absorb(s);

    while (remaining > 0) {
        int best = -1;
        for (int v = 0; v < n; ++v) {
            if (!include[v] || st.in_tree[v] || st.key[v] == kInf) continue;
            if (best == -1 || edge_less(st.key[v], st.link[v], v, st.key[best], st.link[best], best))
                best = v;
        }
        require(best != -1, ErrorKind::invalid_state, "prim: graph not connected");
        out.edges.emplace_back(st.link[best], best);
        out.length += st.key[best];
        absorb(best);
    }
    return out;
}

int pick_special(const TspInstance& inst, const PiVector& pi) {
    // Node whose nearest penalized neighbor is farthest away; ties to the
    // smallest id. Deterministic and tends to tighten the bound.
    int best = -1;
    double best_nn = -kInf;
    for (int i = 0; i < inst.n; ++i) {
        double nn = kInf;
        for (int j = 0; j < inst.n; ++j) {
            if (j == i) continue;
            nn = std::min(nn, penalized_cost(inst, pi, i, j));
        }
        if (nn > best_nn) {
            best_nn = nn;
            best = i;
        }
    }
    return best;
}

std::array<std::pair<int, double>, 2> two_cheapest_at(const TspInstance& inst, const PiVector& pi,
                                                      int special) {
    std::array<std::pair<int, double>, 2> best{std::pair<int, double>{-1, kInf},
                                               std::pair<int, double>{-1, kInf}};
    for (int j = 0; j < inst.n; ++j) {
        if (j == special) continue;
        double c = penalized_cost(inst, pi, special, j);
        if (best[0].first == -1 || edge_less(c, special, j, best[0].second, special, best[0].first)) {
            best[1] = best[0];
            best[0] = {j, c};
        } else if (best[1].first == -1 ||
                   edge_less(c, special, j, best[1].second, special, best[1].first)) {
            best[1] = {j, c};
        }
    }
    return best;
}

} // namespace

MstResult minimum_spanning_tree(const TspInstance& inst, const PiVector& pi, std::optional<int> exclude) {
    require(static_cast<int>(pi.size()) == inst.n, ErrorKind::invalid_argument, "mst: pi size != n");
    if (exclude) require(*exclude >= 0 && *exclude < inst.n, ErrorKind::invalid_argument, "mst: bad exclude");
    int m = inst.n - (exclude ? 1 : 0);
    require(m >= 2, ErrorKind::degenerate_instance, "mst: fewer than 2 nodes");

    std::vector<char> include(inst.n, 1);
    if (exclude) include[*exclude] = 0;
    int seed = 0;
    while (!include[seed]) ++seed;
    return prim(inst, pi, include, {seed});
}

OneTree minimum_one_tree(const TspInstance& inst, const PiVector& pi) {
    require(inst.n >= 3, ErrorKind::invalid_size, "one_tree: n < 3");
    require(static_cast<int>(pi.size()) == inst.n, ErrorKind::invalid_argument, "one_tree: pi size != n");

    OneTree t;
    t.special = pick_special(inst, pi);
    MstResult mst = minimum_spanning_tree(inst, pi, t.special);
    t.tree_edges = std::move(mst.edges);
    t.special_edges = two_cheapest_at(inst, pi, t.special);
    t.length = mst.length + t.special_edges[0].second + t.special_edges[1].second;

    t.degrees.assign(inst.n, 0);
    for (auto [a, b] : t.tree_edges) {
        ++t.degrees[a];
        ++t.degrees[b];
    }
    t.degrees[t.special] = 2;
    ++t.degrees[t.special_edges[0].first];
    ++t.degrees[t.special_edges[1].first];

    // Root the spanning tree at its first node for path queries.
    t.root = t.special == 0 ? 1 : 0;
    t.parent.assign(inst.n, -1);
    t.parent_cost.assign(inst.n, 0.0);
    t.depth.assign(inst.n, 0);
    std::vector<std::vector<std::pair<int, double>>> adj(inst.n);
    for (auto [a, b] : t.tree_edges) {
        double c = penalized_cost(inst, pi, a, b);
        adj[a].push_back({b, c});
        adj[b].push_back({a, c});
    }
    std::vector<int> stack{t.root};
    std::vector<char> seen(inst.n, 0);
    seen[t.root] = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (auto [v, c] : adj[u]) {
            if (seen[v]) continue;
            seen[v] = 1;
            t.parent[v] = u;
            t.parent_cost[v] = c;
            t.depth[v] = t.depth[u] + 1;
            stack.push_back(v);
        }
    }
    return t;
}

std::vector<double> alpha_measures(const TspInstance& inst, const PiVector& pi, const SparseGraph& graph) {
    const int n = inst.n;
    OneTree t = minimum_one_tree(inst, pi);
    const double second_special = t.special_edges[1].second;

    // maxpath[j] = heaviest spanning-tree edge on the path root_i -> j, filled
    // per root by DFS; O(n^2) total over all non-special pairs.
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (auto [a, b] : t.tree_edges) {
        double c = penalized_cost(inst, pi, a, b);
        adj[a].push_back({b, c});
        adj[b].push_back({a, c});
    }
    std::vector<std::vector<double>> maxpath(n);
    std::vector<int> stack;
    for (int r = 0; r < n; ++r) {
        if (r == t.special) continue;
        auto& row = maxpath[r];
        row.assign(n, 0.0);
        std::vector<char> seen(n, 0);
        seen[r] = 1;
        stack.assign(1, r);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (auto [v, c] : adj[u]) {
                if (seen[v]) continue;
                seen[v] = 1;
                row[v] = std::max(row[u], c);
                stack.push_back(v);
            }
        }
    }

    std::vector<double> alpha(graph.edge_count(), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int s = 0; s < graph.gamma; ++s) {
            int j = graph.neighbor(i, s);
            double c = penalized_cost(inst, pi, i, j);
            double a;
            if (i == t.special || j == t.special) {
                int other = i == t.special ? j : i;
                if (other == t.special_edges[0].first || other == t.special_edges[1].first)
                    a = 0.0;
                else
                    a = c - second_special;
            } else {
                a = c - maxpath[i][j];
            }
            alpha[graph.slot(i, s)] = std::max(a, 0.0);
        }
    }
    return alpha;
}

double alpha_bruteforce(const TspInstance& inst, const PiVector& pi, int i, int j) {
    require(i != j && i >= 0 && j >= 0 && i < inst.n && j < inst.n, ErrorKind::invalid_argument,
            "alpha_bruteforce: bad edge");
    OneTree base = minimum_one_tree(inst, pi);
    const int special = base.special;

    double forced;
    if (i == special || j == special) {
        int other = i == special ? j : i;
        double c = penalized_cost(inst, pi, special, other);
        // Cheapest special edge distinct from (special, other).
        double cheapest_other = kInf;
        int cheapest_id = -1;
        for (int v = 0; v < inst.n; ++v) {
            if (v == special || v == other) continue;
            double cv = penalized_cost(inst, pi, special, v);
            if (cheapest_id == -1 || edge_less(cv, special, v, cheapest_other, special, cheapest_id)) {
                cheapest_other = cv;
                cheapest_id = v;
            }
        }
        MstResult mst = minimum_spanning_tree(inst, pi, special);
        forced = mst.length + c + cheapest_other;
    } else {
        // MST of V \ {special} forced to contain (i,j): contract the edge by
        // seeding Prim with both endpoints.
        std::vector<char> include(inst.n, 1);
        include[special] = 0;
        MstResult mst = prim(inst, pi, include, {i, j});
        forced = mst.length + penalized_cost(inst, pi, i, j) + base.special_edges[0].second +
                 base.special_edges[1].second;
    }
    return std::max(forced - base.length, 0.0);
}

} // namespace tsplab
