#include "tsplab/search.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>

#include "tsplab/rng.hpp"

namespace tsplab {

namespace {

// Exchanges are applied only when they shorten the penalized tour by more
// than this; partial-gain pruning inside the chain uses plain > 0.
constexpr double kGainEps = 1e-12;

using Clock = std::chrono::steady_clock;

struct Edge {
    int a, b;
    bool operator==(const Edge& o) const { return (a == o.a && b == o.b) || (a == o.b && b == o.a); }
};

// Sequential lambda-opt move search over one tour. Buffers are reused across
// calls; not thread-safe, one engine per thread.
class MoveEngine {
public:
    MoveEngine(const CostView& cost, const CandidateSet& cands, int lambda_max)
        : cost_(cost), cands_(&cands), lambda_max_(lambda_max), n_(cost.instance().n) {
        removed_.reserve(lambda_max);
        added_.reserve(lambda_max);
        walk_order_.resize(n_);
    }

    void set_tour(const Tour& tour) {
        order_ = tour.order;
        pos_ = tour.position;
    }
    Tour tour() const { return Tour::from_order(order_); }

    const std::vector<int>& touched() const { return touched_; }

    // First improving exchange rooted at t1; applies it and returns true.
    bool improve_from(int t1) {
        t1_ = t1;
        for (int dir = 0; dir < 2; ++dir) {
            int t2 = dir == 0 ? succ(t1) : pred(t1);
            removed_.assign(1, {t1, t2});
            added_.clear();
            removed_sum_ = cost_(t1, t2);
            added_sum_ = 0.0;
            if (extend_chain(t2, 1)) return true;
        }
        return false;
    }

private:
    int succ(int v) const { return order_[pos_[v] + 1 == n_ ? 0 : pos_[v] + 1]; }
    int pred(int v) const { return order_[pos_[v] == 0 ? n_ - 1 : pos_[v] - 1]; }
    bool is_tour_edge(int a, int b) const { return succ(a) == b || pred(a) == b; }

    static bool contains(const std::vector<Edge>& edges, int a, int b) {
        Edge e{a, b};
        for (const auto& x : edges)
            if (x == e) return true;
        return false;
    }

    bool candidate_allowed(int a, int b) const { return cands_->contains(a, b) || cands_->contains(b, a); }

    // last = free chain end after removing `level` edges; level-1 edges added.
    bool extend_chain(int last, int level) {
        const auto& nbrs = cands_->lists[last];
        for (int next : nbrs) {
            if (next == t1_) continue;              // closing edges handled below
            if (is_tour_edge(last, next)) continue; // adding an existing edge is degenerate
            if (contains(removed_, last, next) || contains(added_, last, next)) continue;
            double y_cost = cost_(last, next);
            if (removed_sum_ - (added_sum_ + y_cost) <= 0.0) continue; // positive-gain rule
            added_.push_back({last, next});
            added_sum_ += y_cost;

            for (int wdir = 0; wdir < 2; ++wdir) {
                int after = wdir == 0 ? succ(next) : pred(next);
                if (after == t1_) continue;
                if (contains(removed_, next, after) || contains(added_, next, after)) continue;
                removed_.push_back({next, after});
                removed_sum_ += cost_(next, after);

                if (try_close(after)) return true;
                if (level + 1 < lambda_max_ && extend_chain(after, level + 1)) return true;

                removed_sum_ -= cost_(next, after);
                removed_.pop_back();
            }
            added_sum_ -= y_cost;
            added_.pop_back();
        }
        return false;
    }

    bool try_close(int last) {
        double gain = removed_sum_ - added_sum_ - cost_(last, t1_);
        if (gain <= kGainEps) return false;
        if (is_tour_edge(last, t1_)) return false;
        if (contains(removed_, last, t1_) || contains(added_, last, t1_)) return false;
        if (!candidate_allowed(last, t1_)) return false;
        added_.push_back({last, t1_});
        bool ok = walk(true) == n_;
        if (!ok) {
            added_.pop_back();
            return false;
        }
        apply_walk();
        added_.pop_back();
        return true;
    }

    // Traverses the tour with removed/added patches applied. Returns the
    // number of nodes on the cycle through t1_; fills walk_order_ when
    // `record` is set. The patched graph is 2-regular by construction.
    int walk(bool record) {
        int count = 0;
        int prev = -1, cur = t1_;
        do {
            if (record) walk_order_[count] = cur;
            ++count;
            if (count > n_) return count; // defensive; cannot happen on 2-regular graphs
            int nb[2];
            patched_neighbors(cur, nb);
            int next = (nb[0] == prev) ? nb[1] : nb[0];
            // A node adjacent to prev by both edges (parallel edges) is
            // excluded by the added/removed disjointness checks.
            prev = cur;
            cur = next;
        } while (cur != t1_);
        return count;
    }

    void patched_neighbors(int v, int out[2]) const {
        int cnt = 0;
        int s = succ(v), p = pred(v);
        if (!contains(removed_, v, s)) out[cnt++] = s;
        if (!contains(removed_, v, p)) out[cnt++] = p;
        for (const auto& e : added_) {
            if (cnt == 2) break;
            if (e.a == v) out[cnt++] = e.b;
            else if (e.b == v) out[cnt++] = e.a;
        }
    }

    void apply_walk() {
        touched_.clear();
        for (const auto& e : removed_) {
            touched_.push_back(e.a);
            touched_.push_back(e.b);
        }
        for (const auto& e : added_) {
            touched_.push_back(e.a);
            touched_.push_back(e.b);
        }
        order_ = walk_order_;
        for (int i = 0; i < n_; ++i) pos_[order_[i]] = i;
    }

    CostView cost_;
    const CandidateSet* cands_;
    int lambda_max_;
    int n_;
    std::vector<int> order_, pos_;
    int t1_ = -1;
    std::vector<Edge> removed_, added_;
    double removed_sum_ = 0.0, added_sum_ = 0.0;
    std::vector<int> walk_order_;
    std::vector<int> touched_;
};

Tour random_tour_from(Rng& rng, int n) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    return Tour::from_order(std::move(order));
}

// Drives one tour to a lambda-opt local optimum. Don't-look bits are kept as
// an active FIFO: a node leaves the queue once its base scan fails and only
// re-enters when an applied exchange touches it. Returns false if the
// deadline fired first.
bool optimize_tour(MoveEngine& eng, int n, long& improvements,
                   const std::optional<Clock::time_point>& deadline) {
    std::vector<int> queue(n);
    std::iota(queue.begin(), queue.end(), 0);
    std::vector<char> active(n, 1);
    std::size_t head = 0;
    while (head < queue.size()) {
        if (deadline && Clock::now() >= *deadline) return false;
        int v = queue[head++];
        active[v] = 0;
        if (eng.improve_from(v)) {
            ++improvements;
            for (int u : eng.touched()) {
                if (!active[u]) {
                    active[u] = 1;
                    queue.push_back(u);
                }
            }
        }
    }
    return true;
}

} // namespace

double CostView::pi_sum() const {
    if (!pi_) return 0.0;
    return std::accumulate(pi_->begin(), pi_->end(), 0.0);
}

Tour random_tour(int n, std::uint64_t seed) {
    require(n >= 3, ErrorKind::invalid_size, "random_tour: n < 3");
    Rng rng(seed);
    return random_tour_from(rng, n);
}

double tour_length(const CostView& cost, const Tour& tour) {
    require(tour.valid(), ErrorKind::invalid_argument, "tour_length: invalid tour");
    const int n = tour.n();
    double len = 0.0;
    for (int i = 0; i < n; ++i) len += cost(tour.order[i], tour.order[(i + 1) % n]);
    return len;
}

std::optional<Tour> lambda_opt_improve(const Tour& tour, const CandidateSet& cands, const CostView& cost,
                                       int lambda_max) {
    require(lambda_max >= 2 && lambda_max <= 5, ErrorKind::invalid_argument,
            "lambda_opt_improve: lambda_max must be in [2, 5]");
    require(tour.valid(), ErrorKind::invalid_argument, "lambda_opt_improve: invalid tour");
    MoveEngine eng(cost, cands, lambda_max);
    eng.set_tour(tour);
    for (int v = 0; v < tour.n(); ++v)
        if (eng.improve_from(v)) return eng.tour();
    return std::nullopt;
}

SearchResult run_trials(const TspInstance& inst, const CandidateSet& cands, const PiVector& pi,
                        int trials, std::optional<double> time_limit_seconds, std::uint64_t seed,
                        int lambda_max) {
    require(trials >= 1, ErrorKind::invalid_argument, "run_trials: trials < 1");
    const auto t0 = Clock::now();
    std::optional<Clock::time_point> deadline;
    if (time_limit_seconds)
        deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                            std::chrono::duration<double>(*time_limit_seconds));

    CostView cost = transform_distances(inst, pi);
    const double two_pi_sum = 2.0 * cost.pi_sum();
    MoveEngine eng(cost, cands, lambda_max);
    Rng root(seed);

    SearchResult res;
    SearchStats& st = res.stats;
    double best_pen = 0.0;
    bool have_best = false;

    for (int trial = 0; trial < trials; ++trial) {
        Rng trial_rng = root.fork(static_cast<std::uint64_t>(trial));
        Tour start = random_tour_from(trial_rng, inst.n);
        eng.set_tour(start);
        bool completed = optimize_tour(eng, inst.n, st.improvements, deadline);
        Tour t = eng.tour();
        double pen = tour_length(cost, t);
        if (!have_best || pen < best_pen) {
            have_best = true;
            best_pen = pen;
            res.tour = std::move(t);
        }
        ++st.trials_run;
        double elapsed_ms =
            std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        st.trace.push_back({trial, best_pen, best_pen - two_pi_sum, elapsed_ms});
        if (!completed) {
            st.time_limit_hit = true;
            break;
        }
        if (deadline && Clock::now() >= *deadline && trial + 1 < trials) {
            st.time_limit_hit = true;
            break;
        }
    }
    st.best_length = best_pen - two_pi_sum;
    st.elapsed_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return res;
}

std::string write_trial_trace(const SearchStats& stats) {
    std::string out;
    char buf[128];
    for (const auto& row : stats.trace) {
        std::snprintf(buf, sizeof(buf), "%d %.17g %.17g %.3f\n", row.trial, row.best_penalized,
                      row.best_original, row.elapsed_ms);
        out += buf;
    }
    return out;
}

} // namespace tsplab
