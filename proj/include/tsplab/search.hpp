#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsplab/candidates.hpp"
#include "tsplab/instance.hpp"
#include "tsplab/onetree.hpp"
#include "tsplab/tour.hpp"

namespace tsplab {

/// Penalized distance view: cost(i,j) = s(i,j) + pi[i] + pi[j]. Holds
/// references only; the instance is never mutated.
class CostView {
public:
    CostView(const TspInstance& inst, const PiVector& pi) : inst_(&inst), pi_(&pi) {
        require(static_cast<int>(pi.size()) == inst.n, ErrorKind::invalid_argument,
                "cost view: pi size != n");
    }
    explicit CostView(const TspInstance& inst) : inst_(&inst), pi_(nullptr) {}

    double operator()(int i, int j) const {
        double s = distance(*inst_, i, j);
        return pi_ ? s + (*pi_)[i] + (*pi_)[j] : s;
    }
    const TspInstance& instance() const { return *inst_; }
    double pi_sum() const;

private:
    const TspInstance* inst_;
    const PiVector* pi_;
};

inline CostView transform_distances(const TspInstance& inst, const PiVector& pi) {
    return CostView(inst, pi);
}

Tour random_tour(int n, std::uint64_t seed);

double tour_length(const CostView& cost, const Tour& tour);

/// penalized length - 2 * sum(pi) recovers the original-metric length.
inline double restore_length(double penalized, const PiVector& pi) {
    double s = 0.0;
    for (double v : pi) s += v;
    return penalized - 2.0 * s;
}

/// One pass of sequential edge-exchange search: for every base node and both
/// incident tour edges, candidate edges propose additions in priority order;
/// the first positive-gain exchange of depth <= lambda_max found is applied.
/// Every added edge (including the closing one) must belong to the candidate
/// set of one of its endpoints.
std::optional<Tour> lambda_opt_improve(const Tour& tour, const CandidateSet& cands, const CostView& cost,
                                       int lambda_max);

struct TrialRow {
    int trial = 0;
    double best_penalized = 0.0;
    double best_original = 0.0;
    double elapsed_ms = 0.0;
};

struct SearchStats {
    int trials_run = 0;
    long improvements = 0;        // applied exchanges, all trials
    double best_length = 0.0;     // original metric
    std::vector<TrialRow> trace;  // best-so-far after each trial
    double elapsed_seconds = 0.0;
    bool time_limit_hit = false;
};

struct SearchResult {
    Tour tour;
    SearchStats stats;
};

/// Up to `trials` independent trials (random init, improve to a local
/// optimum) under the penalized costs; keeps the best by penalized length and
/// reports best_length restored to the original metric. The time limit is
/// checked between base-node scans; when it fires inside the first trial the
/// partially improved tour is returned and `time_limit_hit` is set.
SearchResult run_trials(const TspInstance& inst, const CandidateSet& cands, const PiVector& pi,
                        int trials, std::optional<double> time_limit_seconds, std::uint64_t seed,
                        int lambda_max);

/// Trace dump, one line per trial: "trial best_penalized best_original elapsed_ms".
std::string write_trial_trace(const SearchStats& stats);

} // namespace tsplab
