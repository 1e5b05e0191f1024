#include "tsplab/subgrad.hpp"

#include <cstdio>
#include <numeric>

namespace tsplab {

namespace {
constexpr double kStepFloor = 1e-9;
}

double held_karp_bound(const TspInstance& inst, const PiVector& pi) {
    OneTree t = minimum_one_tree(inst, pi);
    double pi_sum = std::accumulate(pi.begin(), pi.end(), 0.0);
    return t.length - 2.0 * pi_sum;
}

AscentResult subgradient_ascent(const TspInstance& inst, const AscentSchedule& schedule) {
    require(schedule.initial_step >= 0.0, ErrorKind::invalid_argument, "ascent: initial_step < 0");
    require(schedule.initial_period >= 0, ErrorKind::invalid_argument, "ascent: negative period");
    require(schedule.max_steps >= 0, ErrorKind::invalid_argument, "ascent: negative max_steps");
    const int n = inst.n;
    const int max_steps = schedule.max_steps > 0 ? schedule.max_steps : 10 * n;
    const int initial_period = schedule.initial_period > 0 ? schedule.initial_period : std::max(1, n / 2);
    int period = initial_period;

    PiVector pi(n, 0.0);
    OneTree tree = minimum_one_tree(inst, pi);
    double w = tree.length;

    // A fixed step of 1 only suits integer-scaled distances; by default start
    // at a small fraction of the mean 1-tree edge and let the initial-phase
    // doubling find the right magnitude.
    double step = schedule.initial_step > 0.0 ? schedule.initial_step
                                              : std::max(0.01 * std::abs(w) / n, 1e-6);

    AscentResult res;
    res.pi_best = pi;
    res.w_best = w;
    res.trace.push_back({0, w, step});
    if (tree.all_degree_two()) {
        res.converged_degree_two = true;
        return res;
    }

    double pi_sum = 0.0;
    int steps = 0;
    bool initial_phase = true;
    while (steps < max_steps && step >= kStepFloor) {
        bool improved_in_period = false;
        for (int p = 1; p <= period && steps < max_steps; ++p) {
            for (int v = 0; v < n; ++v) {
                double delta = step * (tree.degrees[v] - 2);
                pi[v] += delta;
                pi_sum += delta;
            }
            tree = minimum_one_tree(inst, pi);
            w = tree.length - 2.0 * pi_sum;
            ++steps;
            res.trace.push_back({steps, w, step});
            if (w > res.w_best) {
                res.w_best = w;
                res.pi_best = pi;
                improved_in_period = true;
                if (initial_phase) step *= 2.0;
            } else if (initial_phase) {
                initial_phase = false;
                step *= 0.75;
            }
            if (tree.all_degree_two()) {
                res.converged_degree_two = true;
                return res;
            }
        }
        // A period without any improvement halves both the period and the
        // step; productive periods keep them.
        if (!improved_in_period) {
            period = std::max(1, period / 2);
            step *= 0.5;
        }
    }
    return res;
}

std::string write_ascent_trace(const AscentResult& result) {
    std::string out;
    char buf[96];
    for (const auto& row : result.trace) {
        std::snprintf(buf, sizeof(buf), "%d %.17g %.17g\n", row.step, row.w, row.step_size);
        out += buf;
    }
    return out;
}

} // namespace tsplab
