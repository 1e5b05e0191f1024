#pragma once

#include <string>
#include <vector>

#include "tsplab/onetree.hpp"

namespace tsplab {

struct AscentSchedule {
    double initial_step = 0.0; // 0 -> auto: 0.01 * L(T_0) / n
    int initial_period = 0;    // 0 -> max(1, n/2)
    int max_steps = 0;         // 0 -> 10n
};

struct AscentTraceRow {
    int step = 0;
    double w = 0.0;
    double step_size = 0.0;
};

struct AscentResult {
    PiVector pi_best;
    double w_best = 0.0;
    std::vector<AscentTraceRow> trace; // row 0 is the starting point (pi = 0)
    bool converged_degree_two = false;
};

/// Held-Karp lower bound: w(pi) = L(T_pi) - 2 * sum(pi).
double held_karp_bound(const TspInstance& inst, const PiVector& pi);

/// Maximizes w(pi) by iterating pi += t * (d - 2) from pi = 0. Period-based
/// step control after Helsgaun 2000: the step doubles on improvement during
/// the first period; later periods keep the step fixed and halve both period
/// and step when a period passes without improvement. Stops on max_steps,
/// step underflow (< 1e-9) or an all-degree-2 tree.
AscentResult subgradient_ascent(const TspInstance& inst, const AscentSchedule& schedule);

/// Trace dump, one line per row: "step w step_size".
std::string write_ascent_trace(const AscentResult& result);

} // namespace tsplab
