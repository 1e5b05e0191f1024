#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "tsplab/error.hpp"
#include "tsplab/rng.hpp"

namespace tsplab {

enum class Metric {
    continuous_euclidean,
    tsplib_rounded_euclidean,
};

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& s);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Euclidean TSP instance. Immutable by convention once built.
struct TspInstance {
    int n = 0;
    std::vector<Point> coords;
    Metric metric = Metric::continuous_euclidean;
    std::string name;
};

/// Per-node out-edges to the gamma nearest neighbors, ascending by
/// (distance, node id). Directed: (i,j) present does not imply (j,i) is.
struct SparseGraph {
    int n = 0;
    int gamma = 0;
    std::vector<int> neighbors;   // n*gamma, row i holds node i's list
    std::vector<double> dist;     // parallel to neighbors
    std::vector<int> reverse_slot; // global slot of (j,i) in j's row, or -1

    int edge_count() const { return n * gamma; }
    int slot(int i, int s) const { return i * gamma + s; }
    int neighbor(int i, int s) const { return neighbors[slot(i, s)]; }
};

double distance(const TspInstance& inst, int i, int j);

TspInstance generate_uniform(int n, std::uint64_t seed);
// Cluster centers uniform in the unit square; points are isotropic Gaussian
// (sigma = 0.05) around a uniformly chosen center, rejection-sampled into
// [0,1]^2. clusters must lie in [3, 8].
TspInstance generate_clustered(int n, int clusters, std::uint64_t seed);
// ceil(n/2) uniform points plus floor(n/2) clustered points, shuffled.
TspInstance generate_mixed(int n, std::uint64_t seed);

TspInstance parse_tsplib(const std::string& text);
std::string write_tsplib(const TspInstance& inst);

struct Normalized {
    TspInstance inst;
    double scale = 1.0; // original length = normalized length * scale
};
Normalized normalize_unit_square(const TspInstance& inst);

SparseGraph build_sparse_graph(const TspInstance& inst, int gamma);

// Native instance text format: "tsp <n> <metric> <name>" then n lines "x y".
std::string write_instance(const TspInstance& inst);
TspInstance read_instance(const std::string& text);

} // namespace tsplab
