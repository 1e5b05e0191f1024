#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tsplab/candidates.hpp"
#include "tsplab/instance.hpp"
#include "tsplab/oracle.hpp"
#include "tsplab/search.hpp"
#include "tsplab/sgn.hpp"
#include "tsplab/subgrad.hpp"

namespace tsplab {

enum class GeneratorLaw { uniform, clustered, mixed };
const char* law_name(GeneratorLaw law);
GeneratorLaw law_from_name(const std::string& s);

struct DatasetSpec {
    std::vector<int> sizes;
    int count_per_size = 1;
    GeneratorLaw law = GeneratorLaw::uniform;
    std::uint64_t seed = 1;
    int clusters = 4; // clustered law only
    int gamma = 8;    // sparse out-degree recorded for labeling/training
};

struct InstanceEntry {
    std::string file;
    int n = 0;
    GeneratorLaw law = GeneratorLaw::uniform;
    std::uint64_t seed = 0;
    std::string label_file; // empty when unlabeled
};

/// A dataset directory: manifest.json plus one native instance file per
/// entry and optional label files. Seeds in the manifest regenerate the
/// instances bit-identically.
struct Dataset {
    std::filesystem::path dir;
    DatasetSpec spec;
    std::string rng_version;
    int format_version = 1;
    std::string label_source; // "", "oracle", "search:<trials>"
    std::vector<InstanceEntry> instances;
};

/// Idempotent: recreating with the same spec is a no-op; a different spec at
/// the same path raises refuse-overwrite. Instances of n <= 10 are
/// regenerated (seed advanced) until the optimal tour is unique, keeping
/// later oracle labels unambiguous.
Dataset make_dataset(const std::filesystem::path& dir, const DatasetSpec& spec);
Dataset open_dataset(const std::filesystem::path& dir);
TspInstance load_instance(const Dataset& ds, int idx);

enum class LabelSource { oracle, search_budget };

struct LabelConfig {
    LabelSource source = LabelSource::oracle;
    int trials = 10000; // search_budget only
    int lambda_max = 5;
    std::uint64_t seed = 9;
};

struct LabelData {
    int n = 0;
    int gamma = 0;
    std::string source;
    double length = 0.0;
    Tour tour;
    std::vector<std::uint8_t> indicators; // per directed sparse-graph slot
};

/// Labels every instance in place; instances the source cannot handle (e.g.
/// oracle with n > 18) are recorded as failures and skipped. Returns the
/// failure count.
int label_dataset(Dataset& ds, const LabelConfig& cfg);
LabelData read_label(const Dataset& ds, int idx);
LabeledInstance load_labeled(const Dataset& ds, int idx);

enum class CandSource { alpha, sgn, nearest };
enum class PiSource { zero, subgrad, sgn };
const char* cand_source_name(CandSource s);
const char* pi_source_name(PiSource s);

struct SolverConfig {
    CandSource cand_source = CandSource::alpha;
    PiSource pi_source = PiSource::subgrad;
    int k = 5;
    int gamma = 20; // clamped per instance to n-1
    int trials = 1;
    int lambda_max = 5;
    std::optional<double> time_limit_seconds;
    std::uint64_t seed = 1234;
    std::string model_file; // required when sgn is used
    bool report_timing = true;
    bool collect_traces = false;
    int threads = 0; // 0 = hardware concurrency

    std::string config_id() const;
};

struct SolveOutcome {
    Tour tour;
    SearchStats stats;
    PiVector pi;
    CandidateSet cands;
    double sgn_inference_ms = 0.0; // included in stats elapsed accounting
};

/// Penalties and candidate set for the configured sources, without running
/// the search. Shared by solve_instance and candidate inspection.
struct SolverInputs {
    PiVector pi;
    CandidateSet cands;
};
SolverInputs prepare_solver_inputs(const TspInstance& inst, const SolverConfig& cfg,
                                   const SgnModel* model);

SolveOutcome solve_instance(const TspInstance& inst, const SolverConfig& cfg, const SgnModel* model);

/// Reads a native instance file, falling back to TSPLIB.
TspInstance load_instance_file(const std::filesystem::path& path);

/// Applies the SGN to an arbitrary instance: coordinates outside the unit
/// square are rescaled to it first (aspect ratio kept) and the resulting
/// penalties are multiplied back by the scale factor.
struct SgnApplication {
    SparseGraph graph; // built on the inference coordinates, model gamma
    std::vector<double> beta;
    PiVector pi; // already rescaled to the original metric
};
SgnApplication apply_sgn(const SgnModel& model, const TspInstance& inst);

struct EvalRow {
    std::string instance_id;
    int n = 0;
    double best_length = 0.0;
    std::optional<double> oracle_length;
    std::optional<double> gap_bp; // parts per ten thousand
    int trials_run = 0;
    std::optional<double> cand_missed;
    std::optional<double> cand_avg_rank;
    double elapsed_ms = 0.0;
    std::vector<double> trace; // best-so-far per trial (collect_traces)
};

struct EvalReport {
    std::string dataset_id;
    std::string config_id;
    bool has_timing = true;
    std::vector<EvalRow> rows;
    int failures = 0;
    std::optional<double> mean_gap_bp;
    std::optional<double> cand_missed_fraction; // micro-averaged over edges
    std::optional<double> cand_avg_rank;
    double mean_elapsed_ms = 0.0;
    std::vector<double> mean_trace;
};

EvalReport evaluate(const Dataset& ds, const SolverConfig& cfg);

std::string write_report(const EvalReport& report);
EvalReport read_report(const std::string& text);

/// Side-by-side aggregates and traces; reports must target the same dataset.
std::string compare_reports(const std::vector<EvalReport>& reports);

} // namespace tsplab
