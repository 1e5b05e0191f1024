// tsplab command line: dataset generation, labeling, SGN training, solving
// and evaluation. Exit codes: 0 ok, 2 configuration error, 3 per-instance
// failures occurred.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsplab/harness.hpp"

namespace {

using namespace tsplab;

std::string read_file_or_die(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::configuration_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_or_die(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::io_error, "cannot write " + path);
    out << content;
}

std::vector<int> parse_sizes(const std::string& csv) {
    std::vector<int> sizes;
    std::istringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) sizes.push_back(std::stoi(tok));
    }
    require(!sizes.empty(), ErrorKind::configuration_error, "no sizes given");
    return sizes;
}

CandSource parse_cand_source(const std::string& s) {
    if (s == "alpha") return CandSource::alpha;
    if (s == "sgn") return CandSource::sgn;
    if (s == "nearest") return CandSource::nearest;
    fail(ErrorKind::configuration_error, "unknown candidate source: " + s);
}

PiSource parse_pi_source(const std::string& s) {
    if (s == "zero") return PiSource::zero;
    if (s == "subgrad") return PiSource::subgrad;
    if (s == "sgn") return PiSource::sgn;
    fail(ErrorKind::configuration_error, "unknown pi source: " + s);
}

struct SolverFlags {
    std::string cand = "alpha";
    std::string pi = "subgrad";
    int k = 5;
    int gamma = 20;
    int trials = 1;
    int lambda_max = 5;
    double time_limit = 0.0;
    std::uint64_t seed = 1234;
    std::string model_file;
    int threads = 0;
    bool no_timing = false;
    bool traces = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--candidates", cand, "candidate source: alpha|sgn|nearest");
        cmd->add_option("--pi", pi, "penalty source: zero|subgrad|sgn");
        cmd->add_option("--k", k, "candidates per node");
        cmd->add_option("--gamma", gamma, "sparse out-degree (clamped to n-1)");
        cmd->add_option("--trials", trials, "search trials");
        cmd->add_option("--lambda-max", lambda_max, "max edges exchanged per move");
        cmd->add_option("--time-limit", time_limit, "seconds, 0 = none");
        cmd->add_option("--seed", seed, "search seed");
        cmd->add_option("--model", model_file, "SGN model file (for sgn sources)");
        cmd->add_option("--threads", threads, "worker threads, 0 = auto");
        cmd->add_flag("--no-timing", no_timing, "omit elapsed columns from reports");
        cmd->add_flag("--traces", traces, "collect per-trial traces into reports");
    }

    SolverConfig config() const {
        SolverConfig cfg;
        cfg.cand_source = parse_cand_source(cand);
        cfg.pi_source = parse_pi_source(pi);
        cfg.k = k;
        cfg.gamma = gamma;
        cfg.trials = trials;
        cfg.lambda_max = lambda_max;
        if (time_limit > 0.0) cfg.time_limit_seconds = time_limit;
        cfg.seed = seed;
        cfg.model_file = model_file;
        cfg.threads = threads;
        cfg.report_timing = !no_timing;
        cfg.collect_traces = traces;
        return cfg;
    }
};

std::optional<SgnModel> maybe_load_model(const SolverConfig& cfg) {
    if (cfg.cand_source != CandSource::sgn && cfg.pi_source != PiSource::sgn) return std::nullopt;
    require(!cfg.model_file.empty(), ErrorKind::configuration_error,
            "sgn source requested; pass --model");
    return load_model(read_file_or_die(cfg.model_file));
}

int cmd_gen(const std::string& out_dir, const std::string& sizes_csv, int count,
            const std::string& law, std::uint64_t seed, int clusters, int gamma) {
    DatasetSpec spec;
    spec.sizes = parse_sizes(sizes_csv);
    spec.count_per_size = count;
    spec.law = law_from_name(law);
    spec.seed = seed;
    spec.clusters = clusters;
    spec.gamma = gamma;
    Dataset ds = make_dataset(out_dir, spec);
    std::printf("dataset %s: %zu instances\n", out_dir.c_str(), ds.instances.size());
    return 0;
}

int cmd_label(const std::string& dir, const std::string& source, int trials, int lambda_max,
              std::uint64_t seed) {
    Dataset ds = open_dataset(dir);
    LabelConfig cfg;
    if (source == "oracle") {
        cfg.source = LabelSource::oracle;
    } else if (source == "search") {
        cfg.source = LabelSource::search_budget;
    } else {
        fail(ErrorKind::configuration_error, "unknown label source: " + source);
    }
    cfg.trials = trials;
    cfg.lambda_max = lambda_max;
    cfg.seed = seed;
    int failures = label_dataset(ds, cfg);
    std::printf("labeled %zu instances, %d failures\n", ds.instances.size() - failures, failures);
    return failures > 0 ? 3 : 0;
}

int cmd_train(const std::string& dir, const std::string& out, int dim, int layers, double lr,
              int epochs, int batch, double eta_pi, std::uint64_t seed, double clamp) {
    Dataset ds = open_dataset(dir);
    std::vector<LabeledInstance> data;
    int skipped = 0;
    for (int i = 0; i < static_cast<int>(ds.instances.size()); ++i) {
        if (ds.instances[i].label_file.empty()) {
            ++skipped;
            continue;
        }
        data.push_back(load_labeled(ds, i));
    }
    require(!data.empty(), ErrorKind::configuration_error, "dataset has no labeled instances");
    int gamma = data.front().graph.gamma;

    SgnModel model = init_model(dim, layers, gamma, seed, clamp);
    TrainConfig cfg;
    cfg.lr = lr;
    cfg.epochs = epochs;
    cfg.batch_graphs = batch;
    cfg.eta_pi = eta_pi;
    cfg.seed = seed;
    auto log = sgn_train(model, data, cfg);
    for (const auto& row : log)
        std::printf("epoch %d edge_loss %.6f node_loss %.6f\n", row.epoch, row.mean_edge_loss,
                    row.mean_node_loss);
    write_file_or_die(out, save_model(model));
    std::printf("model written to %s (%ld parameters)\n", out.c_str(), param_count(model));
    return skipped > 0 ? 3 : 0;
}

int cmd_finetune(const std::string& in, const std::string& out, int n, int iterations, int batch,
                 std::uint64_t seed, double lr) {
    SgnModel model = load_model(read_file_or_die(in));
    finetune_node_decoder(model, n, iterations, batch, seed, lr);
    write_file_or_die(out, save_model(model));
    std::printf("node decoder fine-tuned for n=%d (%d iterations) -> %s\n", n, iterations,
                out.c_str());
    return 0;
}

int cmd_solve(const std::string& inst_path, const SolverFlags& flags, const std::string& trace_out) {
    SolverConfig cfg = flags.config();
    TspInstance inst = load_instance_file(inst_path);
    std::optional<SgnModel> model = maybe_load_model(cfg);
    SolveOutcome sol = solve_instance(inst, cfg, model ? &*model : nullptr);
    std::printf("length %.10f trials %d improvements %ld elapsed_ms %.1f%s\n",
                sol.stats.best_length, sol.stats.trials_run, sol.stats.improvements,
                sol.stats.elapsed_seconds * 1e3, sol.stats.time_limit_hit ? " (time limit)" : "");
    std::string tour = "tour";
    for (int v : sol.tour.order) tour += " " + std::to_string(v);
    std::printf("%s\n", tour.c_str());
    if (!trace_out.empty()) write_file_or_die(trace_out, write_trial_trace(sol.stats));
    return 0;
}

int cmd_eval(const std::string& dir, const SolverFlags& flags, const std::string& out) {
    Dataset ds = open_dataset(dir);
    EvalReport report = evaluate(ds, flags.config());
    std::string doc = write_report(report);
    if (out.empty()) {
        std::fputs(doc.c_str(), stdout);
    } else {
        write_file_or_die(out, doc);
        if (report.mean_gap_bp)
            std::printf("mean gap %.4f bp over %zu rows -> %s\n", *report.mean_gap_bp,
                        report.rows.size(), out.c_str());
        else
            std::printf("%zu rows (no labels) -> %s\n", report.rows.size(), out.c_str());
    }
    return report.failures > 0 ? 3 : 0;
}

int cmd_compare(const std::vector<std::string>& report_files, const std::string& out) {
    require(report_files.size() >= 2, ErrorKind::configuration_error, "need at least two reports");
    std::vector<EvalReport> reports;
    for (const auto& f : report_files) reports.push_back(read_report(read_file_or_die(f)));
    std::string doc = compare_reports(reports);
    if (out.empty())
        std::fputs(doc.c_str(), stdout);
    else
        write_file_or_die(out, doc);
    return 0;
}

int cmd_inspect(const std::string& dir, const SolverFlags& flags) {
    Dataset ds = open_dataset(dir);
    SolverConfig cfg = flags.config();
    std::optional<SgnModel> model = maybe_load_model(cfg);

    long missed = 0, present = 0;
    double rank_sum = 0.0;
    int evaluated = 0, failures = 0;
    for (int i = 0; i < static_cast<int>(ds.instances.size()); ++i) {
        if (ds.instances[i].label_file.empty()) {
            ++failures;
            continue;
        }
        TspInstance inst = load_instance(ds, i);
        LabelData label = read_label(ds, i);
        SolverInputs in = prepare_solver_inputs(inst, cfg, model ? &*model : nullptr);
        CandidateQuality q = candidate_quality(in.cands, label.tour);
        missed += q.missed_edges;
        present += q.present_edges;
        if (q.avg_rank) rank_sum += *q.avg_rank * q.present_edges;
        ++evaluated;
    }
    require(evaluated > 0, ErrorKind::configuration_error, "dataset has no labeled instances");
    double missed_fraction = static_cast<double>(missed) / (missed + present);
    std::printf("config %s\n", cfg.config_id().c_str());
    std::printf("instances %d missed_fraction %.6f", evaluated, missed_fraction);
    if (present > 0) std::printf(" avg_rank %.6f", rank_sum / present);
    std::printf("\n");
    return failures > 0 ? 3 : 0;
}

int cmd_bound(const std::string& inst_path, double step, int period, int max_steps,
              const std::string& out) {
    TspInstance inst = load_instance_file(inst_path);
    AscentSchedule sched;
    sched.initial_step = step;
    sched.initial_period = period;
    sched.max_steps = max_steps;
    AscentResult res = subgradient_ascent(inst, sched);
    std::printf("w0 %.10f w_best %.10f steps %zu%s\n", res.trace.front().w, res.w_best,
                res.trace.size() - 1, res.converged_degree_two ? " (degree-2 optimum)" : "");
    if (!out.empty()) write_file_or_die(out, write_ascent_trace(res));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tsplab: LKH-style TSP search with learned edge scores and node penalties"};
    app.set_config("--config", "", "key=value config file");
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a dataset");
    std::string gen_out, gen_sizes = "100", gen_law = "uniform";
    int gen_count = 10, gen_clusters = 4, gen_gamma = 20;
    std::uint64_t gen_seed = 1;
    gen->add_option("--out", gen_out, "dataset directory")->required();
    gen->add_option("--sizes", gen_sizes, "comma-separated instance sizes");
    gen->add_option("--count", gen_count, "instances per size");
    gen->add_option("--law", gen_law, "uniform|clustered|mixed");
    gen->add_option("--seed", gen_seed, "dataset seed");
    gen->add_option("--clusters", gen_clusters, "cluster count for the clustered law");
    gen->add_option("--gamma", gen_gamma, "sparse out-degree recorded for labeling");

    // label
    auto* label = app.add_subcommand("label", "label a dataset with tours and optimal edges");
    std::string label_dir, label_source = "oracle";
    int label_trials = 10000, label_lambda = 5;
    std::uint64_t label_seed = 9;
    label->add_option("--dataset", label_dir, "dataset directory")->required();
    label->add_option("--source", label_source, "oracle|search");
    label->add_option("--trials", label_trials, "search trials (search source)");
    label->add_option("--lambda-max", label_lambda, "search depth (search source)");
    label->add_option("--seed", label_seed, "search seed (search source)");

    // train
    auto* train = app.add_subcommand("train", "train the sparse graph network");
    std::string train_dir, train_out = "model.sgn";
    int train_dim = 32, train_layers = 6, train_epochs = 16, train_batch = 8;
    double train_lr = 1e-4, train_eta = 1.0, train_clamp = 10.0;
    std::uint64_t train_seed = 1;
    train->add_option("--dataset", train_dir, "labeled dataset directory")->required();
    train->add_option("--out", train_out, "model output file");
    train->add_option("--dim", train_dim, "feature width D");
    train->add_option("--layers", train_layers, "convolutional layers L");
    train->add_option("--lr", train_lr, "Adam learning rate");
    train->add_option("--epochs", train_epochs, "training epochs");
    train->add_option("--batch", train_batch, "graphs per batch");
    train->add_option("--eta-pi", train_eta, "node loss weight");
    train->add_option("--seed", train_seed, "init/shuffle seed");
    train->add_option("--penalty-clamp", train_clamp, "C in pi = C tanh(.)");

    // finetune
    auto* fine = app.add_subcommand("finetune", "fine-tune the node decoder for a size");
    std::string fine_in, fine_out;
    int fine_n = 0, fine_iters = 100, fine_batch = 0;
    double fine_lr = 1e-4;
    std::uint64_t fine_seed = 1;
    fine->add_option("--model", fine_in, "input model")->required();
    fine->add_option("--out", fine_out, "output model")->required();
    fine->add_option("--n", fine_n, "target instance size")->required();
    fine->add_option("--iterations", fine_iters, "fine-tune iterations");
    fine->add_option("--batch", fine_batch, "graphs per iteration, 0 = 5000/n");
    fine->add_option("--seed", fine_seed, "generator seed");
    fine->add_option("--lr", fine_lr, "Adam learning rate");

    // solve
    auto* solve = app.add_subcommand("solve", "solve one instance (native or TSPLIB file)");
    std::string solve_inst, solve_trace;
    SolverFlags solve_flags;
    solve->add_option("--instance", solve_inst, "instance file")->required();
    solve_flags.attach(solve);
    solve->add_option("--trace", solve_trace, "write per-trial trace here");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a solver config over a dataset");
    std::string eval_dir, eval_out;
    SolverFlags eval_flags;
    eval->add_option("--dataset", eval_dir, "dataset directory")->required();
    eval_flags.attach(eval);
    eval->add_option("--out", eval_out, "report file (stdout if omitted)");

    // compare
    auto* comp = app.add_subcommand("compare", "compare evaluation reports");
    std::vector<std::string> comp_files;
    std::string comp_out;
    comp->add_option("--reports", comp_files, "report files")->required()->expected(2, -1);
    comp->add_option("--out", comp_out, "comparison file (stdout if omitted)");

    // inspect-candidates
    auto* inspect = app.add_subcommand("inspect-candidates", "candidate quality vs labels");
    std::string inspect_dir;
    SolverFlags inspect_flags;
    inspect->add_option("--dataset", inspect_dir, "labeled dataset directory")->required();
    inspect_flags.attach(inspect);

    // bound
    auto* bound = app.add_subcommand("bound", "subgradient ascent trace for one instance");
    std::string bound_inst, bound_out;
    double bound_step = 0.0;
    int bound_period = 0, bound_max = 0;
    bound->add_option("--instance", bound_inst, "instance file")->required();
    bound->add_option("--step", bound_step, "initial step, 0 = auto");
    bound->add_option("--period", bound_period, "initial period, 0 = n/2");
    bound->add_option("--max-steps", bound_max, "step budget, 0 = 10n");
    bound->add_option("--out", bound_out, "trace file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_sizes, gen_count, gen_law, gen_seed, gen_clusters, gen_gamma);
        if (label->parsed())
            return cmd_label(label_dir, label_source, label_trials, label_lambda, label_seed);
        if (train->parsed())
            return cmd_train(train_dir, train_out, train_dim, train_layers, train_lr, train_epochs,
                             train_batch, train_eta, train_seed, train_clamp);
        if (fine->parsed())
            return cmd_finetune(fine_in, fine_out, fine_n, fine_iters, fine_batch, fine_seed, fine_lr);
        if (solve->parsed()) return cmd_solve(solve_inst, solve_flags, solve_trace);
        if (eval->parsed()) return cmd_eval(eval_dir, eval_flags, eval_out);
        if (comp->parsed()) return cmd_compare(comp_files, comp_out);
        if (inspect->parsed()) return cmd_inspect(inspect_dir, inspect_flags);
        if (bound->parsed()) return cmd_bound(bound_inst, bound_step, bound_period, bound_max, bound_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
