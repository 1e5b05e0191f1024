#include "tsplab/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace tsplab {

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::io_error, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::io_error, "cannot write " + path.string());
    out << content;
    require(out.good(), ErrorKind::io_error, "write failed for " + path.string());
}

std::string instance_file_name(int idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "inst%05d.txt", idx);
    return buf;
}

std::string label_file_name(int idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "label%05d.txt", idx);
    return buf;
}

TspInstance generate_for(GeneratorLaw law, int n, int clusters, std::uint64_t seed) {
    switch (law) {
        case GeneratorLaw::uniform: return generate_uniform(n, seed);
        case GeneratorLaw::clustered: return generate_clustered(n, clusters, seed);
        case GeneratorLaw::mixed: return generate_mixed(n, seed);
    }
    fail(ErrorKind::invalid_argument, "unknown generator law");
}

json spec_to_json(const DatasetSpec& spec) {
    return json{{"law", law_name(spec.law)},       {"sizes", spec.sizes},
                {"count_per_size", spec.count_per_size}, {"seed", spec.seed},
                {"clusters", spec.clusters},       {"gamma", spec.gamma}};
}

DatasetSpec spec_from_json(const json& j) {
    DatasetSpec spec;
    spec.law = law_from_name(j.at("law").get<std::string>());
    spec.sizes = j.at("sizes").get<std::vector<int>>();
    spec.count_per_size = j.at("count_per_size").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    spec.clusters = j.at("clusters").get<int>();
    spec.gamma = j.at("gamma").get<int>();
    return spec;
}

void save_manifest(const Dataset& ds) {
    json j;
    j["format_version"] = ds.format_version;
    j["rng"] = ds.rng_version;
    j["generator"] = spec_to_json(ds.spec);
    j["label_source"] = ds.label_source;
    json entries = json::array();
    for (const auto& e : ds.instances) {
        entries.push_back(json{{"file", e.file},
                               {"n", e.n},
                               {"law", law_name(e.law)},
                               {"seed", e.seed},
                               {"label", e.label_file}});
    }
    j["instances"] = entries;
    write_file(ds.dir / "manifest.json", j.dump(2) + "\n");
}

// Deterministic per-index instance generation; n <= 10 instances advance the
// seed until the optimum is unique so oracle labels stay unambiguous. For
// larger continuous instances exact ties have probability zero.
std::pair<TspInstance, std::uint64_t> generate_entry(const DatasetSpec& spec, int n, int index) {
    Rng derive = Rng(spec.seed).fork(static_cast<std::uint64_t>(index));
    for (;;) {
        std::uint64_t seed = derive.next_u64();
        TspInstance inst = generate_for(spec.law, n, spec.clusters, seed);
        if (n > 10 || count_optimal_tours(inst) == 1) return {std::move(inst), seed};
    }
}

// Fixed work assignment: worker w handles indices w, w+T, w+2T, ... so the
// per-index results are identical for any thread count.
void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += threads) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace

const char* law_name(GeneratorLaw law) {
    switch (law) {
        case GeneratorLaw::uniform: return "uniform";
        case GeneratorLaw::clustered: return "clustered";
        case GeneratorLaw::mixed: return "mixed";
    }
    fail(ErrorKind::invalid_argument, "unknown law");
}

GeneratorLaw law_from_name(const std::string& s) {
    if (s == "uniform") return GeneratorLaw::uniform;
    if (s == "clustered") return GeneratorLaw::clustered;
    if (s == "mixed") return GeneratorLaw::mixed;
    fail(ErrorKind::parse_error, "unknown generator law: " + s);
}

const char* cand_source_name(CandSource s) {
    switch (s) {
        case CandSource::alpha: return "alpha";
        case CandSource::sgn: return "sgn";
        case CandSource::nearest: return "nearest";
    }
    fail(ErrorKind::invalid_argument, "unknown candidate source");
}

const char* pi_source_name(PiSource s) {
    switch (s) {
        case PiSource::zero: return "zero";
        case PiSource::subgrad: return "subgrad";
        case PiSource::sgn: return "sgn";
    }
    fail(ErrorKind::invalid_argument, "unknown pi source");
}

Dataset make_dataset(const std::filesystem::path& dir, const DatasetSpec& spec) {
    require(!spec.sizes.empty() && spec.count_per_size >= 1, ErrorKind::invalid_argument,
            "make_dataset: empty spec");
    for (int n : spec.sizes)
        require(n >= 3, ErrorKind::invalid_argument, "make_dataset: size < 3");

    if (std::filesystem::exists(dir / "manifest.json")) {
        Dataset existing = open_dataset(dir);
        if (spec_to_json(existing.spec) != spec_to_json(spec))
            fail(ErrorKind::refuse_overwrite,
                 "make_dataset: " + dir.string() + " holds a different dataset");
        return existing; // idempotent
    }
    std::filesystem::create_directories(dir);

    Dataset ds;
    ds.dir = dir;
    ds.spec = spec;
    ds.rng_version = Rng::kVersion;

    int index = 0;
    for (int n : spec.sizes) {
        for (int c = 0; c < spec.count_per_size; ++c, ++index) {
            auto [inst, seed] = generate_entry(spec, n, index);
            InstanceEntry entry;
            entry.file = instance_file_name(index);
            entry.n = n;
            entry.law = spec.law;
            entry.seed = seed;
            inst.name = "inst" + std::to_string(index);
            write_file(dir / entry.file, write_instance(inst));
            ds.instances.push_back(entry);
        }
    }
    save_manifest(ds);
    return ds;
}

Dataset open_dataset(const std::filesystem::path& dir) {
    json j = json::parse(read_file(dir / "manifest.json"));
    Dataset ds;
    ds.dir = dir;
    ds.format_version = j.at("format_version").get<int>();
    require(ds.format_version == 1, ErrorKind::unsupported_format, "manifest: unknown format version");
    ds.rng_version = j.at("rng").get<std::string>();
    ds.spec = spec_from_json(j.at("generator"));
    ds.label_source = j.at("label_source").get<std::string>();
    for (const auto& e : j.at("instances")) {
        InstanceEntry entry;
        entry.file = e.at("file").get<std::string>();
        entry.n = e.at("n").get<int>();
        entry.law = law_from_name(e.at("law").get<std::string>());
        entry.seed = e.at("seed").get<std::uint64_t>();
        entry.label_file = e.at("label").get<std::string>();
        require(std::filesystem::exists(dir / entry.file), ErrorKind::corrupt_file,
                "manifest lists missing file " + entry.file);
        ds.instances.push_back(entry);
    }
    return ds;
}

TspInstance load_instance(const Dataset& ds, int idx) {
    return read_instance(read_file(ds.dir / ds.instances.at(idx).file));
}

int label_dataset(Dataset& ds, const LabelConfig& cfg) {
    int failures = 0;
    const std::string source_tag = cfg.source == LabelSource::oracle
                                       ? "oracle"
                                       : "search:" + std::to_string(cfg.trials);
    std::vector<std::string> label_files(ds.instances.size());
    std::vector<char> failed(ds.instances.size(), 0);

    parallel_for(static_cast<int>(ds.instances.size()), 0, [&](int i) {
        TspInstance inst = load_instance(ds, i);
        int gamma = std::min(ds.spec.gamma, inst.n - 1);
        SparseGraph graph = build_sparse_graph(inst, gamma);
        Tour tour;
        double length = 0.0;
        if (cfg.source == LabelSource::oracle) {
            if (inst.n > 18) {
                failed[i] = 1;
                return;
            }
            OracleResult res = exact_solve(inst);
            tour = res.tour;
            length = res.length;
        } else {
            AscentResult ascent = subgradient_ascent(inst, {});
            std::vector<double> alpha = alpha_measures(inst, ascent.pi_best, graph);
            CandidateSet cands = from_alpha(inst, graph, alpha, std::min(5, gamma));
            SearchResult sr = run_trials(inst, cands, ascent.pi_best, cfg.trials, std::nullopt,
                                         Rng(cfg.seed).fork(i).next_u64(), cfg.lambda_max);
            tour = canonical_tour(sr.tour);
            length = tour_length(CostView(inst), tour);
        }
        std::vector<std::uint8_t> ind = tour_edge_indicator(tour, graph);
        std::string out = "labels " + std::to_string(inst.n) + " " + std::to_string(gamma) + " " +
                          source_tag + "\n";
        out += "length " + fmt(length) + "\n";
        out += "tour";
        for (int v : tour.order) out += " " + std::to_string(v);
        out += "\n";
        for (int node = 0; node < inst.n; ++node) {
            for (int s = 0; s < gamma; ++s) {
                out += ind[node * gamma + s] ? '1' : '0';
                if (s + 1 < gamma) out += ' ';
            }
            out += "\n";
        }
        label_files[i] = label_file_name(i);
        write_file(ds.dir / label_files[i], out);
    });

    for (std::size_t i = 0; i < ds.instances.size(); ++i) {
        if (failed[i]) {
            ++failures;
            ds.instances[i].label_file.clear();
        } else {
            ds.instances[i].label_file = label_files[i];
        }
    }
    ds.label_source = source_tag;
    save_manifest(ds);
    return failures;
}

LabelData read_label(const Dataset& ds, int idx) {
    const auto& entry = ds.instances.at(idx);
    require(!entry.label_file.empty(), ErrorKind::invalid_state,
            "instance " + std::to_string(idx) + " has no label");
    std::istringstream in(read_file(ds.dir / entry.label_file));
    std::string tag;
    LabelData data;
    in >> tag >> data.n >> data.gamma >> data.source;
    require(in.good() && tag == "labels", ErrorKind::parse_error, "label: bad header");
    in >> tag >> data.length;
    require(in.good() && tag == "length", ErrorKind::parse_error, "label: bad length line");
    in >> tag;
    require(tag == "tour", ErrorKind::parse_error, "label: bad tour line");
    std::vector<int> order(data.n);
    for (int& v : order) {
        if (!(in >> v)) fail(ErrorKind::parse_error, "label: truncated tour");
    }
    data.tour = Tour::from_order(std::move(order));
    data.indicators.resize(static_cast<std::size_t>(data.n) * data.gamma);
    for (auto& b : data.indicators) {
        int bit;
        if (!(in >> bit) || (bit != 0 && bit != 1)) fail(ErrorKind::parse_error, "label: bad indicator");
        b = static_cast<std::uint8_t>(bit);
    }
    return data;
}

LabeledInstance load_labeled(const Dataset& ds, int idx) {
    LabeledInstance li;
    li.inst = load_instance(ds, idx);
    LabelData label = read_label(ds, idx);
    require(label.n == li.inst.n, ErrorKind::corrupt_file, "label/instance size mismatch");
    li.graph = build_sparse_graph(li.inst, label.gamma);
    li.labels = label.indicators;
    return li;
}

std::string SolverConfig::config_id() const {
    std::string model_tag = model_file.empty()
                                ? "-"
                                : std::filesystem::path(model_file).filename().string();
    std::string out = "cand=" + std::string(cand_source_name(cand_source)) +
                      " pi=" + pi_source_name(pi_source) + " k=" + std::to_string(k) +
                      " gamma=" + std::to_string(gamma) + " trials=" + std::to_string(trials) +
                      " lambda=" + std::to_string(lambda_max) + " seed=" + std::to_string(seed) +
                      " model=" + model_tag;
    if (time_limit_seconds) out += " tl=" + fmt(*time_limit_seconds);
    return out;
}

SgnApplication apply_sgn(const SgnModel& model, const TspInstance& inst) {
    require(inst.n > model.gamma, ErrorKind::configuration_error,
            "sgn: instance smaller than model gamma + 1");
    bool in_unit_square = inst.metric == Metric::continuous_euclidean;
    if (in_unit_square) {
        for (const auto& p : inst.coords)
            if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
                in_unit_square = false;
                break;
            }
    }

    SgnApplication app;
    double scale = 1.0;
    TspInstance infer_inst;
    if (in_unit_square) {
        infer_inst = inst;
    } else {
        Normalized norm = normalize_unit_square(inst);
        infer_inst = std::move(norm.inst);
        infer_inst.metric = Metric::continuous_euclidean;
        scale = norm.scale;
    }
    app.graph = build_sparse_graph(infer_inst, model.gamma);
    SgnInference inf = sgn_infer(model, infer_inst, app.graph);
    app.beta = std::move(inf.beta);
    app.pi.resize(inst.n);
    for (int i = 0; i < inst.n; ++i) app.pi[i] = inf.pi[i] * scale;
    return app;
}

SolverInputs prepare_solver_inputs(const TspInstance& inst, const SolverConfig& cfg,
                                   const SgnModel* model) {
    const bool needs_sgn = cfg.cand_source == CandSource::sgn || cfg.pi_source == PiSource::sgn;
    require(!needs_sgn || model != nullptr, ErrorKind::configuration_error,
            "solver: sgn source requested but no model given");

    SolverInputs in;
    std::optional<SgnApplication> sgn_app;
    if (needs_sgn) sgn_app = apply_sgn(*model, inst);

    switch (cfg.pi_source) {
        case PiSource::zero: in.pi.assign(inst.n, 0.0); break;
        case PiSource::subgrad: in.pi = subgradient_ascent(inst, {}).pi_best; break;
        case PiSource::sgn: in.pi = sgn_app->pi; break;
    }

    switch (cfg.cand_source) {
        case CandSource::alpha: {
            int gamma = std::min(cfg.gamma, inst.n - 1);
            SparseGraph graph = build_sparse_graph(inst, gamma);
            std::vector<double> alpha = alpha_measures(inst, in.pi, graph);
            in.cands = from_alpha(inst, graph, alpha, std::min(cfg.k, gamma));
            break;
        }
        case CandSource::sgn:
            in.cands = from_scores(sgn_app->graph, sgn_app->beta, std::min(cfg.k, model->gamma));
            break;
        case CandSource::nearest:
            in.cands = from_nearest(inst, std::min(cfg.k, inst.n - 1));
            break;
    }
    return in;
}

SolveOutcome solve_instance(const TspInstance& inst, const SolverConfig& cfg, const SgnModel* model) {
    SolveOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    SolverInputs in = prepare_solver_inputs(inst, cfg, model);
    out.pi = std::move(in.pi);
    out.cands = std::move(in.cands);
    out.sgn_inference_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    SearchResult sr =
        run_trials(inst, out.cands, out.pi, cfg.trials, cfg.time_limit_seconds, cfg.seed, cfg.lambda_max);
    out.tour = std::move(sr.tour);
    out.stats = sr.stats;
    // Preprocessing (SGN inference or subgradient ascent) counts into solver time.
    out.stats.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

TspInstance load_instance_file(const std::filesystem::path& path) {
    std::string text = read_file(path);
    if (text.rfind("tsp ", 0) == 0) return read_instance(text);
    return parse_tsplib(text);
}

EvalReport evaluate(const Dataset& ds, const SolverConfig& cfg) {
    EvalReport report;
    report.dataset_id = ds.dir.filename().string();
    report.config_id = cfg.config_id();
    report.has_timing = cfg.report_timing;

    std::optional<SgnModel> model;
    if (cfg.cand_source == CandSource::sgn || cfg.pi_source == PiSource::sgn) {
        require(!cfg.model_file.empty(), ErrorKind::configuration_error,
                "evaluate: sgn requested without model file");
        require(std::filesystem::exists(cfg.model_file), ErrorKind::configuration_error,
                "evaluate: model file not found: " + cfg.model_file);
        model = load_model(read_file(cfg.model_file));
    }

    const int count = static_cast<int>(ds.instances.size());
    report.rows.resize(count);
    std::vector<char> failed(count, 0);

    parallel_for(count, cfg.threads, [&](int i) {
        EvalRow& row = report.rows[i];
        row.instance_id = ds.instances[i].file;
        try {
            TspInstance inst = load_instance(ds, i);
            row.n = inst.n;
            SolverConfig per = cfg;
            per.seed = Rng(cfg.seed).fork(static_cast<std::uint64_t>(i)).next_u64();
            SolveOutcome sol = solve_instance(inst, per, model ? &*model : nullptr);
            row.best_length = sol.stats.best_length;
            row.trials_run = sol.stats.trials_run;
            row.elapsed_ms = sol.stats.elapsed_seconds * 1e3;
            if (cfg.collect_traces) {
                row.trace.reserve(sol.stats.trace.size());
                for (const auto& tr : sol.stats.trace) row.trace.push_back(tr.best_original);
            }
            if (!ds.instances[i].label_file.empty()) {
                LabelData label = read_label(ds, i);
                row.oracle_length = label.length;
                if (label.length > 0.0)
                    row.gap_bp = (row.best_length - label.length) / label.length * 1e4;
                CandidateQuality q = candidate_quality(sol.cands, label.tour);
                row.cand_missed = q.missed_fraction;
                row.cand_avg_rank = q.avg_rank;
            }
        } catch (const Error&) {
            failed[i] = 1;
        }
    });

    for (int i = 0; i < count; ++i)
        if (failed[i]) ++report.failures;

    // Aggregates, recomputable from the rows.
    double gap_sum = 0.0, elapsed_sum = 0.0;
    int gap_count = 0, ok_rows = 0;
    long missed = 0, present = 0;
    double rank_sum = 0.0;
    std::size_t max_trace = 0;
    for (int i = 0; i < count; ++i) {
        if (failed[i]) continue;
        const EvalRow& row = report.rows[i];
        ++ok_rows;
        elapsed_sum += row.elapsed_ms;
        if (row.gap_bp) {
            gap_sum += *row.gap_bp;
            ++gap_count;
        }
        if (row.cand_missed) {
            // De-average back to counts for the micro aggregate.
            missed += std::lround(*row.cand_missed * 2.0 * row.n);
            int pres = 2 * row.n - std::lround(*row.cand_missed * 2.0 * row.n);
            present += pres;
            if (row.cand_avg_rank) rank_sum += *row.cand_avg_rank * pres;
        }
        max_trace = std::max(max_trace, row.trace.size());
    }
    if (gap_count > 0) report.mean_gap_bp = gap_sum / gap_count;
    if (ok_rows > 0) report.mean_elapsed_ms = elapsed_sum / ok_rows;
    if (missed + present > 0) {
        report.cand_missed_fraction = static_cast<double>(missed) / (missed + present);
        if (present > 0) report.cand_avg_rank = rank_sum / present;
    }
    if (cfg.collect_traces && max_trace > 0) {
        report.mean_trace.assign(max_trace, 0.0);
        for (std::size_t t = 0; t < max_trace; ++t) {
            double sum = 0.0;
            int cnt = 0;
            for (int i = 0; i < count; ++i) {
                if (failed[i] || report.rows[i].trace.empty()) continue;
                const auto& tr = report.rows[i].trace;
                sum += t < tr.size() ? tr[t] : tr.back();
                ++cnt;
            }
            report.mean_trace[t] = cnt > 0 ? sum / cnt : 0.0;
        }
    }
    return report;
}

std::string write_report(const EvalReport& report) {
    std::string out = "tsplab-report 1\n";
    out += "dataset " + report.dataset_id + "\n";
    out += "config " + report.config_id + "\n";
    out += "columns instance n best oracle gap_bp trials cand_missed cand_avg_rank elapsed_ms\n";
    for (const auto& row : report.rows) {
        out += "row " + row.instance_id + " " + std::to_string(row.n) + " " + fmt(row.best_length) +
               " " + fmt_opt(row.oracle_length) + " " + fmt_opt(row.gap_bp) + " " +
               std::to_string(row.trials_run) + " " + fmt_opt(row.cand_missed) + " " +
               fmt_opt(row.cand_avg_rank) + " " +
               (report.has_timing ? fmt(row.elapsed_ms) : std::string("-")) + "\n";
    }
    out += "aggregate rows " + std::to_string(report.rows.size()) + "\n";
    out += "aggregate failures " + std::to_string(report.failures) + "\n";
    out += "aggregate mean_gap_bp " + fmt_opt(report.mean_gap_bp) + "\n";
    out += "aggregate cand_missed_fraction " + fmt_opt(report.cand_missed_fraction) + "\n";
    out += "aggregate cand_avg_rank " + fmt_opt(report.cand_avg_rank) + "\n";
    out += "aggregate mean_elapsed_ms " +
           (report.has_timing ? fmt(report.mean_elapsed_ms) : std::string("-")) + "\n";
    for (std::size_t t = 0; t < report.mean_trace.size(); ++t)
        out += "trace " + std::to_string(t) + " " + fmt(report.mean_trace[t]) + "\n";
    out += "end\n";
    return out;
}

namespace {

std::optional<double> parse_opt(const std::string& tok) {
    if (tok == "-") return std::nullopt;
    return std::stod(tok);
}

} // namespace

EvalReport read_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    EvalReport report;
    report.has_timing = true;
    bool header_seen = false, end_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (!header_seen) {
            int version = 0;
            require(tag == "tsplab-report" && (ls >> version) && version == 1,
                    ErrorKind::parse_error, "report: bad header");
            header_seen = true;
            continue;
        }
        if (tag == "dataset") {
            std::getline(ls, report.dataset_id);
            report.dataset_id.erase(0, report.dataset_id.find_first_not_of(' '));
        } else if (tag == "config") {
            std::getline(ls, report.config_id);
            report.config_id.erase(0, report.config_id.find_first_not_of(' '));
        } else if (tag == "columns") {
            // fixed schema
        } else if (tag == "row") {
            EvalRow row;
            std::string oracle, gap, missed, rank, elapsed;
            if (!(ls >> row.instance_id >> row.n >> row.best_length >> oracle >> gap >>
                  row.trials_run >> missed >> rank >> elapsed))
                fail(ErrorKind::parse_error, "report: bad row");
            row.oracle_length = parse_opt(oracle);
            row.gap_bp = parse_opt(gap);
            row.cand_missed = parse_opt(missed);
            row.cand_avg_rank = parse_opt(rank);
            if (elapsed == "-") {
                report.has_timing = false;
            } else {
                row.elapsed_ms = std::stod(elapsed);
            }
            report.rows.push_back(std::move(row));
        } else if (tag == "aggregate") {
            std::string key, value;
            ls >> key >> value;
            if (key == "failures") report.failures = std::stoi(value);
            else if (key == "mean_gap_bp") report.mean_gap_bp = parse_opt(value);
            else if (key == "cand_missed_fraction") report.cand_missed_fraction = parse_opt(value);
            else if (key == "cand_avg_rank") report.cand_avg_rank = parse_opt(value);
            else if (key == "mean_elapsed_ms" && value != "-") report.mean_elapsed_ms = std::stod(value);
        } else if (tag == "trace") {
            int t;
            double v;
            ls >> t >> v;
            report.mean_trace.push_back(v);
        } else if (tag == "end") {
            end_seen = true;
        } else {
            fail(ErrorKind::parse_error, "report: unknown line tag " + tag);
        }
    }
    require(header_seen && end_seen, ErrorKind::parse_error, "report: truncated document");
    return report;
}

std::string compare_reports(const std::vector<EvalReport>& reports) {
    require(reports.size() >= 2, ErrorKind::invalid_argument, "compare: need at least two reports");
    for (const auto& r : reports)
        require(r.dataset_id == reports[0].dataset_id, ErrorKind::invalid_argument,
                "compare: reports target different datasets");
    for (const auto& r : reports)
        require(r.rows.size() == reports[0].rows.size(), ErrorKind::invalid_argument,
                "compare: reports have different row counts");

    std::string out = "tsplab-compare 1\n";
    out += "dataset " + reports[0].dataset_id + "\n";
    out += "configs " + std::to_string(reports.size()) + "\n";
    for (std::size_t i = 0; i < reports.size(); ++i)
        out += "config " + std::to_string(i) + " " + reports[i].config_id + "\n";

    // lower-is-better metrics; "better" marks the winning config or tie.
    auto metric_line = [&](const std::string& name,
                           const std::function<std::optional<double>(const EvalReport&)>& get) {
        std::string line = "metric " + name;
        std::optional<double> best;
        std::size_t best_idx = 0;
        bool tie = false, any = false;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            auto v = get(reports[i]);
            line += " " + fmt_opt(v);
            if (!v) continue;
            any = true;
            if (!best || *v < *best) {
                best = *v;
                best_idx = i;
                tie = false;
            } else if (*v == *best) {
                tie = true;
            }
        }
        line += any ? (tie ? " better=tie" : " better=" + std::to_string(best_idx)) : " better=-";
        out += line + "\n";
    };
    metric_line("mean_gap_bp", [](const EvalReport& r) { return r.mean_gap_bp; });
    metric_line("cand_missed_fraction", [](const EvalReport& r) { return r.cand_missed_fraction; });
    metric_line("cand_avg_rank", [](const EvalReport& r) { return r.cand_avg_rank; });
    bool all_timing = std::all_of(reports.begin(), reports.end(),
                                  [](const EvalReport& r) { return r.has_timing; });
    if (all_timing)
        metric_line("mean_elapsed_ms",
                    [](const EvalReport& r) { return std::optional<double>(r.mean_elapsed_ms); });

    std::size_t max_trace = 0;
    for (const auto& r : reports) max_trace = std::max(max_trace, r.mean_trace.size());
    for (std::size_t t = 0; t < max_trace; ++t) {
        out += "trace " + std::to_string(t);
        for (const auto& r : reports) {
            if (r.mean_trace.empty()) {
                out += " -";
            } else {
                out += " " + fmt(t < r.mean_trace.size() ? r.mean_trace[t] : r.mean_trace.back());
            }
        }
        out += "\n";
    }
    out += "end\n";
    return out;
}

} // namespace tsplab
