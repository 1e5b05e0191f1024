#include "tsplab/instance.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <sstream>

namespace tsplab {

namespace {

constexpr double kClusterSigma = 0.05;
constexpr int kTsplibMaxNodes = 10000;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Point sample_clustered_point(const std::vector<Point>& centers, Rng& rng) {
    const Point& c = centers[rng.uniform_u64(centers.size())];
    for (;;) {
        double x = rng.gaussian(c.x, kClusterSigma);
        double y = rng.gaussian(c.y, kClusterSigma);
        if (x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0) return {x, y};
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

const char* metric_name(Metric m) {
    switch (m) {
        case Metric::continuous_euclidean: return "continuous-euclidean";
        case Metric::tsplib_rounded_euclidean: return "tsplib-rounded-euclidean";
    }
    fail(ErrorKind::invalid_argument, "unknown metric");
}

Metric metric_from_name(const std::string& s) {
    if (s == "continuous-euclidean") return Metric::continuous_euclidean;
    if (s == "tsplib-rounded-euclidean") return Metric::tsplib_rounded_euclidean;
    fail(ErrorKind::parse_error, "unknown metric name: " + s);
}

double distance(const TspInstance& inst, int i, int j) {
    require(i != j, ErrorKind::invalid_argument, "distance: i == j");
    require(i >= 0 && i < inst.n && j >= 0 && j < inst.n, ErrorKind::invalid_argument,
            "distance: node id out of range");
    double dx = inst.coords[i].x - inst.coords[j].x;
    double dy = inst.coords[i].y - inst.coords[j].y;
    double d = std::sqrt(dx * dx + dy * dy);
    if (inst.metric == Metric::tsplib_rounded_euclidean) return std::floor(d + 0.5);
    return d;
}

TspInstance generate_uniform(int n, std::uint64_t seed) {
    require(n >= 3, ErrorKind::invalid_size, "generate_uniform: n < 3");
    Rng rng(seed);
    TspInstance inst;
    inst.n = n;
    inst.coords.reserve(n);
    for (int i = 0; i < n; ++i) {
        double x = rng.uniform();
        double y = rng.uniform();
        inst.coords.push_back({x, y});
    }
    return inst;
}

TspInstance generate_clustered(int n, int clusters, std::uint64_t seed) {
    require(clusters >= 3 && clusters <= 8, ErrorKind::invalid_argument,
            "generate_clustered: clusters must be in [3, 8]");
    require(n >= clusters, ErrorKind::invalid_size, "generate_clustered: n < clusters");
    Rng rng(seed);
    TspInstance inst;
    inst.n = n;
    std::vector<Point> centers(clusters);
    for (auto& c : centers) {
        c.x = rng.uniform();
        c.y = rng.uniform();
    }
    inst.coords.reserve(n);
    for (int i = 0; i < n; ++i) inst.coords.push_back(sample_clustered_point(centers, rng));
    return inst;
}

TspInstance generate_mixed(int n, std::uint64_t seed) {
    require(n >= 6, ErrorKind::invalid_size, "generate_mixed: n < 6");
    Rng rng(seed);
    TspInstance inst;
    inst.n = n;
    int n_uniform = (n + 1) / 2;
    int n_clustered = n / 2;
    std::vector<Point> pts;
    pts.reserve(n);
    for (int i = 0; i < n_uniform; ++i) {
        double x = rng.uniform();
        double y = rng.uniform();
        pts.push_back({x, y});
    }
    int clusters = rng.uniform_int(3, std::min(8, n_clustered));
    std::vector<Point> centers(clusters);
    for (auto& c : centers) {
        c.x = rng.uniform();
        c.y = rng.uniform();
    }
    for (int i = 0; i < n_clustered; ++i) pts.push_back(sample_clustered_point(centers, rng));
    rng.shuffle(pts);
    inst.coords = std::move(pts);
    return inst;
}

TspInstance parse_tsplib(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string type, ewt, name;
    int dimension = -1;
    bool in_coords = false;
    std::vector<bool> seen;
    std::vector<Point> coords;
    int coords_read = 0;

    auto header_value = [](const std::string& l) {
        std::size_t pos = l.find(':');
        return trim(pos == std::string::npos ? std::string() : l.substr(pos + 1));
    };

    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (!in_coords) {
            if (line.rfind("NAME", 0) == 0) {
                name = header_value(line);
            } else if (line.rfind("TYPE", 0) == 0) {
                type = header_value(line);
            } else if (line.rfind("DIMENSION", 0) == 0) {
                try {
                    dimension = std::stoi(header_value(line));
                } catch (const std::exception&) {
                    fail(ErrorKind::parse_error, "tsplib: bad DIMENSION");
                }
            } else if (line.rfind("EDGE_WEIGHT_TYPE", 0) == 0) {
                ewt = header_value(line);
            } else if (line == "NODE_COORD_SECTION") {
                require(type == "TSP", ErrorKind::unsupported_format, "tsplib: TYPE must be TSP");
                require(ewt == "EUC_2D", ErrorKind::unsupported_format,
                        "tsplib: EDGE_WEIGHT_TYPE must be EUC_2D, got '" + ewt + "'");
                require(dimension >= 3, ErrorKind::parse_error, "tsplib: DIMENSION missing or < 3");
                require(dimension <= kTsplibMaxNodes, ErrorKind::unsupported_format,
                        "tsplib: more than 10000 nodes not supported");
                in_coords = true;
                seen.assign(dimension, false);
                coords.assign(dimension, Point{});
            } else if (line.rfind("COMMENT", 0) == 0 || line.rfind("EOF", 0) == 0) {
                // ignored
            } else {
                // unknown header keys are ignored, matching common parsers
            }
        } else {
            if (line == "EOF") break;
            std::istringstream ls(line);
            long id;
            double x, y;
            if (!(ls >> id >> x >> y)) fail(ErrorKind::parse_error, "tsplib: malformed coordinate line: " + line);
            if (id < 1 || id > dimension) fail(ErrorKind::parse_error, "tsplib: node id out of range");
            if (seen[id - 1]) fail(ErrorKind::parse_error, "tsplib: duplicate node id");
            if (!std::isfinite(x) || !std::isfinite(y)) fail(ErrorKind::parse_error, "tsplib: non-finite coordinate");
            seen[id - 1] = true;
            coords[id - 1] = {x, y};
            ++coords_read;
        }
    }
    require(in_coords, ErrorKind::parse_error, "tsplib: NODE_COORD_SECTION missing");
    require(coords_read == dimension, ErrorKind::parse_error, "tsplib: coordinate count != DIMENSION");

    TspInstance inst;
    inst.n = dimension;
    inst.coords = std::move(coords);
    inst.metric = Metric::tsplib_rounded_euclidean;
    inst.name = name;
    return inst;
}

std::string write_tsplib(const TspInstance& inst) {
    std::string out;
    out += "NAME : " + (inst.name.empty() ? std::string("unnamed") : inst.name) + "\n";
    out += "TYPE : TSP\n";
    out += "DIMENSION : " + std::to_string(inst.n) + "\n";
    out += "EDGE_WEIGHT_TYPE : EUC_2D\n";
    out += "NODE_COORD_SECTION\n";
    for (int i = 0; i < inst.n; ++i) {
        out += std::to_string(i + 1) + " " + format_double(inst.coords[i].x) + " " +
               format_double(inst.coords[i].y) + "\n";
    }
    out += "EOF\n";
    return out;
}

Normalized normalize_unit_square(const TspInstance& inst) {
    require(inst.n >= 1, ErrorKind::invalid_size, "normalize: empty instance");
    double xmin = inst.coords[0].x, xmax = xmin, ymin = inst.coords[0].y, ymax = ymin;
    for (const auto& p : inst.coords) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    double span = std::max(xmax - xmin, ymax - ymin);
    require(span > 0.0, ErrorKind::degenerate_instance, "normalize: all points coincident");

    Normalized out;
    out.scale = span;
    out.inst = inst;
    for (auto& p : out.inst.coords) {
        p.x = (p.x - xmin) / span;
        p.y = (p.y - ymin) / span;
    }
    return out;
}

SparseGraph build_sparse_graph(const TspInstance& inst, int gamma) {
    require(gamma >= 1, ErrorKind::invalid_argument, "build_sparse_graph: gamma < 1");
    require(gamma < inst.n, ErrorKind::invalid_argument, "build_sparse_graph: gamma >= n");

    SparseGraph g;
    g.n = inst.n;
    g.gamma = gamma;
    g.neighbors.resize(static_cast<std::size_t>(inst.n) * gamma);
    g.dist.resize(g.neighbors.size());
    g.reverse_slot.assign(g.neighbors.size(), -1);

    std::vector<std::pair<double, int>> cand(inst.n - 1);
    for (int i = 0; i < inst.n; ++i) {
        int m = 0;
        for (int j = 0; j < inst.n; ++j) {
            if (j == i) continue;
            cand[m++] = {distance(inst, i, j), j};
        }
        std::partial_sort(cand.begin(), cand.begin() + gamma, cand.end());
        for (int s = 0; s < gamma; ++s) {
            g.neighbors[g.slot(i, s)] = cand[s].second;
            g.dist[g.slot(i, s)] = cand[s].first;
        }
    }
    // pair.second tie-break already orders equal distances by ascending id
    for (int i = 0; i < inst.n; ++i) {
        for (int s = 0; s < gamma; ++s) {
            int j = g.neighbor(i, s);
            for (int t = 0; t < gamma; ++t) {
                if (g.neighbor(j, t) == i) {
                    g.reverse_slot[g.slot(i, s)] = g.slot(j, t);
                    break;
                }
            }
        }
    }
    return g;
}

std::string write_instance(const TspInstance& inst) {
    std::string out = "tsp " + std::to_string(inst.n) + " " + metric_name(inst.metric) + " " +
                      (inst.name.empty() ? std::string("-") : inst.name) + "\n";
    for (const auto& p : inst.coords) out += format_double(p.x) + " " + format_double(p.y) + "\n";
    return out;
}

TspInstance read_instance(const std::string& text) {
    std::istringstream in(text);
    std::string tag, metric, name;
    int n = 0;
    if (!(in >> tag >> n >> metric) || tag != "tsp") fail(ErrorKind::parse_error, "instance: bad header");
    std::getline(in, name);
    name = trim(name);
    require(n >= 3, ErrorKind::parse_error, "instance: n < 3");

    TspInstance inst;
    inst.n = n;
    inst.metric = metric_from_name(metric);
    inst.name = name == "-" ? std::string() : name;
    inst.coords.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!(in >> inst.coords[i].x >> inst.coords[i].y))
            fail(ErrorKind::parse_error, "instance: malformed coordinate line");
        if (!std::isfinite(inst.coords[i].x) || !std::isfinite(inst.coords[i].y))
            fail(ErrorKind::parse_error, "instance: non-finite coordinate");
    }
    return inst;
}

} // namespace tsplab
