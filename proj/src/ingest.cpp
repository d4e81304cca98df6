#include "graphclust/ingest.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace graphclust {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double parse_real(const std::string& tok, const std::string& file, std::size_t lineno) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw std::runtime_error(file + ":" + std::to_string(lineno) + ": malformed number '" +
                                 tok + "'");
    }
    return v;
}

long parse_int(const std::string& tok, const std::string& file, std::size_t lineno) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == tok.c_str() || *end != '\0') {
        throw std::runtime_error(file + ":" + std::to_string(lineno) + ": malformed integer '" +
                                 tok + "'");
    }
    return v;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    return f;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

void validate(Dataset& ds) {
    const int n = ds.graph.num_nodes();
    if (n == 0) throw std::runtime_error("empty dataset");
    if (ds.features.rows() != static_cast<std::size_t>(n)) {
        throw std::runtime_error("dataset: feature rows (" + std::to_string(ds.features.rows()) +
                                 ") != node count (" + std::to_string(n) + ")");
    }
    if (ds.labels.size() != static_cast<std::size_t>(n)) {
        throw std::runtime_error("dataset: label count != node count");
    }
    int max_label = -1;
    for (int l : ds.labels) {
        if (l < 0) throw std::runtime_error("dataset: negative class id");
        max_label = std::max(max_label, l);
    }
    ds.num_classes = max_label + 1;
}

}  // namespace

Dataset parse_content_format(const std::string& content_path, const std::string& cites_path,
                             const std::string& name) {
    std::ifstream content = open_or_throw(content_path);
    std::unordered_map<std::string, int> id_map;
    std::unordered_map<std::string, int> class_map;
    std::vector<std::vector<double>> feats;
    std::vector<int> labels;
    std::string line;
    std::size_t lineno = 0;
    std::size_t d = 0;
    while (std::getline(content, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() < 2) {
            throw std::runtime_error(content_path + ":" + std::to_string(lineno) +
                                     ": malformed line (need id, features, class)");
        }
        if (feats.empty()) {
            d = toks.size() - 2;
        } else if (toks.size() - 2 != d) {
            throw std::runtime_error(content_path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(d) + " features, got " +
                                     std::to_string(toks.size() - 2));
        }
        if (!id_map.emplace(toks.front(), static_cast<int>(feats.size())).second) {
            throw std::runtime_error(content_path + ":" + std::to_string(lineno) +
                                     ": duplicate node id '" + toks.front() + "'");
        }
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = parse_real(toks[j + 1], content_path, lineno);
        feats.push_back(std::move(row));
        auto [it, inserted] =
            class_map.emplace(toks.back(), static_cast<int>(class_map.size()));
        (void)inserted;
        labels.push_back(it->second);
    }
    const int n = static_cast<int>(feats.size());
    if (n == 0) throw std::runtime_error(content_path + ": empty dataset");

    std::ifstream cites = open_or_throw(cites_path);
    std::vector<Edge> edges;
    IngestStats stats;
    lineno = 0;
    while (std::getline(cites, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() != 2) {
            throw std::runtime_error(cites_path + ":" + std::to_string(lineno) +
                                     ": expected two node ids");
        }
        auto a = id_map.find(toks[0]);
        auto b = id_map.find(toks[1]);
        if (a == id_map.end() || b == id_map.end()) {
            ++stats.dangling_citations;
            continue;
        }
        edges.push_back({a->second, b->second, 1.0});
    }

    Dataset ds;
    ds.graph = Graph::from_edges(edges, n);
    ds.features = DenseMatrix(n, d);
    for (int i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = feats[i][j];
    ds.labels = std::move(labels);
    ds.name = name.empty() ? std::filesystem::path(content_path).stem().string() : name;
    stats.duplicate_edges = ds.graph.duplicate_edges_dropped();
    stats.self_loops = ds.graph.self_loops_dropped();
    ds.stats = stats;
    validate(ds);
    return ds;
}

Dataset load_canonical(const std::string& path) {
    std::ifstream f = open_or_throw(path);
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(f, line)) throw std::runtime_error(path + ": empty file");
    ++lineno;
    auto head = split_ws(line);
    if (head.size() != 5 || head[0] != "GCT1") {
        throw std::runtime_error(path + ": not a GCT1 file (header version mismatch)");
    }
    const long n = parse_int(head[1], path, 1);
    const long m = parse_int(head[2], path, 1);
    const long d = parse_int(head[3], path, 1);
    const long k = parse_int(head[4], path, 1);
    if (n <= 0) throw std::runtime_error(path + ": empty dataset");
    if (m < 0 || d < 0 || k <= 0) throw std::runtime_error(path + ": invalid header counts");

    Dataset ds;
    ds.features = DenseMatrix(n, d);
    long features_read = 0;
    bool labels_read = false;
    std::vector<Edge> edges;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line[0] == '#') continue;
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (features_read < n) {
            if (static_cast<long>(toks.size()) != d) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": dimension mismatch, expected " + std::to_string(d) +
                                         " features, got " + std::to_string(toks.size()));
            }
            for (long j = 0; j < d; ++j)
                ds.features(features_read, j) = parse_real(toks[j], path, lineno);
            ++features_read;
        } else if (!labels_read) {
            if (static_cast<long>(toks.size()) != n) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected " + std::to_string(n) + " labels, got " +
                                         std::to_string(toks.size()));
            }
            ds.labels.resize(n);
            for (long i = 0; i < n; ++i) {
                const long l = parse_int(toks[i], path, lineno);
                if (l < 0 || l >= k) {
                    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                             ": label out of range [0," + std::to_string(k) + ")");
                }
                ds.labels[i] = static_cast<int>(l);
            }
            labels_read = true;
        } else {
            if (toks.size() != 3) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected edge line 'u v w'");
            }
            const long u = parse_int(toks[0], path, lineno);
            const long v = parse_int(toks[1], path, lineno);
            if (u < 0 || u >= n || v < 0 || v >= n) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": edge endpoint out of range");
            }
            edges.push_back({static_cast<int>(u), static_cast<int>(v),
                             parse_real(toks[2], path, lineno)});
        }
    }
    if (features_read != n) throw std::runtime_error(path + ": truncated feature section");
    if (!labels_read) throw std::runtime_error(path + ": missing label line");
    if (static_cast<long>(edges.size()) != m) {
        throw std::runtime_error(path + ": edge count mismatch, header says " + std::to_string(m) +
                                 ", found " + std::to_string(edges.size()));
    }
    ds.graph = Graph::from_edges(edges, static_cast<int>(n));
    ds.name = std::filesystem::path(path).stem().string();
    ds.stats.duplicate_edges = ds.graph.duplicate_edges_dropped();
    ds.stats.self_loops = ds.graph.self_loops_dropped();
    validate(ds);
    if (ds.num_classes > k) throw std::runtime_error(path + ": labels exceed declared class count");
    ds.num_classes = static_cast<int>(k);
    return ds;
}

void save_canonical(const Dataset& ds, const std::string& path,
                    const std::vector<std::string>& comments) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write file: " + path);
    const int n = ds.graph.num_nodes();
    f << "GCT1 " << n << ' ' << ds.graph.num_edges() << ' ' << ds.features.cols() << ' '
      << ds.num_classes << '\n';
    for (const auto& c : comments) f << "# " << c << '\n';
    for (int i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < ds.features.cols(); ++j) {
            if (j) f << ' ';
            f << format_real(ds.features(i, j));
        }
        f << '\n';
    }
    for (int i = 0; i < n; ++i) {
        if (i) f << ' ';
        f << ds.labels[i];
    }
    f << '\n';
    for (const Edge& e : ds.graph.edges()) {
        f << e.u << ' ' << e.v << ' ' << format_real(e.w) << '\n';
    }
}

Dataset convert_split_files(const std::string& edges_tsv, const std::string& features_csv,
                            const std::string& labels_csv, const std::string& name) {
    auto split_csv = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : line) {
            if (ch == ',' || ch == '\t' || ch == ';') {
                out.push_back(cur);
                cur.clear();
            } else if (!std::isspace(static_cast<unsigned char>(ch)) || !cur.empty()) {
                cur += ch;
            }
        }
        if (!cur.empty()) out.push_back(cur);
        while (!out.empty() && out.back().empty()) out.pop_back();
        return out;
    };

    std::ifstream ff = open_or_throw(features_csv);
    std::vector<std::vector<double>> feats;
    std::string line;
    std::size_t lineno = 0, d = 0;
    while (std::getline(ff, line)) {
        ++lineno;
        auto toks = split_csv(line);
        if (toks.empty()) continue;
        if (feats.empty()) {
            d = toks.size();
        } else if (toks.size() != d) {
            throw std::runtime_error(features_csv + ":" + std::to_string(lineno) +
                                     ": inconsistent feature count");
        }
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) row[j] = parse_real(toks[j], features_csv, lineno);
        feats.push_back(std::move(row));
    }
    const int n = static_cast<int>(feats.size());
    if (n == 0) throw std::runtime_error(features_csv + ": empty dataset");

    std::ifstream lf = open_or_throw(labels_csv);
    std::vector<int> labels;
    std::unordered_map<std::string, int> class_map;
    lineno = 0;
    while (std::getline(lf, line)) {
        ++lineno;
        auto toks = split_csv(line);
        if (toks.empty()) continue;
        if (toks.size() != 1) {
            throw std::runtime_error(labels_csv + ":" + std::to_string(lineno) +
                                     ": expected one label per line");
        }
        auto [it, ins] = class_map.emplace(toks[0], static_cast<int>(class_map.size()));
        (void)ins;
        labels.push_back(it->second);
    }
    if (static_cast<int>(labels.size()) != n) {
        throw std::runtime_error(labels_csv + ": label count (" + std::to_string(labels.size()) +
                                 ") != feature rows (" + std::to_string(n) + ")");
    }

    std::ifstream ef = open_or_throw(edges_tsv);
    std::vector<Edge> edges;
    lineno = 0;
    while (std::getline(ef, line)) {
        ++lineno;
        auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() != 2 && toks.size() != 3) {
            throw std::runtime_error(edges_tsv + ":" + std::to_string(lineno) +
                                     ": expected 'u v [w]'");
        }
        const long u = parse_int(toks[0], edges_tsv, lineno);
        const long v = parse_int(toks[1], edges_tsv, lineno);
        if (u < 0 || u >= n || v < 0 || v >= n) {
            throw std::runtime_error(edges_tsv + ":" + std::to_string(lineno) +
                                     ": node id out of range [0," + std::to_string(n) + ")");
        }
        const double w = toks.size() == 3 ? parse_real(toks[2], edges_tsv, lineno) : 1.0;
        edges.push_back({static_cast<int>(u), static_cast<int>(v), w});
    }

    Dataset ds;
    ds.graph = Graph::from_edges(edges, n);
    ds.features = DenseMatrix(n, d);
    for (int i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = feats[i][j];
    ds.labels = std::move(labels);
    ds.name = name;
    ds.stats.duplicate_edges = ds.graph.duplicate_edges_dropped();
    ds.stats.self_loops = ds.graph.self_loops_dropped();
    validate(ds);
    return ds;
}

namespace {

std::string data_dir() {
    const char* env = std::getenv("GRAPHCLUST_DATA");
    return env ? std::string(env) : std::string();
}

bool file_exists(const std::string& p) {
    std::error_code ec;
    return std::filesystem::exists(p, ec);
}

}  // namespace

Dataset resolve_dataset(const std::string& name_or_path) {
    static const char* bundled[] = {"cora", "citeseer", "uat"};
    for (const char* b : bundled) {
        if (name_or_path != b) continue;
        const std::string dir = data_dir();
        if (dir.empty()) {
            throw std::runtime_error("dataset '" + name_or_path +
                                     "': GRAPHCLUST_DATA is not set");
        }
        const std::string content = dir + "/" + name_or_path + ".content";
        const std::string cites = dir + "/" + name_or_path + ".cites";
        const std::string gct = dir + "/" + name_or_path + ".gct";
        if (file_exists(content) && file_exists(cites)) {
            return parse_content_format(content, cites, name_or_path);
        }
        if (file_exists(gct)) return load_canonical(gct);
        throw std::runtime_error("dataset '" + name_or_path + "': looked for " + content + " + " +
                                 cites + " or " + gct + ", none found");
    }
    if (!file_exists(name_or_path)) {
        throw std::runtime_error("dataset path not found: " + name_or_path);
    }
    return load_canonical(name_or_path);
}

std::vector<std::string> dataset_status() {
    std::vector<std::string> out;
    const std::string dir = data_dir();
    out.push_back("GRAPHCLUST_DATA = " + (dir.empty() ? std::string("(unset)") : dir));
    for (const char* b : {"cora", "citeseer", "uat"}) {
        std::string status = "missing";
        if (!dir.empty()) {
            const std::string base = dir + "/" + b;
            if (file_exists(base + ".content") && file_exists(base + ".cites")) {
                status = "available (" + base + ".content + .cites)";
            } else if (file_exists(base + ".gct")) {
                status = "available (" + base + ".gct)";
            }
        }
        out.push_back(std::string(b) + ": " + status);
    }
    return out;
}

}  // namespace graphclust
