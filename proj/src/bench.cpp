#include "graphclust/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "graphclust/deep.hpp"
#include "graphclust/leiden.hpp"
#include "graphclust/mcl.hpp"
#include "graphclust/sbm.hpp"
#include "graphclust/spectral.hpp"

namespace graphclust {

const std::vector<std::string> kKnownAlgorithms = {"spectral", "sbm", "mcl", "leiden",
                                                   "gae",      "arga", "mvgrl"};

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

double opt_double(const std::map<std::string, std::string>& opts, const std::string& key,
                  double fallback) {
    auto it = opts.find(key);
    if (it == opts.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ValidationError("option '" + key + "': cannot parse '" + it->second +
                              "' as a number");
    }
}

long opt_int(const std::map<std::string, std::string>& opts, const std::string& key,
             long fallback) {
    auto it = opts.find(key);
    if (it == opts.end()) return fallback;
    try {
        return std::stol(it->second);
    } catch (const std::exception&) {
        throw ValidationError("option '" + key + "': cannot parse '" + it->second +
                              "' as an integer");
    }
}

bool opt_bool(const std::map<std::string, std::string>& opts, const std::string& key,
              bool fallback) {
    auto it = opts.find(key);
    if (it == opts.end()) return fallback;
    const std::string v = it->second;
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    throw ValidationError("option '" + key + "': expected a boolean, got '" + v + "'");
}

std::string opt_str(const std::map<std::string, std::string>& opts, const std::string& key,
                    const std::string& fallback) {
    auto it = opts.find(key);
    return it == opts.end() ? fallback : it->second;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

BenchPlan parse_plan_text(const std::string& text, const std::string& origin) {
    BenchPlan plan;
    std::map<std::string, std::map<std::string, std::string>> sections;
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) {
                throw ValidationError(origin + ":" + std::to_string(lineno) + ": empty section");
            }
            sections[section];
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + t + "'");
        }
        if (section.empty()) {
            throw ValidationError(origin + ":" + std::to_string(lineno) +
                                  ": key outside any [section]");
        }
        sections[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }

    auto bench = sections.find("bench");
    if (bench == sections.end()) {
        throw ValidationError(origin + ": missing [bench] section");
    }
    plan.datasets = split_ws(opt_str(bench->second, "datasets", ""));
    for (const std::string& a : split_ws(opt_str(bench->second, "algorithms", ""))) {
        AlgoConfig cfg;
        cfg.algorithm = a;
        auto it = sections.find(a);
        if (it != sections.end()) cfg.options = it->second;
        plan.algorithms.push_back(std::move(cfg));
    }
    for (const std::string& s : split_ws(opt_str(bench->second, "seeds", "0"))) {
        try {
            plan.seeds.push_back(std::stoull(s));
        } catch (const std::exception&) {
            throw ValidationError(origin + ": bad seed '" + s + "'");
        }
    }
    plan.output = opt_str(bench->second, "output", "bench_out");
    plan.jobs = static_cast<int>(opt_int(bench->second, "jobs", 1));
    return plan;
}

BenchPlan parse_plan(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open plan file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_plan_text(ss.str(), path);
}

void validate_plan(const BenchPlan& plan) {
    if (plan.datasets.empty()) throw ValidationError("plan: no datasets listed");
    if (plan.algorithms.empty()) throw ValidationError("plan: no algorithms listed");
    if (plan.seeds.empty()) throw ValidationError("plan: no seeds listed");
    if (plan.jobs < 1) throw ValidationError("plan: jobs must be >= 1");
    for (const AlgoConfig& cfg : plan.algorithms) {
        if (std::find(kKnownAlgorithms.begin(), kKnownAlgorithms.end(), cfg.algorithm) ==
            kKnownAlgorithms.end()) {
            std::string known;
            for (const auto& k : kKnownAlgorithms) known += (known.empty() ? "" : ", ") + k;
            throw ValidationError("plan: unknown algorithm '" + cfg.algorithm + "' (known: " +
                                  known + ")");
        }
    }
}

namespace {

void write_chain_trace(const AlgoConfig& cfg, const std::vector<double>& trace,
                       const std::vector<int>& occupied) {
    const std::string path = opt_str(cfg.options, "trace", "");
    if (path.empty()) return;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write chain trace: " + path);
    f << "iteration,log_posterior,occupied_blocks\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        f << i << ',' << format_double(trace[i]) << ',' << occupied[i] << '\n';
    }
}

DeepHyper hyper_from_options(const AlgoConfig& cfg, std::uint64_t seed) {
    DeepHyper hyper = cfg.algorithm == "mvgrl" ? DeepHyper::mvgrl() : DeepHyper::gae();
    hyper.lr = opt_double(cfg.options, "lr", hyper.lr);
    hyper.latent_dim = static_cast<int>(opt_int(cfg.options, "latent-dim", hyper.latent_dim));
    hyper.hidden_dim = static_cast<int>(opt_int(cfg.options, "hidden-dim", hyper.hidden_dim));
    hyper.epochs = static_cast<int>(opt_int(cfg.options, "epochs", hyper.epochs));
    hyper.gcn_layers = static_cast<int>(opt_int(cfg.options, "gcn-layers", hyper.gcn_layers));
    hyper.disc_iters = static_cast<int>(opt_int(cfg.options, "disc-iters", hyper.disc_iters));
    hyper.disc_hidden = static_cast<int>(opt_int(cfg.options, "disc-hidden", hyper.disc_hidden));
    hyper.ppr_alpha = opt_double(cfg.options, "ppr-alpha", hyper.ppr_alpha);
    hyper.normalize_features =
        opt_bool(cfg.options, "normalize-features", hyper.normalize_features);
    hyper.pos_weight = opt_bool(cfg.options, "pos-weight", hyper.pos_weight);
    hyper.saturating_generator =
        opt_bool(cfg.options, "saturating-generator", hyper.saturating_generator);
    hyper.kmeans_restarts =
        static_cast<int>(opt_int(cfg.options, "kmeans-restarts", hyper.kmeans_restarts));
    hyper.seed = seed;
    return hyper;
}

}  // namespace

RunOutcome run_single(const AlgoConfig& config, const Dataset& ds, std::uint64_t seed) {
    RunOutcome outcome;
    const auto start = std::chrono::steady_clock::now();
    Partition partition;
    std::vector<std::string> extra_flags;
    try {
        if (config.algorithm == "spectral") {
            SpectralOptions opts;
            opts.normalize_rows = opt_bool(config.options, "normalize-rows", false);
            opts.component_fallback = opt_bool(config.options, "component-fallback", true);
            const std::size_t k = static_cast<std::size_t>(
                opt_int(config.options, "k", ds.num_classes));
            partition = spectral_clustering(ds.graph, k, seed, opts);
        } else if (config.algorithm == "sbm") {
            const int k = static_cast<int>(opt_int(config.options, "k", ds.num_classes));
            const std::string method = opt_str(config.options, "method", "em");
            if (method == "em") {
                auto res = sbm_em(ds.graph, k, seed,
                                  static_cast<int>(opt_int(config.options, "max-iters", 100)),
                                  opt_double(config.options, "tol", 1e-6),
                                  static_cast<int>(opt_int(config.options, "restarts", 5)));
                partition = Partition::from_assignment(res.params.memberships).compacted();
                if (!res.converged) extra_flags.push_back("em_not_converged");
            } else if (method == "mh") {
                const int iters = static_cast<int>(opt_int(config.options, "iters", 20000));
                const int burn = static_cast<int>(opt_int(config.options, "burn-in", iters / 4));
                auto res = sbm_mh(ds.graph, k, SbmPriors::uniform(k), iters, burn, seed,
                                  std::max(1, iters / 100));
                partition = res.map_partition;
                write_chain_trace(config, res.trace, res.occupied_trace);
            } else if (method == "dcsbm-mh") {
                const int iters = static_cast<int>(opt_int(config.options, "iters", 50000));
                const int burn = static_cast<int>(opt_int(config.options, "burn-in", iters / 4));
                auto res = dcsbm_mh(ds.graph, k, iters, burn, seed);
                partition = res.partition;
                write_chain_trace(config, res.trace, res.occupied_trace);
            } else {
                throw ValidationError("sbm: unknown method '" + method +
                                      "' (known: em, mh, dcsbm-mh)");
            }
        } else if (config.algorithm == "mcl") {
            MclConfig cfg;
            cfg.expansion = static_cast<int>(opt_int(config.options, "expansion", 2));
            cfg.inflation = opt_double(config.options, "inflation", 2.0);
            cfg.epsilon = opt_double(config.options, "eps", 1e-4);
            cfg.max_rounds = static_cast<int>(opt_int(config.options, "max-rounds", 100));
            cfg.prune_threshold = opt_double(config.options, "prune", 1e-8);
            cfg.add_self_loops = opt_bool(config.options, "self-loops", true);
            auto res = mcl(ds.graph, cfg);
            partition = res.partition;
            if (!res.converged) extra_flags.push_back("mcl_not_converged");
        } else if (config.algorithm == "leiden") {
            QualityObjective obj;
            const std::string kind = opt_str(config.options, "objective", "modularity");
            if (kind == "modularity") {
                obj = QualityObjective::modularity();
            } else if (kind == "cpm") {
                obj = QualityObjective::cpm(opt_double(config.options, "gamma", 1.0));
            } else {
                throw ValidationError("leiden: unknown objective '" + kind + "'");
            }
            auto res = leiden(ds.graph, obj, seed,
                              static_cast<int>(opt_int(config.options, "max-levels", 20)),
                              opt_double(config.options, "theta", 0.01));
            partition = res.partition;
        } else if (config.algorithm == "gae" || config.algorithm == "arga" ||
                   config.algorithm == "mvgrl") {
            DeepHyper hyper = hyper_from_options(config, seed);
            const std::size_t k = static_cast<std::size_t>(
                opt_int(config.options, "k", ds.num_classes));
            DenseMatrix embeddings;
            if (config.algorithm == "gae") {
                embeddings = embed(gae_train(ds, hyper), ds);
            } else if (config.algorithm == "arga") {
                embeddings = embed(arga_train(ds, hyper), ds);
            } else {
                embeddings = embed(mvgrl_train(ds, hyper), ds);
            }
            partition = encode_and_cluster(embeddings, k, seed, hyper.kmeans_restarts).partition;
        } else {
            throw ValidationError("unknown algorithm '" + config.algorithm + "'");
        }
    } catch (const std::exception& ex) {
        outcome.failed = true;
        outcome.error = ex.what();
        outcome.report.algorithm = config.algorithm;
        outcome.report.dataset = ds.name;
        outcome.report.seed = seed;
        return outcome;
    }
    const auto stop = std::chrono::steady_clock::now();
    const double wall_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(stop - start)
            .count();
    outcome.report = evaluate_partition(ds.graph, partition, ds.labels, config.algorithm, ds.name,
                                        seed, wall_ms);
    for (auto& f : extra_flags) outcome.report.flags.push_back(std::move(f));
    return outcome;
}

namespace {

// Best-of-seeds per metric; wall_ms aggregated as the mean.
MetricsReport summarize(const std::vector<const MetricsReport*>& runs) {
    MetricsReport best = *runs.front();
    best.flags.clear();
    double wall = 0.0;
    for (const MetricsReport* r : runs) {
        wall += r->wall_ms;
        for (const auto& [key, value] : r->entries) {
            auto it = best.entries.find(key);
            if (it == best.entries.end() || value > it->second) best.entries[key] = value;
        }
    }
    best.wall_ms = wall / static_cast<double>(runs.size());
    return best;
}

std::string summary_csv_row(const MetricsReport& r) {
    std::string row = r.algorithm + ',' + r.dataset + ",best";
    const auto& cols = MetricsReport::csv_columns();
    for (std::size_t i = 3; i + 1 < cols.size(); ++i) {
        auto it = r.entries.find(cols[i]);
        row += ',';
        row += it == r.entries.end() ? "nan" : format_double(it->second);
    }
    row += ',' + format_double(r.wall_ms);
    return row;
}

}  // namespace

BenchResult run_bench(const BenchPlan& plan, const DatasetResolver& resolver) {
    validate_plan(plan);

    // Resolve every dataset once, before any run.
    std::vector<Dataset> datasets;
    datasets.reserve(plan.datasets.size());
    for (const std::string& name : plan.datasets) datasets.push_back(resolver(name));

    struct Cell {
        std::size_t dataset;
        std::size_t algorithm;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (std::size_t a = 0; a < plan.algorithms.size(); ++a)
            for (std::uint64_t seed : plan.seeds) cells.push_back({d, a, seed});

    BenchResult result;
    result.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) break;
            const Cell& c = cells[i];
            result.rows[i] = run_single(plan.algorithms[c.algorithm], datasets[c.dataset], c.seed);
        }
    };
    const int jobs = std::max(1, plan.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const RunOutcome& row : result.rows)
        if (row.failed) ++result.failures;

    // CSV: raw rows in plan order, then summary rows.
    std::string csv = MetricsReport::csv_header() + '\n';
    for (const RunOutcome& row : result.rows) {
        if (row.failed) {
            csv += row.report.algorithm + ',' + row.report.dataset + ',' +
                   std::to_string(row.report.seed) + ",failed,failed,failed,failed,failed,failed," +
                   "failed,0\n";
        } else {
            csv += row.report.to_csv_row() + '\n';
        }
    }
    nlohmann::ordered_json jrows = nlohmann::ordered_json::array();
    std::vector<MetricsReport> summaries;
    for (std::size_t d = 0; d < datasets.size(); ++d) {
        for (std::size_t a = 0; a < plan.algorithms.size(); ++a) {
            std::vector<const MetricsReport*> runs;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i].dataset == d && cells[i].algorithm == a && !result.rows[i].failed)
                    runs.push_back(&result.rows[i].report);
            }
            if (!runs.empty()) summaries.push_back(summarize(runs));
        }
    }
    for (const MetricsReport& s : summaries) csv += summary_csv_row(s) + '\n';
    result.csv = std::move(csv);

    for (const RunOutcome& row : result.rows) {
        if (row.failed) {
            nlohmann::ordered_json j;
            j["algorithm"] = row.report.algorithm;
            j["dataset"] = row.report.dataset;
            j["seed"] = row.report.seed;
            j["failed"] = true;
            j["error"] = row.error;
            jrows.push_back(std::move(j));
        } else {
            jrows.push_back(nlohmann::ordered_json::parse(row.report.to_json()));
        }
    }
    for (const MetricsReport& s : summaries) {
        auto j = nlohmann::ordered_json::parse(s.to_json());
        j["seed"] = "best";
        jrows.push_back(std::move(j));
    }
    result.json = jrows.dump(2);

    // Aligned text table over the summary rows.
    const std::vector<std::string> cols = {"algorithm", "dataset",    "acc",
                                           "acc_maj",   "nmi",        "ari",
                                           "modularity", "conductance_mean", "internal_density"};
    std::vector<std::vector<std::string>> table;
    table.push_back(cols);
    for (const MetricsReport& s : summaries) {
        std::vector<std::string> row = {s.algorithm, s.dataset};
        for (std::size_t c = 2; c < cols.size(); ++c) {
            auto it = s.entries.find(cols[c]);
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3f", it == s.entries.end() ? 0.0 : it->second);
            row.push_back(buf);
        }
        table.push_back(std::move(row));
    }
    std::vector<std::size_t> width(cols.size(), 0);
    for (const auto& row : table)
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    std::string text;
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            text += row[c];
            text.append(width[c] - row[c].size() + 2, ' ');
        }
        text += '\n';
    }
    result.text_table = std::move(text);
    return result;
}

}  // namespace graphclust
