#include "graphclust/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace graphclust {

ContingencyTable ContingencyTable::from_labels(std::span<const int> y, std::span<const int> yhat) {
    if (y.size() != yhat.size()) {
        throw std::invalid_argument("contingency: label vectors differ in length");
    }
    if (y.empty()) throw std::invalid_argument("contingency: empty input");
    int r = 0, s = 0;
    for (int v : y) r = std::max(r, v + 1);
    for (int v : yhat) s = std::max(s, v + 1);
    ContingencyTable t;
    t.rows = static_cast<std::size_t>(r);
    t.cols = static_cast<std::size_t>(s);
    t.counts.assign(t.rows * t.cols, 0);
    t.row_sums.assign(t.rows, 0);
    t.col_sums.assign(t.cols, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        ++t.counts[static_cast<std::size_t>(y[i]) * t.cols + static_cast<std::size_t>(yhat[i])];
        ++t.row_sums[y[i]];
        ++t.col_sums[yhat[i]];
    }
    t.total = static_cast<long long>(y.size());
    return t;
}

namespace {

// Kuhn-Munkres on a rectangular cost matrix (rows <= cols), shortest
// augmenting paths with potentials. Returns the minimum total cost.
double hungarian_min_cost(std::size_t nr, std::size_t nc,
                          const std::vector<double>& cost /* nr*nc */) {
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(nr + 1, 0.0), v(nc + 1, 0.0);
    std::vector<std::size_t> match(nc + 1, 0);  // 1-based row matched to column
    for (std::size_t i = 1; i <= nr; ++i) {
        match[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(nc + 1, INF);
        std::vector<char> used(nc + 1, 0);
        std::vector<std::size_t> way(nc + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = match[j0];
            double delta = INF;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= nc; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * nc + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= nc; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (std::size_t j = 1; j <= nc; ++j) {
        if (match[j] != 0) total += cost[(match[j] - 1) * nc + (j - 1)];
    }
    return total;
}

}  // namespace

double accuracy_matched(std::span<const int> y, const Partition& yhat, AccuracyMode mode) {
    if (y.size() != yhat.size() || y.empty()) {
        throw std::invalid_argument("accuracy: empty input or length mismatch");
    }
    const ContingencyTable t = ContingencyTable::from_labels(y, yhat.assignment);
    if (mode == AccuracyMode::majority) {
        long long hit = 0;
        for (std::size_t j = 0; j < t.cols; ++j) {
            long long best = 0;
            for (std::size_t i = 0; i < t.rows; ++i) best = std::max(best, t.at(i, j));
            hit += best;
        }
        return static_cast<double>(hit) / static_cast<double>(t.total);
    }
    // Maximize matched counts == minimize negated counts. Orient so rows is
    // the smaller side; the value equals the zero-padded square formulation.
    std::size_t nr = t.rows, nc = t.cols;
    std::vector<double> cost;
    cost.reserve(nr * nc);
    if (nr <= nc) {
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j)
                cost.push_back(-static_cast<double>(t.at(i, j)));
    } else {
        std::swap(nr, nc);
        for (std::size_t j = 0; j < nr; ++j)
            for (std::size_t i = 0; i < nc; ++i)
                cost.push_back(-static_cast<double>(t.at(i, j)));
    }
    const double matched = -hungarian_min_cost(nr, nc, cost);
    return matched / static_cast<double>(t.total);
}

double nmi(std::span<const int> y, const Partition& yhat, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (y.size() != yhat.size() || y.empty()) {
        throw std::invalid_argument("nmi: empty input or length mismatch");
    }
    const ContingencyTable t = ContingencyTable::from_labels(y, yhat.assignment);
    const double n = static_cast<double>(t.total);
    double hy = 0.0, hc = 0.0, mi = 0.0;
    for (std::size_t i = 0; i < t.rows; ++i) {
        if (t.row_sums[i] == 0) continue;
        const double p = static_cast<double>(t.row_sums[i]) / n;
        hy -= p * std::log(p);
    }
    for (std::size_t j = 0; j < t.cols; ++j) {
        if (t.col_sums[j] == 0) continue;
        const double p = static_cast<double>(t.col_sums[j]) / n;
        hc -= p * std::log(p);
    }
    for (std::size_t i = 0; i < t.rows; ++i) {
        for (std::size_t j = 0; j < t.cols; ++j) {
            const long long c = t.at(i, j);
            if (c == 0) continue;
            const double pij = static_cast<double>(c) / n;
            mi += pij * std::log(pij * n * n /
                                 (static_cast<double>(t.row_sums[i]) *
                                  static_cast<double>(t.col_sums[j])));
        }
    }
    if (hy <= 0.0 || hc <= 0.0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return mi / std::sqrt(hy * hc);
}

double ari(std::span<const int> y, const Partition& yhat, bool* degenerate) {
    if (degenerate) *degenerate = false;
    if (y.size() != yhat.size() || y.size() < 2) {
        throw std::invalid_argument("ari: needs at least 2 elements and equal lengths");
    }
    const ContingencyTable t = ContingencyTable::from_labels(y, yhat.assignment);
    auto choose2 = [](long long x) { return 0.5 * static_cast<double>(x) * (x - 1); };
    double a = 0.0, b = 0.0, c = 0.0;
    for (long long r : t.row_sums) a += choose2(r);
    for (long long s : t.col_sums) b += choose2(s);
    for (long long v : t.counts) c += choose2(v);
    const double pairs = choose2(t.total);
    const double ei = a * b / pairs;
    const double denom = 0.5 * (a + b) - ei;
    if (std::fabs(denom) < 1e-12) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return (c - ei) / denom;
}

double modularity(const Graph& g, const Partition& p) {
    const double m = static_cast<double>(g.num_edges());
    if (m == 0.0) throw std::domain_error("modularity: graph has no edges");
    std::vector<double> internal(p.num_clusters, 0.0), vol(p.num_clusters, 0.0);
    for (const Edge& e : g.edges()) {
        if (p.assignment[e.u] == p.assignment[e.v]) internal[p.assignment[e.u]] += 1.0;
    }
    for (int i = 0; i < g.num_nodes(); ++i) vol[p.assignment[i]] += g.degree(i);
    double q = 0.0;
    for (int c = 0; c < p.num_clusters; ++c) {
        const double frac = vol[c] / (2.0 * m);
        q += internal[c] / m - frac * frac;
    }
    return q;
}

namespace {

std::vector<char> cluster_mask(const Graph& g, std::span<const int> cluster, const char* op) {
    if (cluster.empty()) throw std::invalid_argument(std::string(op) + ": empty cluster");
    std::vector<char> in(g.num_nodes(), 0);
    std::size_t distinct = 0;
    for (int v : cluster) {
        if (v < 0 || v >= g.num_nodes()) {
            throw std::invalid_argument(std::string(op) + ": node id out of range");
        }
        if (!in[v]) {
            in[v] = 1;
            ++distinct;
        }
    }
    if (distinct == static_cast<std::size_t>(g.num_nodes())) {
        throw std::invalid_argument(std::string(op) + ": cluster equals the whole node set");
    }
    return in;
}

}  // namespace

double cut_weight(const Graph& g, std::span<const int> cluster) {
    const auto in = cluster_mask(g, cluster, "cut");
    double cut = 0.0;
    for (const Edge& e : g.edges()) {
        if (in[e.u] != in[e.v]) cut += e.w;
    }
    return cut;
}

double volume(const Graph& g, std::span<const int> cluster) {
    const auto in = cluster_mask(g, cluster, "volume");
    double vol = 0.0;
    for (int v = 0; v < g.num_nodes(); ++v)
        if (in[v]) vol += g.weighted_degree(v);
    return vol;
}

double conductance(const Graph& g, std::span<const int> cluster) {
    const auto in = cluster_mask(g, cluster, "conductance");
    double cut = 0.0, vol_in = 0.0, vol_out = 0.0;
    for (const Edge& e : g.edges()) {
        if (in[e.u] != in[e.v]) cut += e.w;
    }
    for (int v = 0; v < g.num_nodes(); ++v) {
        (in[v] ? vol_in : vol_out) += g.weighted_degree(v);
    }
    if (cut == 0.0) return 0.0;
    return cut / std::min(vol_in, vol_out);
}

double internal_density(const Graph& g, const Partition& p, bool* degenerate) {
    if (degenerate) *degenerate = false;
    std::vector<long long> internal(p.num_clusters, 0), size(p.num_clusters, 0);
    for (const Edge& e : g.edges()) {
        if (p.assignment[e.u] == p.assignment[e.v]) ++internal[p.assignment[e.u]];
    }
    for (int v = 0; v < g.num_nodes(); ++v) ++size[p.assignment[v]];
    double num = 0.0, den = 0.0;
    for (int c = 0; c < p.num_clusters; ++c) {
        if (size[c] == 0) continue;
        double rho = 0.0;
        if (size[c] >= 2) {
            rho = static_cast<double>(internal[c]) /
                  (0.5 * static_cast<double>(size[c]) * static_cast<double>(size[c] - 1));
        } else if (degenerate) {
            *degenerate = true;
        }
        num += static_cast<double>(size[c]) * rho;
        den += static_cast<double>(size[c]);
    }
    return den > 0.0 ? num / den : 0.0;
}

const std::vector<std::string>& MetricsReport::csv_columns() {
    static const std::vector<std::string> cols = {
        "algorithm", "dataset",    "seed",             "acc",
        "acc_maj",   "nmi",        "ari",              "modularity",
        "conductance_mean",        "internal_density", "wall_ms"};
    return cols;
}

std::string MetricsReport::csv_header() {
    std::string h;
    for (const auto& c : csv_columns()) {
        if (!h.empty()) h += ',';
        h += c;
    }
    return h;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::string MetricsReport::to_csv_row() const {
    std::string row = algorithm + ',' + dataset + ',' + std::to_string(seed);
    for (std::size_t i = 3; i + 1 < csv_columns().size(); ++i) {
        const auto& key = csv_columns()[i];
        auto it = entries.find(key);
        row += ',';
        row += (it == entries.end()) ? "nan" : format_double(it->second);
    }
    row += ',' + format_double(wall_ms);
    return row;
}

std::string MetricsReport::to_json() const {
    nlohmann::ordered_json j;
    j["algorithm"] = algorithm;
    j["dataset"] = dataset;
    j["seed"] = seed;
    for (std::size_t i = 3; i + 1 < csv_columns().size(); ++i) {
        const auto& key = csv_columns()[i];
        auto it = entries.find(key);
        j[key] = (it == entries.end()) ? std::numeric_limits<double>::quiet_NaN() : it->second;
    }
    j["wall_ms"] = wall_ms;
    if (!flags.empty()) j["flags"] = flags;
    return j.dump();
}

MetricsReport evaluate_partition(const Graph& g, const Partition& p, std::span<const int> labels,
                                 const std::string& algorithm, const std::string& dataset,
                                 std::uint64_t seed, double wall_ms) {
    MetricsReport r;
    r.algorithm = algorithm;
    r.dataset = dataset;
    r.seed = seed;
    r.wall_ms = wall_ms;
    bool flag = false;
    r.entries["acc"] = accuracy_matched(labels, p, AccuracyMode::assignment);
    r.entries["acc_maj"] = accuracy_matched(labels, p, AccuracyMode::majority);
    r.entries["nmi"] = nmi(labels, p, &flag);
    if (flag) r.flags.push_back("nmi_degenerate");
    r.entries["ari"] = ari(labels, p, &flag);
    if (flag) r.flags.push_back("ari_degenerate");
    r.entries["modularity"] = g.num_edges() > 0 ? modularity(g, p) : 0.0;
    bool dens_flag = false;
    r.entries["internal_density"] = internal_density(g, p, &dens_flag);
    if (dens_flag) r.flags.push_back("density_has_small_clusters");

    // Mean conductance over clusters that are proper subsets of V.
    double cond_sum = 0.0;
    int cond_count = 0;
    const auto clusters = p.clusters();
    for (const auto& c : clusters) {
        if (c.empty() || c.size() == static_cast<std::size_t>(g.num_nodes())) continue;
        cond_sum += conductance(g, c);
        ++cond_count;
    }
    if (cond_count == 0) r.flags.push_back("conductance_degenerate");
    r.entries["conductance_mean"] = cond_count > 0 ? cond_sum / cond_count : 0.0;
    return r;
}

}  // namespace graphclust
