#include "graphclust/mcl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace graphclust {

namespace {

// Columns stored as sorted (row, value) lists.
using SparseCols = std::vector<std::vector<std::pair<int, double>>>;

SparseCols initial_columns(const Graph& g, bool self_loops) {
    const int n = g.num_nodes();
    SparseCols cols(n);
    for (int u = 0; u < n; ++u) {
        const double deg = g.weighted_degree(u) + (self_loops ? 1.0 : 0.0);
        if (deg <= 0.0) {
            throw std::domain_error("mcl: node " + std::to_string(u) +
                                    " is isolated; enable self-loops or remove it");
        }
        auto& col = cols[u];
        bool placed_self = !self_loops;
        for (const auto& [v, w] : g.neighbors(u)) {
            if (!placed_self && v > u) {
                col.emplace_back(u, 1.0 / deg);
                placed_self = true;
            }
            col.emplace_back(v, w / deg);
        }
        if (!placed_self) col.emplace_back(u, 1.0 / deg);
    }
    return cols;
}

// R = M * M2 column by column: column j of R = sum_k M2[k][j] * col_k(M).
SparseCols multiply(const SparseCols& m, const SparseCols& m2, std::vector<double>& acc,
                    std::vector<int>& touched) {
    const int n = static_cast<int>(m.size());
    SparseCols out(n);
    for (int j = 0; j < n; ++j) {
        touched.clear();
        for (const auto& [k, f] : m2[j]) {
            for (const auto& [row, v] : m[k]) {
                if (acc[row] == 0.0) touched.push_back(row);
                acc[row] += f * v;
            }
        }
        std::sort(touched.begin(), touched.end());
        auto& col = out[j];
        col.reserve(touched.size());
        for (int row : touched) {
            if (acc[row] != 0.0) col.emplace_back(row, acc[row]);
            acc[row] = 0.0;
        }
    }
    return out;
}

void inflate_and_prune(SparseCols& cols, double r, double prune) {
    for (auto& col : cols) {
        double sum = 0.0;
        for (auto& [row, v] : col) {
            v = std::pow(v, r);
            sum += v;
        }
        if (sum <= 0.0) continue;
        for (auto& [row, v] : col) v /= sum;
        if (prune > 0.0) {
            double kept = 0.0;
            std::size_t w = 0;
            for (std::size_t i = 0; i < col.size(); ++i) {
                if (col[i].second >= prune) {
                    col[w++] = col[i];
                    kept += col[i].second;
                }
            }
            col.resize(w);
            if (kept > 0.0) {
                for (auto& [row, v] : col) v /= kept;
            }
        }
    }
}

double max_entry_change(const SparseCols& a, const SparseCols& b) {
    double diff = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const auto& ca = a[j];
        const auto& cb = b[j];
        std::size_t ia = 0, ib = 0;
        while (ia < ca.size() || ib < cb.size()) {
            if (ib == cb.size() || (ia < ca.size() && ca[ia].first < cb[ib].first)) {
                diff = std::max(diff, std::fabs(ca[ia].second));
                ++ia;
            } else if (ia == ca.size() || cb[ib].first < ca[ia].first) {
                diff = std::max(diff, std::fabs(cb[ib].second));
                ++ib;
            } else {
                diff = std::max(diff, std::fabs(ca[ia].second - cb[ib].second));
                ++ia;
                ++ib;
            }
        }
    }
    return diff;
}

}  // namespace

DenseMatrix transition_matrix(const Graph& g, bool add_self_loops) {
    const int n = g.num_nodes();
    DenseMatrix m(n, n);
    for (int u = 0; u < n; ++u) {
        const double deg = g.weighted_degree(u) + (add_self_loops ? 1.0 : 0.0);
        if (deg <= 0.0) {
            throw std::domain_error("transition_matrix: node " + std::to_string(u) +
                                    " is isolated");
        }
        if (add_self_loops) m(u, u) = 1.0 / deg;
        for (const auto& [v, w] : g.neighbors(u)) m(v, u) = w / deg;
    }
    return m;
}

MclResult mcl(const Graph& g, const MclConfig& cfg) {
    if (cfg.expansion < 2) throw std::invalid_argument("mcl: expansion must be >= 2");
    if (cfg.inflation <= 1.0) throw std::invalid_argument("mcl: inflation must be > 1");
    if (cfg.epsilon <= 0.0) throw std::invalid_argument("mcl: epsilon must be > 0");
    if (cfg.max_rounds <= 0) throw std::invalid_argument("mcl: max_rounds must be > 0");
    if (cfg.prune_threshold < 0.0) throw std::invalid_argument("mcl: prune threshold < 0");

    const int n = g.num_nodes();
    MclResult res;
    if (n == 0) {
        res.converged = true;
        return res;
    }

    SparseCols p = initial_columns(g, cfg.add_self_loops);
    std::vector<double> acc(n, 0.0);
    std::vector<int> touched;
    touched.reserve(n);

    for (int round = 1; round <= cfg.max_rounds; ++round) {
        res.rounds = round;
        SparseCols prev = p;
        SparseCols base = p;
        for (int e = 1; e < cfg.expansion; ++e) p = multiply(p, base, acc, touched);
        inflate_and_prune(p, cfg.inflation, cfg.prune_threshold);
        if (cfg.round_observer) {
            std::vector<double> sums(n, 0.0);
            for (int j = 0; j < n; ++j)
                for (const auto& [row, v] : p[j]) sums[j] += v;
            cfg.round_observer(round, sums);
        }
        if (max_entry_change(p, prev) <= cfg.epsilon) {
            res.converged = true;
            break;
        }
    }

    // Attractor extraction: rows with a diagonal entry > eps pull in every
    // column where the row exceeds eps. Overlaps resolve to the lowest-index
    // attractor; unattracted nodes become singletons.
    std::vector<std::vector<std::pair<int, double>>> rows(n);
    for (int j = 0; j < n; ++j) {
        for (const auto& [row, v] : p[j]) rows[row].emplace_back(j, v);
    }
    std::vector<int> assign(n, -1);
    int next = 0;
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (const auto& [col, v] : rows[i]) {
            if (col == i) {
                diag = v;
                break;
            }
        }
        if (diag <= cfg.epsilon) continue;
        bool used = false;
        for (const auto& [col, v] : rows[i]) {
            if (v > cfg.epsilon && assign[col] < 0) {
                assign[col] = next;
                used = true;
            }
        }
        if (used) ++next;
    }
    for (int v = 0; v < n; ++v) {
        if (assign[v] < 0) assign[v] = next++;
    }
    res.partition = Partition::from_assignment(std::move(assign));
    return res;
}

}  // namespace graphclust
