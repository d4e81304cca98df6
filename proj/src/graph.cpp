#include "graphclust/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace graphclust {

Graph Graph::from_edges(const std::vector<Edge>& edges, int num_nodes) {
    if (num_nodes < 0) throw std::invalid_argument("graph: negative node count");
    Graph g;
    g.num_nodes_ = num_nodes;
    g.adj_.resize(num_nodes);
    g.wdeg_.assign(num_nodes, 0.0);

    // Canonicalize to u < v, first occurrence wins.
    std::vector<Edge> canon;
    canon.reserve(edges.size());
    for (const Edge& e : edges) {
        if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes) {
            throw std::invalid_argument("graph: edge (" + std::to_string(e.u) + "," +
                                        std::to_string(e.v) + ") references a node id outside [0," +
                                        std::to_string(num_nodes) + ")");
        }
        if (e.u == e.v) {
            ++g.self_loops_dropped_;
            continue;
        }
        canon.push_back(e.u < e.v ? e : Edge{e.v, e.u, e.w});
    }
    std::stable_sort(canon.begin(), canon.end(), [](const Edge& a, const Edge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 0; i < canon.size(); ++i) {
        if (i > 0 && canon[i].u == canon[i - 1].u && canon[i].v == canon[i - 1].v) {
            ++g.duplicate_edges_dropped_;
            continue;
        }
        g.edges_.push_back(canon[i]);
    }

    for (const Edge& e : g.edges_) {
        g.adj_[e.u].emplace_back(e.v, e.w);
        g.adj_[e.v].emplace_back(e.u, e.w);
        g.wdeg_[e.u] += e.w;
        g.wdeg_[e.v] += e.w;
        g.total_weight_ += e.w;
    }
    for (auto& nbrs : g.adj_) std::sort(nbrs.begin(), nbrs.end());
    return g;
}

bool Graph::has_edge(int u, int v) const {
    const auto& nbrs = adj_[u];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), std::make_pair(v, -1.0));
    return it != nbrs.end() && it->first == v;
}

double Graph::edge_weight(int u, int v) const {
    const auto& nbrs = adj_[u];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), std::make_pair(v, -1.0));
    return (it != nbrs.end() && it->first == v) ? it->second : 0.0;
}

Partition Partition::from_assignment(std::vector<int> assignment) {
    Partition p;
    int max_id = -1;
    for (int c : assignment) {
        if (c < 0) throw std::invalid_argument("partition: negative cluster id");
        max_id = std::max(max_id, c);
    }
    p.assignment = std::move(assignment);
    p.num_clusters = max_id + 1;
    return p;
}

std::vector<std::vector<int>> Partition::clusters() const {
    std::vector<std::vector<int>> cs(num_clusters);
    for (std::size_t i = 0; i < assignment.size(); ++i)
        cs[assignment[i]].push_back(static_cast<int>(i));
    return cs;
}

Partition Partition::compacted() const {
    std::vector<int> remap(num_clusters, -1);
    Partition out;
    out.assignment.resize(assignment.size());
    int next = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        int c = assignment[i];
        if (remap[c] < 0) remap[c] = next++;
        out.assignment[i] = remap[c];
    }
    out.num_clusters = next;
    return out;
}

namespace {

std::vector<double> inv_sqrt_degrees(const Graph& g, bool self_loops) {
    const int n = g.num_nodes();
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) {
        double d = g.weighted_degree(i) + (self_loops ? 1.0 : 0.0);
        if (d <= 0.0) {
            throw std::domain_error("matrix_view: node " + std::to_string(i) +
                                    " is isolated; normalized view undefined");
        }
        dinv[i] = 1.0 / std::sqrt(d);
    }
    return dinv;
}

}  // namespace

DenseMatrix matrix_view(const Graph& g, MatrixKind kind) {
    const int n = g.num_nodes();
    DenseMatrix m(n, n);
    switch (kind) {
        case MatrixKind::adjacency:
            for (const Edge& e : g.edges()) {
                m(e.u, e.v) = e.w;
                m(e.v, e.u) = e.w;
            }
            break;
        case MatrixKind::degree:
            for (int i = 0; i < n; ++i) m(i, i) = g.weighted_degree(i);
            break;
        case MatrixKind::normalized_adjacency: {
            auto dinv = inv_sqrt_degrees(g, false);
            for (const Edge& e : g.edges()) {
                double v = e.w * dinv[e.u] * dinv[e.v];
                m(e.u, e.v) = v;
                m(e.v, e.u) = v;
            }
            break;
        }
        case MatrixKind::laplacian:
            for (int i = 0; i < n; ++i) m(i, i) = g.weighted_degree(i);
            for (const Edge& e : g.edges()) {
                m(e.u, e.v) = -e.w;
                m(e.v, e.u) = -e.w;
            }
            break;
        case MatrixKind::normalized_laplacian: {
            auto dinv = inv_sqrt_degrees(g, false);
            for (int i = 0; i < n; ++i) m(i, i) = 1.0;
            for (const Edge& e : g.edges()) {
                double v = -e.w * dinv[e.u] * dinv[e.v];
                m(e.u, e.v) = v;
                m(e.v, e.u) = v;
            }
            break;
        }
        case MatrixKind::adjacency_self_loops:
            for (int i = 0; i < n; ++i) m(i, i) = 1.0;
            for (const Edge& e : g.edges()) {
                m(e.u, e.v) = e.w;
                m(e.v, e.u) = e.w;
            }
            break;
        case MatrixKind::normalized_adjacency_self_loops: {
            auto dinv = inv_sqrt_degrees(g, true);
            for (int i = 0; i < n; ++i) m(i, i) = dinv[i] * dinv[i];
            for (const Edge& e : g.edges()) {
                double v = e.w * dinv[e.u] * dinv[e.v];
                m(e.u, e.v) = v;
                m(e.v, e.u) = v;
            }
            break;
        }
    }
    return m;
}

Partition connected_components(const Graph& g) {
    const int n = g.num_nodes();
    std::vector<int> comp(n, -1);
    int next = 0;
    std::deque<int> queue;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        comp[s] = next;
        queue.push_back(s);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (const auto& [v, w] : g.neighbors(u)) {
                (void)w;
                if (comp[v] < 0) {
                    comp[v] = next;
                    queue.push_back(v);
                }
            }
        }
        ++next;
    }
    Partition p;
    p.assignment = std::move(comp);
    p.num_clusters = next;
    return p;
}

}  // namespace graphclust
