#include "graphclust/leiden.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

#include "graphclust/rng.hpp"

namespace graphclust {

namespace {

constexpr double kGainEps = 1e-12;

// Weighted degree including both endpoints of the internal self weight.
double node_strength(const AggregateGraph& level, int v) {
    return level.graph.weighted_degree(v) + 2.0 * level.self_weight[v];
}

struct CommunityStats {
    std::vector<double> volume;    // sum of node strengths
    std::vector<double> size;      // sum of node_sizes
    std::vector<int> members;      // member count
};

CommunityStats community_stats(const AggregateGraph& level, const std::vector<int>& assign,
                               int num_comms) {
    CommunityStats s;
    s.volume.assign(num_comms, 0.0);
    s.size.assign(num_comms, 0.0);
    s.members.assign(num_comms, 0);
    for (int v = 0; v < level.graph.num_nodes(); ++v) {
        s.volume[assign[v]] += node_strength(level, v);
        s.size[assign[v]] += level.node_sizes[v];
        ++s.members[assign[v]];
    }
    return s;
}

}  // namespace

AggregateGraph AggregateGraph::wrap(const Graph& g) {
    AggregateGraph a;
    a.graph = g;
    a.self_weight.assign(g.num_nodes(), 0.0);
    a.node_sizes.assign(g.num_nodes(), 1);
    a.carry.resize(g.num_nodes());
    for (int v = 0; v < g.num_nodes(); ++v) a.carry[v] = {v};
    return a;
}

double AggregateGraph::total_weight() const {
    double m = graph.total_weight();
    for (double s : self_weight) m += s;
    return m;
}

double quality(const AggregateGraph& level, const Partition& p, const QualityObjective& obj) {
    const int k = p.num_clusters;
    std::vector<double> w_in(k, 0.0);
    for (const Edge& e : level.graph.edges()) {
        if (p.assignment[e.u] == p.assignment[e.v]) w_in[p.assignment[e.u]] += e.w;
    }
    for (int v = 0; v < level.graph.num_nodes(); ++v)
        w_in[p.assignment[v]] += level.self_weight[v];

    if (obj.kind == QualityObjective::Kind::cpm) {
        std::vector<double> size(k, 0.0);
        for (int v = 0; v < level.graph.num_nodes(); ++v)
            size[p.assignment[v]] += level.node_sizes[v];
        double h = 0.0;
        for (int c = 0; c < k; ++c) h += w_in[c] - obj.gamma * 0.5 * size[c] * (size[c] - 1.0);
        return h;
    }
    const double m = level.total_weight();
    if (m <= 0.0) return 0.0;
    std::vector<double> vol(k, 0.0);
    for (int v = 0; v < level.graph.num_nodes(); ++v)
        vol[p.assignment[v]] += node_strength(level, v);
    double q = 0.0;
    for (int c = 0; c < k; ++c) {
        const double f = vol[c] / (2.0 * m);
        q += w_in[c] / m - f * f;
    }
    return q;
}

double quality(const Graph& g, const Partition& p, const QualityObjective& obj) {
    return quality(AggregateGraph::wrap(g), p, obj);
}

Partition local_move(const AggregateGraph& level, const Partition& p, const QualityObjective& obj,
                     std::uint64_t seed) {
    const int n = level.graph.num_nodes();
    if (p.assignment.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("local_move: partition size mismatch");
    }
    const double m = level.total_weight();
    const bool cpm = obj.kind == QualityObjective::Kind::cpm;

    std::vector<int> assign = p.assignment;
    int num_comms = p.num_clusters;
    CommunityStats stats = community_stats(level, assign, num_comms);
    std::vector<int> free_ids;

    Rng rng(seed);
    std::deque<int> queue;
    for (std::size_t i : rng.permutation(static_cast<std::size_t>(n)))
        queue.push_back(static_cast<int>(i));
    std::vector<char> in_queue(n, 1);

    // Scratch: weight from the current node to each touched community.
    std::vector<double> w_to(num_comms + n + 1, 0.0);
    std::vector<int> touched;

    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        in_queue[v] = 0;

        const int a = assign[v];
        const double sv = level.node_sizes[v];
        const double kv = node_strength(level, v);

        touched.clear();
        for (const auto& [u, w] : level.graph.neighbors(v)) {
            const int c = assign[u];
            if (w_to[c] == 0.0) touched.push_back(c);
            w_to[c] += w;
        }
        std::sort(touched.begin(), touched.end());

        const double w_va = w_to[a];  // weight to own community minus v
        double best_gain = kGainEps;
        int best_comm = -1;

        auto gain_for = [&](int b, double w_vb) {
            if (cpm) {
                return w_vb - w_va -
                       obj.gamma * sv * (stats.size[b] - (stats.size[a] - sv));
            }
            return (w_vb - w_va) / m -
                   kv * (stats.volume[b] - (stats.volume[a] - kv)) / (2.0 * m * m);
        };

        for (int b : touched) {
            if (b == a) continue;
            const double g = gain_for(b, w_to[b]);
            if (g > best_gain) {
                best_gain = g;
                best_comm = b;
            }
        }
        // Empty community as a candidate unless v is already alone.
        if (stats.members[a] > 1) {
            double g;
            if (cpm) {
                g = -w_va - obj.gamma * sv * (sv - stats.size[a]);
            } else {
                g = -w_va / m - kv * (kv - stats.volume[a]) / (2.0 * m * m);
            }
            if (g > best_gain) {
                best_gain = g;
                int fresh;
                if (!free_ids.empty()) {
                    fresh = free_ids.back();
                } else {
                    fresh = num_comms;
                }
                best_comm = fresh;
            }
        }

        if (best_comm >= 0) {
            if (best_comm >= num_comms) {
                num_comms = best_comm + 1;
                stats.volume.resize(num_comms, 0.0);
                stats.size.resize(num_comms, 0.0);
                stats.members.resize(num_comms, 0);
                if (static_cast<std::size_t>(num_comms + n + 1) > w_to.size())
                    w_to.resize(num_comms + n + 1, 0.0);
            } else if (!free_ids.empty() && best_comm == free_ids.back()) {
                free_ids.pop_back();
            }
            stats.volume[a] -= kv;
            stats.size[a] -= sv;
            --stats.members[a];
            if (stats.members[a] == 0) free_ids.push_back(a);
            stats.volume[best_comm] += kv;
            stats.size[best_comm] += sv;
            ++stats.members[best_comm];
            assign[v] = best_comm;
            for (const auto& [u, w] : level.graph.neighbors(v)) {
                (void)w;
                if (assign[u] != best_comm && !in_queue[u]) {
                    in_queue[u] = 1;
                    queue.push_back(u);
                }
            }
        }
        for (int c : touched) w_to[c] = 0.0;
    }
    return Partition::from_assignment(std::move(assign)).compacted();
}

Partition local_move(const Graph& g, const Partition& p, const QualityObjective& obj,
                     std::uint64_t seed) {
    return local_move(AggregateGraph::wrap(g), p, obj, seed);
}

Partition refine(const AggregateGraph& level, const Partition& p, const QualityObjective& obj,
                 double theta, std::uint64_t seed) {
    const int n = level.graph.num_nodes();
    const double m = level.total_weight();
    const bool cpm = obj.kind == QualityObjective::Kind::cpm;
    // Well-connectedness threshold scale: gamma for CPM, 1/(2m) for modularity.
    const double gamma_wc = cpm ? obj.gamma : (m > 0.0 ? 1.0 / (2.0 * m) : 0.0);

    // Community size of p per node's community.
    std::vector<double> comm_size(p.num_clusters, 0.0);
    for (int v = 0; v < n; ++v) comm_size[p.assignment[v]] += level.node_sizes[v];

    // Refined state: one community per node initially.
    std::vector<int> r(n);
    std::vector<double> sub_size(n), sub_vol(n), sub_conn(n);
    std::vector<int> sub_members(n, 1);
    std::vector<double> node_conn(n, 0.0);
    for (int v = 0; v < n; ++v) {
        r[v] = v;
        sub_size[v] = level.node_sizes[v];
        sub_vol[v] = node_strength(level, v);
        double conn = 0.0;
        for (const auto& [u, w] : level.graph.neighbors(v)) {
            if (p.assignment[u] == p.assignment[v]) conn += w;
        }
        node_conn[v] = conn;
        sub_conn[v] = conn;
    }

    Rng rng(seed);
    const auto order = rng.permutation(static_cast<std::size_t>(n));

    std::vector<double> w_to(n, 0.0);
    std::vector<int> touched;
    struct Candidate {
        int comm;
        double gain;
        double w;
    };
    std::vector<Candidate> cands;

    for (std::size_t idx = 0; idx < order.size(); ++idx) {
        const int v = static_cast<int>(order[idx]);
        if (sub_members[r[v]] > 1) continue;  // only singletons move
        const int pc = p.assignment[v];
        const double sc = comm_size[pc];
        const double sv = level.node_sizes[v];
        const double kv = node_strength(level, v);
        if (node_conn[v] < gamma_wc * sv * (sc - sv) - kGainEps) continue;

        touched.clear();
        for (const auto& [u, w] : level.graph.neighbors(v)) {
            if (p.assignment[u] != pc) continue;
            const int d = r[u];
            if (d == r[v]) continue;
            if (w_to[d] == 0.0) touched.push_back(d);
            w_to[d] += w;
        }
        std::sort(touched.begin(), touched.end());

        cands.clear();
        for (int d : touched) {
            // Candidate sub-community must itself be well-connected to C.
            if (sub_conn[d] < gamma_wc * sub_size[d] * (sc - sub_size[d]) - kGainEps) continue;
            double gain;
            if (cpm) {
                gain = w_to[d] - obj.gamma * sv * sub_size[d];
            } else {
                gain = w_to[d] / m - kv * sub_vol[d] / (2.0 * m * m);
            }
            if (gain > kGainEps) cands.push_back({d, gain, w_to[d]});
        }

        if (!cands.empty()) {
            int pick = -1;
            if (theta <= 1e-12) {
                double best = -1.0;
                for (const auto& c : cands) {
                    if (c.gain > best + kGainEps) {
                        best = c.gain;
                        pick = c.comm;
                    }
                }
            } else {
                double max_gain = 0.0;
                for (const auto& c : cands) max_gain = std::max(max_gain, c.gain);
                double total = 0.0;
                for (const auto& c : cands) total += std::exp((c.gain - max_gain) / theta);
                double roll = rng.uniform() * total;
                double accum = 0.0;
                pick = cands.back().comm;
                for (const auto& c : cands) {
                    accum += std::exp((c.gain - max_gain) / theta);
                    if (accum >= roll) {
                        pick = c.comm;
                        break;
                    }
                }
            }
            const int old = r[v];
            double w_vd = 0.0;
            for (const auto& c : cands) {
                if (c.comm == pick) {
                    w_vd = c.w;
                    break;
                }
            }
            r[v] = pick;
            sub_size[pick] += sv;
            sub_vol[pick] += kv;
            sub_conn[pick] += node_conn[v] - 2.0 * w_vd;
            sub_members[pick] += 1;
            sub_members[old] = 0;
        }
        for (int d : touched) w_to[d] = 0.0;
    }
    return Partition::from_assignment(std::move(r)).compacted();
}

Partition refine(const Graph& g, const Partition& p, const QualityObjective& obj, double theta,
                 std::uint64_t seed) {
    return refine(AggregateGraph::wrap(g), p, obj, theta, seed);
}

std::pair<AggregateGraph, Partition> aggregate(const AggregateGraph& level,
                                               const Partition& p_refined, const Partition& p) {
    const int n = level.graph.num_nodes();
    if (p_refined.assignment.size() != static_cast<std::size_t>(n) ||
        p.assignment.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("aggregate: partition size mismatch");
    }
    const Partition pr = p_refined.compacted();
    const int k = pr.num_clusters;

    // Refinement check: members of a refined community share their p community.
    std::vector<int> comm_of(k, -1);
    for (int v = 0; v < n; ++v) {
        int& c = comm_of[pr.assignment[v]];
        if (c < 0) {
            c = p.assignment[v];
        } else if (c != p.assignment[v]) {
            throw std::invalid_argument(
                "aggregate: p_refined does not refine p (community straddles node " +
                std::to_string(v) + ")");
        }
    }

    AggregateGraph out;
    out.self_weight.assign(k, 0.0);
    out.node_sizes.assign(k, 0);
    out.carry.resize(k);
    std::map<std::pair<int, int>, double> cross;
    for (const Edge& e : level.graph.edges()) {
        const int cu = pr.assignment[e.u], cv = pr.assignment[e.v];
        if (cu == cv) {
            out.self_weight[cu] += e.w;
        } else {
            cross[{std::min(cu, cv), std::max(cu, cv)}] += e.w;
        }
    }
    for (int v = 0; v < n; ++v) {
        const int c = pr.assignment[v];
        out.self_weight[c] += level.self_weight[v];
        out.node_sizes[c] += level.node_sizes[v];
        out.carry[c].insert(out.carry[c].end(), level.carry[v].begin(), level.carry[v].end());
    }
    std::vector<Edge> edges;
    edges.reserve(cross.size());
    for (const auto& [key, w] : cross) edges.push_back({key.first, key.second, w});
    out.graph = Graph::from_edges(edges, k);

    Partition init = Partition::from_assignment(std::move(comm_of)).compacted();
    return {std::move(out), std::move(init)};
}

std::pair<AggregateGraph, Partition> aggregate(const Graph& g, const Partition& p_refined,
                                               const Partition& p) {
    return aggregate(AggregateGraph::wrap(g), p_refined, p);
}

namespace {

// Split any community that is not connected inside g into its components.
int split_disconnected(const Graph& g, std::vector<int>& assign, int& num_comms) {
    const int n = g.num_nodes();
    std::vector<int> new_assign(n, -1);
    int next = 0, fixups = 0;
    std::vector<std::vector<int>> members(num_comms);
    for (int v = 0; v < n; ++v) members[assign[v]].push_back(v);
    std::deque<int> queue;
    for (const auto& comm : members) {
        if (comm.empty()) continue;
        int parts = 0;
        for (int start : comm) {
            if (new_assign[start] >= 0) continue;
            new_assign[start] = next;
            queue.push_back(start);
            while (!queue.empty()) {
                const int u = queue.front();
                queue.pop_front();
                for (const auto& [w, wt] : g.neighbors(u)) {
                    (void)wt;
                    if (assign[w] == assign[start] && new_assign[w] < 0) {
                        new_assign[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            ++next;
            ++parts;
        }
        if (parts > 1) ++fixups;
    }
    assign = std::move(new_assign);
    num_comms = next;
    return fixups;
}

}  // namespace

LeidenResult leiden(const Graph& g, const QualityObjective& obj, std::uint64_t seed,
                    int max_levels, double theta) {
    if (g.num_edges() == 0) throw std::domain_error("leiden: graph has no edges");
    Rng rng(seed);
    AggregateGraph level = AggregateGraph::wrap(g);
    std::vector<int> singleton(g.num_nodes());
    for (int v = 0; v < g.num_nodes(); ++v) singleton[v] = v;
    Partition p = Partition::from_assignment(std::move(singleton));

    LeidenResult res;
    for (int l = 0; l < max_levels; ++l) {
        res.levels = l + 1;
        p = local_move(level, p, obj, rng.next_u64());
        if (p.num_clusters == level.graph.num_nodes()) break;
        Partition pr = refine(level, p, obj, theta, rng.next_u64());
        auto [next_level, init] = aggregate(level, pr, p);
        if (next_level.graph.num_nodes() == level.graph.num_nodes()) break;
        level = std::move(next_level);
        p = std::move(init);
    }

    std::vector<int> flat(g.num_nodes(), 0);
    for (int c = 0; c < level.graph.num_nodes(); ++c) {
        for (int orig : level.carry[c]) flat[orig] = p.assignment[c];
    }
    int num_comms = p.num_clusters;
    res.connectivity_fixups = split_disconnected(g, flat, num_comms);
    res.partition = Partition::from_assignment(std::move(flat)).compacted();
    res.quality_value = quality(g, res.partition, obj);
    return res;
}

}  // namespace graphclust
