#include "graphclust/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "graphclust/eigensolver.hpp"
#include "graphclust/kmeans.hpp"

namespace graphclust {

namespace {

Partition spectral_connected(const Graph& g, std::size_t k, std::uint64_t seed,
                             const SpectralOptions& opts) {
    DenseMatrix lap = matrix_view(g, MatrixKind::normalized_laplacian);
    EigenPairs pairs = sym_eigs_smallest(lap, k);
    DenseMatrix embedding = pairs.vectors;  // n x k, rows are node embeddings
    if (opts.normalize_rows) {
        for (std::size_t i = 0; i < embedding.rows(); ++i) {
            double norm = 0.0;
            for (std::size_t j = 0; j < embedding.cols(); ++j)
                norm += embedding(i, j) * embedding(i, j);
            norm = std::sqrt(norm);
            if (norm > 1e-12) {
                for (std::size_t j = 0; j < embedding.cols(); ++j) embedding(i, j) /= norm;
            }
        }
    }
    return kmeans(embedding, k, seed, opts.kmeans_max_iters).partition;
}

// One whole component per cluster, components placed largest-first onto the
// currently lightest cluster.
Partition assign_components_greedy(const Partition& comps, std::size_t k) {
    std::vector<std::vector<int>> members = comps.clusters();
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return members[a].size() > members[b].size();
    });
    std::vector<std::size_t> load(k, 0);
    std::vector<int> comp_to_cluster(members.size(), 0);
    for (std::size_t c : order) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < k; ++i)
            if (load[i] < load[best]) best = i;
        comp_to_cluster[c] = static_cast<int>(best);
        load[best] += members[c].size();
    }
    std::vector<int> assign(comps.size());
    for (std::size_t v = 0; v < comps.size(); ++v)
        assign[v] = comp_to_cluster[comps.assignment[v]];
    return Partition::from_assignment(std::move(assign)).compacted();
}

}  // namespace

Partition spectral_clustering(const Graph& g, std::size_t k, std::uint64_t seed,
                              const SpectralOptions& opts) {
    const std::size_t n = static_cast<std::size_t>(g.num_nodes());
    if (k < 1 || k > n) {
        throw std::invalid_argument("spectral: k=" + std::to_string(k) +
                                    " out of range for n=" + std::to_string(n));
    }
    Partition comps = connected_components(g);
    if (comps.num_clusters == 1) return spectral_connected(g, k, seed, opts);

    if (!opts.component_fallback) {
        std::string msg = "spectral: graph is disconnected (" +
                          std::to_string(comps.num_clusters) + " components; sizes";
        auto members = comps.clusters();
        for (const auto& m : members) msg += " " + std::to_string(m.size());
        throw std::domain_error(msg + ")");
    }

    if (static_cast<std::size_t>(comps.num_clusters) >= k) {
        return assign_components_greedy(comps, k);
    }

    // Fewer components than clusters: split k across components in
    // proportion to size (each gets at least 1, at most its node count),
    // then solve each component independently.
    auto members = comps.clusters();
    const std::size_t c = members.size();
    std::vector<std::size_t> alloc(c, 1);
    std::size_t used = c;
    // Largest remainder on the proportional shares.
    std::vector<std::pair<double, std::size_t>> frac(c);
    for (std::size_t i = 0; i < c; ++i) {
        const double share = static_cast<double>(members[i].size()) / n * k;
        const std::size_t extra =
            std::min(static_cast<std::size_t>(std::max(0.0, std::floor(share - 1.0))),
                     members[i].size() - 1);
        alloc[i] += extra;
        used += extra;
        frac[i] = {share - std::floor(share), i};
    }
    std::stable_sort(frac.begin(), frac.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::size_t cursor = 0;
    while (used < k) {
        const std::size_t i = frac[cursor % c].second;
        if (alloc[i] < members[i].size()) {
            ++alloc[i];
            ++used;
        }
        ++cursor;
        if (cursor > 4 * c * k) break;  // every component saturated
    }

    std::vector<int> assign(n, 0);
    int offset = 0;
    for (std::size_t i = 0; i < c; ++i) {
        const auto& nodes = members[i];
        std::vector<int> local_to_global = nodes;
        std::vector<int> global_to_local(n, -1);
        for (std::size_t j = 0; j < nodes.size(); ++j) global_to_local[nodes[j]] = static_cast<int>(j);
        std::vector<Edge> sub_edges;
        for (const Edge& e : g.edges()) {
            if (global_to_local[e.u] >= 0 && global_to_local[e.v] >= 0) {
                sub_edges.push_back({global_to_local[e.u], global_to_local[e.v], e.w});
            }
        }
        Graph sub = Graph::from_edges(sub_edges, static_cast<int>(nodes.size()));
        Partition local;
        if (alloc[i] <= 1 || nodes.size() == 1) {
            local = Partition::from_assignment(std::vector<int>(nodes.size(), 0));
        } else {
            local = spectral_connected(sub, alloc[i], seed + i, opts);
        }
        for (std::size_t j = 0; j < nodes.size(); ++j)
            assign[local_to_global[j]] = offset + local.assignment[j];
        offset += local.num_clusters;
    }
    return Partition::from_assignment(std::move(assign)).compacted();
}

}  // namespace graphclust
