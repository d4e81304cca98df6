#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "graphclust/graph.hpp"

namespace graphclust {

struct QualityObjective {
    enum class Kind { cpm, modularity };
    Kind kind = Kind::modularity;
    double gamma = 1.0;  // CPM resolution

    static QualityObjective cpm(double gamma) { return {Kind::cpm, gamma}; }
    static QualityObjective modularity() { return {Kind::modularity, 1.0}; }
};

/// A level of the aggregation hierarchy. Nodes are (refined) communities of
/// the level below; cross-community edge weights live in `graph`, internal
/// weight in `self_weight`, and `node_sizes`/`carry` track the original
/// nodes each aggregate node stands for. Total weight is conserved:
/// sum(edge weights) + sum(self_weight) = m of the original graph.
struct AggregateGraph {
    Graph graph;
    std::vector<double> self_weight;
    std::vector<int> node_sizes;
    std::vector<std::vector<int>> carry;

    static AggregateGraph wrap(const Graph& g);
    double total_weight() const;
};

/// Objective value of a partition: CPM H = sum_C [w_in(C) - gamma*C(S_C,2)]
/// or weighted modularity. Binomial terms use original-node counts.
double quality(const AggregateGraph& level, const Partition& p, const QualityObjective& obj);
double quality(const Graph& g, const Partition& p, const QualityObjective& obj);

/// Queue-driven local moving: visit nodes in seeded random order, greedily
/// move each to the neighboring (or empty) community with maximal positive
/// gain, re-enqueue neighbors of moved nodes. Quality never decreases.
Partition local_move(const AggregateGraph& level, const Partition& p, const QualityObjective& obj,
                     std::uint64_t seed);
Partition local_move(const Graph& g, const Partition& p, const QualityObjective& obj,
                     std::uint64_t seed);

/// Refinement: starting from singletons inside each community of p, merge
/// well-connected singleton nodes into well-connected sub-communities,
/// picking among positive-gain candidates with probability proportional to
/// exp(gain/theta) (argmax when theta -> 0). The result refines p.
Partition refine(const AggregateGraph& level, const Partition& p, const QualityObjective& obj,
                 double theta, std::uint64_t seed);
Partition refine(const Graph& g, const Partition& p, const QualityObjective& obj, double theta,
                 std::uint64_t seed);

/// Collapse refined communities into aggregate nodes; the returned initial
/// partition groups them by their community in p. Throws if p_refined does
/// not refine p.
std::pair<AggregateGraph, Partition> aggregate(const AggregateGraph& level,
                                               const Partition& p_refined, const Partition& p);
std::pair<AggregateGraph, Partition> aggregate(const Graph& g, const Partition& p_refined,
                                               const Partition& p);

struct LeidenResult {
    Partition partition;
    int levels = 0;
    double quality_value = 0.0;
    /// Communities split post-hoc because they were internally disconnected.
    /// Stays 0 on the normal stable-termination path.
    int connectivity_fixups = 0;
};

/// Full Leiden loop: {local_move; refine; aggregate} until the partition is
/// stable or max_levels. Every returned community is connected in g.
LeidenResult leiden(const Graph& g, const QualityObjective& obj, std::uint64_t seed,
                    int max_levels = 20, double theta = 0.01);

}  // namespace graphclust
