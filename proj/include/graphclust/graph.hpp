#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphclust/dense_matrix.hpp"

namespace graphclust {

struct Edge {
    int u = 0;
    int v = 0;
    double w = 1.0;
};

/// Immutable undirected graph in compressed sparse adjacency form.
/// Neighbor lists are symmetric and sorted; self-loops are rejected at
/// ingest (counted), duplicate edges keep the first weight (counted).
class Graph {
public:
    Graph() = default;

    static Graph from_edges(const std::vector<Edge>& edges, int num_nodes);

    int num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    double total_weight() const { return total_weight_; }

    /// Canonical edge list, u < v, deduplicated.
    const std::vector<Edge>& edges() const { return edges_; }

    /// Sorted (neighbor, weight) pairs.
    const std::vector<std::pair<int, double>>& neighbors(int u) const { return adj_[u]; }

    /// Unweighted degree (neighbor count).
    int degree(int u) const { return static_cast<int>(adj_[u].size()); }

    /// Sum of incident edge weights.
    double weighted_degree(int u) const { return wdeg_[u]; }

    int self_loops_dropped() const { return self_loops_dropped_; }
    int duplicate_edges_dropped() const { return duplicate_edges_dropped_; }

    bool has_edge(int u, int v) const;
    /// Weight of edge (u,v), 0 if absent.
    double edge_weight(int u, int v) const;

private:
    int num_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::pair<int, double>>> adj_;
    std::vector<double> wdeg_;
    double total_weight_ = 0.0;
    int self_loops_dropped_ = 0;
    int duplicate_edges_dropped_ = 0;
};

/// Cluster assignment over nodes: every node carries exactly one cluster id
/// in [0, num_clusters), and num_clusters = 1 + max(assignment).
struct Partition {
    std::vector<int> assignment;
    int num_clusters = 0;

    Partition() = default;
    static Partition from_assignment(std::vector<int> assignment);

    std::size_t size() const { return assignment.size(); }
    int operator[](std::size_t i) const { return assignment[i]; }

    /// Member lists per cluster id.
    std::vector<std::vector<int>> clusters() const;

    /// Renumber cluster ids densely in order of first appearance by node index.
    Partition compacted() const;
};

enum class MatrixKind {
    adjacency,
    degree,
    normalized_adjacency,
    laplacian,
    normalized_laplacian,
    adjacency_self_loops,
    normalized_adjacency_self_loops,
};

/// Dense matrix view of the graph. Normalized kinds require every node
/// degree > 0 (after self-loop addition where applicable) and throw
/// naming the offending node otherwise.
DenseMatrix matrix_view(const Graph& g, MatrixKind kind);

Partition connected_components(const Graph& g);

}  // namespace graphclust
