#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "graphclust/graph.hpp"

namespace graphclust {

/// Co-occurrence counts between two labelings: counts(i,j) = number of
/// elements with true class i and predicted cluster j.
struct ContingencyTable {
    std::size_t rows = 0;  // classes in y
    std::size_t cols = 0;  // clusters in yhat
    std::vector<long long> counts;
    std::vector<long long> row_sums;
    std::vector<long long> col_sums;
    long long total = 0;

    long long at(std::size_t i, std::size_t j) const { return counts[i * cols + j]; }
    static ContingencyTable from_labels(std::span<const int> y, std::span<const int> yhat);
};

enum class AccuracyMode {
    assignment,  // optimal one-to-one matching (Kuhn-Munkres)
    majority,    // each predicted cluster mapped to its most frequent class
};

/// Clustering accuracy under label matching. Assignment mode equals the
/// max-over-permutations accuracy; majority mode is many-to-one.
double accuracy_matched(std::span<const int> y, const Partition& yhat, AccuracyMode mode);

/// Normalized mutual information I(Y,Ŷ)/sqrt(H(Y)·H(Ŷ)), natural logs,
/// 0·log 0 := 0. A zero-entropy side yields 0 and sets *degenerate.
double nmi(std::span<const int> y, const Partition& yhat, bool* degenerate = nullptr);

/// Adjusted Rand index from pair-count sums over the contingency table.
/// A degenerate normalizer yields 0 and sets *degenerate.
double ari(std::span<const int> y, const Partition& yhat, bool* degenerate = nullptr);

/// Modularity Q of a partition, computed clusterwise in O(m + n).
/// Throws on an edgeless graph. Treats the graph as unweighted.
double modularity(const Graph& g, const Partition& p);

/// Weight of edges leaving the cluster. Cluster must be a proper nonempty
/// subset of V.
double cut_weight(const Graph& g, std::span<const int> cluster);
/// Sum of weighted degrees over the cluster.
double volume(const Graph& g, std::span<const int> cluster);
/// cut / min(vol(A), vol(V \ A)); 0 when the cut is empty.
double conductance(const Graph& g, std::span<const int> cluster);

/// Node-weighted average of per-cluster edge densities; clusters with fewer
/// than 2 nodes count as density 0 and set *degenerate.
double internal_density(const Graph& g, const Partition& p, bool* degenerate = nullptr);

/// One (algorithm, dataset, seed) evaluation row.
struct MetricsReport {
    std::string algorithm;
    std::string dataset;
    std::uint64_t seed = 0;
    double wall_ms = 0.0;
    std::map<std::string, double> entries;
    std::vector<std::string> flags;

    static const std::vector<std::string>& csv_columns();
    static std::string csv_header();
    std::string to_csv_row() const;
    std::string to_json() const;
};

/// Computes the full metric suite for a clustering against a labeled graph.
MetricsReport evaluate_partition(const Graph& g, const Partition& p, std::span<const int> labels,
                                 const std::string& algorithm, const std::string& dataset,
                                 std::uint64_t seed, double wall_ms);

}  // namespace graphclust
