#pragma once

#include <functional>

#include "graphclust/dense_matrix.hpp"
#include "graphclust/graph.hpp"

namespace graphclust {

struct MclConfig {
    int expansion = 2;             // e >= 2
    double inflation = 2.0;        // r > 1
    double epsilon = 1e-4;         // convergence threshold on max entry change
    int max_rounds = 100;
    double prune_threshold = 1e-8; // entries below are zeroed after inflation; 0 disables
    bool add_self_loops = true;    // off reproduces the bare iteration
    /// Verification hook: called after each inflation with the column sums.
    std::function<void(int round, const std::vector<double>& column_sums)> round_observer;
};

struct MclResult {
    Partition partition;
    bool converged = false;
    int rounds = 0;
};

/// Column-stochastic random-walk matrix: entry (v,u) = w(u,v)/deg(u), the
/// transpose orientation of the row-stochastic definition so that column
/// normalization during inflation is consistent.
DenseMatrix transition_matrix(const Graph& g, bool add_self_loops);

/// Markov clustering: alternate expansion (matrix power) and inflation
/// (columnwise entry power + renormalization) to a fixpoint, then read
/// clusters off the attractor rows. Iteration state is kept column-sparse;
/// semantics match the dense recurrence.
MclResult mcl(const Graph& g, const MclConfig& cfg = {});

}  // namespace graphclust
