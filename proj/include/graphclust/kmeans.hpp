#pragma once

#include <cstdint>
#include <vector>

#include "graphclust/dense_matrix.hpp"
#include "graphclust/graph.hpp"

namespace graphclust {

struct KmeansResult {
    Partition partition;
    DenseMatrix centroids;  // k x d
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;  // inertia after each assign step
};

/// Lloyd iterations with k-means++ seeding. Deterministic for a fixed seed;
/// empty clusters are reseeded to the point farthest from its centroid.
/// Terminates at an assignment fixpoint or after max_iters.
KmeansResult kmeans(const DenseMatrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100);

}  // namespace graphclust
