#pragma once

#include <cstdint>

#include "graphclust/graph.hpp"

namespace graphclust {

struct SpectralOptions {
    /// L2-normalize embedding rows before k-means (off to match the plain
    /// multi-eigenvector method).
    bool normalize_rows = false;
    /// Disconnected input handling: when on (default), whole components are
    /// assigned greedily if #components >= k, otherwise the solver runs per
    /// component with k split proportionally. When off, disconnected input
    /// is an error listing the components.
    bool component_fallback = true;
    std::size_t kmeans_max_iters = 100;
};

/// Spectral clustering on the normalized Laplacian: k smallest eigenpairs,
/// rows of the eigenvector matrix as node embeddings, k-means on the rows.
/// Deterministic per seed.
Partition spectral_clustering(const Graph& g, std::size_t k, std::uint64_t seed,
                              const SpectralOptions& opts = {});

}  // namespace graphclust
