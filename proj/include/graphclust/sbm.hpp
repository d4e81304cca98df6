#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "graphclust/dense_matrix.hpp"
#include "graphclust/graph.hpp"

namespace graphclust {

/// Block-model parameters: K x K connection probabilities, hard memberships,
/// and soft responsibilities (rows sum to 1).
struct SbmParams {
    DenseMatrix block_matrix;       // K x K, entries clamped to [1e-9, 1-1e-9]
    std::vector<int> memberships;   // hardened z
    DenseMatrix responsibilities;   // n x K soft gamma
};

struct SbmPriors {
    std::vector<double> dirichlet_alpha;  // concentration per block
    double beta1 = 1.0;
    double beta2 = 1.0;

    static SbmPriors uniform(int K) { return {std::vector<double>(K, 1.0), 1.0, 1.0}; }
};

struct DcSbmParams {
    std::vector<int> memberships;
    std::vector<double> degree_propensity;  // theta, sums to 1 within each block
    DenseMatrix block_rates;                // omega
};

/// Bernoulli log-likelihood sum over unordered node pairs,
/// A_ij ln B_{z_i z_j} + (1 - A_ij) ln(1 - B_{z_i z_j}).
double sbm_log_likelihood(const Graph& g, const SbmParams& params);

struct SbmEmResult {
    SbmParams params;
    std::vector<double> hard_ll_trace;  // observed-data LL at hardened z per iteration
    bool converged = false;
    int iterations = 0;
};

/// Mean-field EM: soft E-step over neighbors and non-neighbors, closed-form
/// M-step for B. Runs `restarts` seeded restarts and keeps the best final
/// hardened likelihood.
SbmEmResult sbm_em(const Graph& g, int K, std::uint64_t seed, int max_iters = 100,
                   double tol = 1e-6, int restarts = 5);

/// Collapsed log posterior over memberships: B marginalized under
/// Beta(beta1, beta2), block sizes under Dirichlet(alpha). Additive
/// constants independent of z are dropped.
double sbm_collapsed_log_posterior(const Graph& g, std::span<const int> z, int K,
                                   const SbmPriors& priors);

struct SbmMhResult {
    std::vector<std::vector<int>> samples;  // post burn-in states
    Partition map_partition;                // best-scoring visited state
    double map_log_posterior = 0.0;
    std::vector<double> trace;              // log posterior per iteration
    std::vector<int> occupied_trace;        // blocks in use per iteration
    double acceptance_rate = 0.0;
};

/// Collapsed Metropolis-Hastings over memberships: propose moving one
/// uniformly chosen node to a uniformly chosen other block, accept with
/// min(1, posterior ratio).
SbmMhResult sbm_mh(const Graph& g, int K, const SbmPriors& priors, int iters, int burn_in,
                   std::uint64_t seed, int sample_stride = 1);

enum class DcSbmVariant { kn, microcanonical };

/// Degree-corrected likelihoods under the Karrer-Newman convention:
/// e_rs counts edges between distinct blocks, e_rr twice the internal
/// edges, e_r the block degree sum. Zero e_rs terms contribute 0.
double dcsbm_log_likelihood(const Graph& g, std::span<const int> z, DcSbmVariant variant);

/// P(at least one edge) = 1 - exp(-theta_i * theta_j * omega_rs).
double dcsbm_edge_probability(double theta_i, double theta_j, double omega_rs);

/// Maximum-likelihood DC-SBM parameters for a fixed membership:
/// theta normalized to sum 1 per block, omega = block edge-endpoint counts.
DcSbmParams dcsbm_fit_params(const Graph& g, std::span<const int> z, int K);

/// Bernoulli test generator: edge (i,j) present with probability B[z_i][z_j].
Graph generate_sbm(int n, std::span<const int> z, const DenseMatrix& block_matrix,
                   std::uint64_t seed);

struct DcSbmMhResult {
    Partition partition;
    double best_objective = 0.0;
    double acceptance_rate = 0.0;
    std::vector<double> trace;        // objective per iteration
    std::vector<int> occupied_trace;  // blocks in use per iteration
};

/// Same chain as sbm_mh with the degree-corrected L_KN as the objective.
DcSbmMhResult dcsbm_mh(const Graph& g, int K, int iters, int burn_in, std::uint64_t seed);

}  // namespace graphclust
