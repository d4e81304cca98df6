#include "graphclust/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "graphclust/rng.hpp"

namespace graphclust {

namespace {

constexpr double kProbEps = 1e-9;

double clamp_prob(double p) { return std::min(1.0 - kProbEps, std::max(kProbEps, p)); }

void check_block_count(const Graph& g, int K) {
    if (K < 1 || K > g.num_nodes()) {
        throw std::invalid_argument("sbm: K=" + std::to_string(K) + " invalid for n=" +
                                    std::to_string(g.num_nodes()));
    }
}

// Block sizes and pairwise edge counts (diag counts internal edges once).
struct BlockCounts {
    std::vector<long long> sizes;            // n_k
    std::vector<std::vector<long long>> m;   // K x K symmetric, m[r][r] = internal edges

    static BlockCounts from(const Graph& g, std::span<const int> z, int K) {
        BlockCounts b;
        b.sizes.assign(K, 0);
        b.m.assign(K, std::vector<long long>(K, 0));
        for (int v = 0; v < g.num_nodes(); ++v) ++b.sizes[z[v]];
        for (const Edge& e : g.edges()) {
            const int r = z[e.u], s = z[e.v];
            if (r == s) {
                ++b.m[r][r];
            } else {
                ++b.m[r][s];
                ++b.m[s][r];
            }
        }
        return b;
    }

    long long pairs(int r, int s) const {
        return r == s ? sizes[r] * (sizes[r] - 1) / 2 : sizes[r] * sizes[s];
    }
};

}  // namespace

double sbm_log_likelihood(const Graph& g, const SbmParams& params) {
    const int K = static_cast<int>(params.block_matrix.rows());
    if (params.block_matrix.cols() != static_cast<std::size_t>(K)) {
        throw std::invalid_argument("sbm_log_likelihood: block matrix not square");
    }
    if (params.memberships.size() != static_cast<std::size_t>(g.num_nodes())) {
        throw std::invalid_argument("sbm_log_likelihood: membership size mismatch");
    }
    for (std::size_t i = 0; i < params.block_matrix.size(); ++i) {
        const double b = params.block_matrix.data()[i];
        if (b < 0.0 || b > 1.0 || !std::isfinite(b)) {
            throw std::domain_error("sbm_log_likelihood: block probability outside [0,1]");
        }
    }
    const BlockCounts c = BlockCounts::from(g, params.memberships, K);
    double ll = 0.0;
    for (int r = 0; r < K; ++r) {
        for (int s = r; s < K; ++s) {
            const long long pairs = c.pairs(r, s);
            if (pairs == 0) continue;
            const long long edges = c.m[r][s];
            const double b = clamp_prob(params.block_matrix(r, s));
            ll += edges * std::log(b) + (pairs - edges) * std::log1p(-b);
        }
    }
    return ll;
}

// =============================================================================
// EM
// =============================================================================

namespace {

SbmParams harden(const Graph& g, const DenseMatrix& gamma, int K) {
    const int n = g.num_nodes();
    SbmParams params;
    params.responsibilities = gamma;
    params.memberships.resize(n);
    for (int i = 0; i < n; ++i) {
        int best = 0;
        for (int k = 1; k < K; ++k)
            if (gamma(i, k) > gamma(i, best)) best = k;
        params.memberships[i] = best;
    }

    // M-step block matrix from soft responsibilities.
    std::vector<double> g_sum(K, 0.0);
    DenseMatrix overlap(K, K);  // sum_i gamma_ik gamma_il
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < K; ++k) {
            g_sum[k] += gamma(i, k);
            for (int l = 0; l < K; ++l) overlap(k, l) += gamma(i, k) * gamma(i, l);
        }
    }
    DenseMatrix num(K, K);
    for (const Edge& e : g.edges()) {
        for (int k = 0; k < K; ++k) {
            for (int l = 0; l < K; ++l) {
                num(k, l) += gamma(e.u, k) * gamma(e.v, l) + gamma(e.v, k) * gamma(e.u, l);
            }
        }
    }
    params.block_matrix = DenseMatrix(K, K);
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            const double den = g_sum[k] * g_sum[l] - overlap(k, l);
            params.block_matrix(k, l) =
                den > 1e-12 ? clamp_prob(num(k, l) / den) : kProbEps;
        }
    }
    return params;
}

}  // namespace

SbmEmResult sbm_em(const Graph& g, int K, std::uint64_t seed, int max_iters, double tol,
                   int restarts) {
    check_block_count(g, K);
    const int n = g.num_nodes();
    SbmEmResult best;
    double best_ll = -std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < std::max(1, restarts); ++restart) {
        Rng rng(seed + 1000003ULL * static_cast<std::uint64_t>(restart));
        // Random hard memberships plus an assortative starting block matrix.
        // (A flat B cannot carry community signal through the first E-step:
        // near the uniform point the field only sees degrees.)
        DenseMatrix gamma(n, K);
        for (int i = 0; i < n; ++i) gamma(i, static_cast<int>(rng.uniform_index(K))) = 1.0;
        const double density =
            n > 1 ? 2.0 * static_cast<double>(g.num_edges()) / (static_cast<double>(n) * (n - 1))
                  : 0.0;
        DenseMatrix log_b(K, K), log_1mb(K, K);
        auto set_log_tables = [&](const DenseMatrix& b) {
            for (int k = 0; k < K; ++k) {
                for (int l = 0; l < K; ++l) {
                    log_b(k, l) = std::log(b(k, l));
                    log_1mb(k, l) = std::log1p(-b(k, l));
                }
            }
        };
        {
            DenseMatrix b0(K, K);
            for (int k = 0; k < K; ++k)
                for (int l = 0; l < K; ++l)
                    b0(k, l) = clamp_prob(k == l ? 2.0 * density : 0.5 * density);
            set_log_tables(b0);
        }
        std::vector<double> g_sum(K, 0.0);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < K; ++k) g_sum[k] += gamma(i, k);

        SbmEmResult run;
        for (int iter = 0; iter < max_iters; ++iter) {
            run.iterations = iter + 1;
            // E-step, sequential sweep: each node's fresh responsibility
            // feeds the field of the nodes after it.
            double max_delta = 0.0;
            std::vector<double> nbr(K), score(K);
            for (int i = 0; i < n; ++i) {
                std::fill(nbr.begin(), nbr.end(), 0.0);
                for (const auto& [j, w] : g.neighbors(i)) {
                    (void)w;
                    for (int l = 0; l < K; ++l) nbr[l] += gamma(j, l);
                }
                for (int k = 0; k < K; ++k) {
                    double sc = 0.0;
                    for (int l = 0; l < K; ++l) {
                        const double non_nbr = g_sum[l] - gamma(i, l) - nbr[l];
                        sc += nbr[l] * log_b(k, l) + non_nbr * log_1mb(k, l);
                    }
                    score[k] = sc;
                }
                const double mx = *std::max_element(score.begin(), score.end());
                double total = 0.0;
                for (int k = 0; k < K; ++k) {
                    score[k] = std::exp(score[k] - mx);
                    total += score[k];
                }
                for (int k = 0; k < K; ++k) {
                    const double fresh = score[k] / total;
                    max_delta = std::max(max_delta, std::fabs(fresh - gamma(i, k)));
                    g_sum[k] += fresh - gamma(i, k);
                    gamma(i, k) = fresh;
                }
            }
            // M-step + bookkeeping at the hardened state.
            SbmParams params = harden(g, gamma, K);
            run.hard_ll_trace.push_back(sbm_log_likelihood(g, params));
            set_log_tables(params.block_matrix);
            if (max_delta < tol) {
                run.converged = true;
                break;
            }
        }
        run.params = harden(g, gamma, K);
        if (run.hard_ll_trace.empty()) {
            run.hard_ll_trace.push_back(sbm_log_likelihood(g, run.params));
        }
        const double final_ll = run.hard_ll_trace.back();
        if (final_ll > best_ll) {
            best_ll = final_ll;
            best = std::move(run);
        }
    }
    return best;
}

// =============================================================================
// Collapsed Metropolis-Hastings
// =============================================================================

namespace {

double pair_term(long long pairs, long long edges, double b1, double b2) {
    return std::lgamma(edges + b1) + std::lgamma(pairs - edges + b2) -
           std::lgamma(pairs + b1 + b2);
}

double collapsed_logpost(const BlockCounts& c, int K, const SbmPriors& priors) {
    double lp = 0.0;
    for (int k = 0; k < K; ++k) lp += std::lgamma(c.sizes[k] + priors.dirichlet_alpha[k]);
    for (int r = 0; r < K; ++r) {
        for (int s = r; s < K; ++s) {
            lp += pair_term(c.pairs(r, s), c.m[r][s], priors.beta1, priors.beta2);
        }
    }
    return lp;
}

void check_priors(const SbmPriors& priors, int K) {
    if (static_cast<int>(priors.dirichlet_alpha.size()) != K) {
        throw std::invalid_argument("sbm priors: dirichlet_alpha length != K");
    }
    for (double a : priors.dirichlet_alpha) {
        if (a <= 0.0) throw std::invalid_argument("sbm priors: alpha must be positive");
    }
    if (priors.beta1 <= 0.0 || priors.beta2 <= 0.0) {
        throw std::invalid_argument("sbm priors: beta parameters must be positive");
    }
}

// Edge counts from node v into each block.
void edges_into_blocks(const Graph& g, const std::vector<int>& z, int v, std::vector<long long>& c) {
    std::fill(c.begin(), c.end(), 0);
    for (const auto& [u, w] : g.neighbors(v)) {
        (void)w;
        ++c[z[u]];
    }
}

void apply_move(BlockCounts& bc, const std::vector<long long>& c, int a, int b) {
    const int K = static_cast<int>(bc.sizes.size());
    for (int l = 0; l < K; ++l) {
        if (l == a) {
            bc.m[a][a] -= c[a];
        } else {
            bc.m[a][l] -= c[l];
            bc.m[l][a] -= c[l];
        }
    }
    for (int l = 0; l < K; ++l) {
        if (l == b) {
            bc.m[b][b] += c[b];
        } else {
            bc.m[b][l] += c[l];
            bc.m[l][b] += c[l];
        }
    }
    --bc.sizes[a];
    ++bc.sizes[b];
}

}  // namespace

double sbm_collapsed_log_posterior(const Graph& g, std::span<const int> z, int K,
                                   const SbmPriors& priors) {
    check_block_count(g, K);
    check_priors(priors, K);
    const BlockCounts c = BlockCounts::from(g, z, K);
    return collapsed_logpost(c, K, priors);
}

SbmMhResult sbm_mh(const Graph& g, int K, const SbmPriors& priors, int iters, int burn_in,
                   std::uint64_t seed, int sample_stride) {
    check_block_count(g, K);
    check_priors(priors, K);
    if (iters <= burn_in) throw std::invalid_argument("sbm_mh: iters must exceed burn_in");
    if (sample_stride < 1) throw std::invalid_argument("sbm_mh: sample_stride must be >= 1");
    const int n = g.num_nodes();

    Rng rng(seed);
    std::vector<int> z(n);
    for (int i = 0; i < n; ++i) z[i] = static_cast<int>(rng.uniform_index(K));

    SbmMhResult res;
    if (K == 1) {
        res.map_partition = Partition::from_assignment(std::vector<int>(n, 0));
        res.map_log_posterior = sbm_collapsed_log_posterior(g, z, K, priors);
        res.acceptance_rate = 0.0;
        return res;
    }

    BlockCounts bc = BlockCounts::from(g, z, K);
    double logpost = collapsed_logpost(bc, K, priors);
    double best_logpost = logpost;
    std::vector<int> best_z = z;
    std::vector<long long> c(K);
    long long accepted = 0;

    res.trace.reserve(iters);
    res.occupied_trace.reserve(iters);
    for (int it = 0; it < iters; ++it) {
        const int v = static_cast<int>(rng.uniform_index(n));
        const int a = z[v];
        int b = static_cast<int>(rng.uniform_index(K - 1));
        if (b >= a) ++b;

        edges_into_blocks(g, z, v, c);
        apply_move(bc, c, a, b);
        const double proposed = collapsed_logpost(bc, K, priors);
        const double delta = proposed - logpost;
        if (delta >= 0.0 || rng.uniform() < std::exp(delta)) {
            z[v] = b;
            logpost = proposed;
            ++accepted;
            if (logpost > best_logpost) {
                best_logpost = logpost;
                best_z = z;
            }
        } else {
            apply_move(bc, c, b, a);  // revert
        }
        res.trace.push_back(logpost);
        int occupied = 0;
        for (int k = 0; k < K; ++k)
            if (bc.sizes[k] > 0) ++occupied;
        res.occupied_trace.push_back(occupied);
        if (it >= burn_in && (it - burn_in) % sample_stride == 0) res.samples.push_back(z);
    }
    res.map_partition = Partition::from_assignment(std::move(best_z)).compacted();
    res.map_log_posterior = best_logpost;
    res.acceptance_rate = static_cast<double>(accepted) / iters;
    return res;
}

// =============================================================================
// Degree-corrected SBM
// =============================================================================

namespace {

// Endpoint-convention block counts: E[r][s] symmetric, E[r][r] twice the
// internal edges; e_r = sum_s E[r][s] is the block degree sum.
struct EndpointCounts {
    std::vector<std::vector<long long>> e;
    std::vector<long long> row;

    static EndpointCounts from(const Graph& g, std::span<const int> z, int K) {
        EndpointCounts c;
        c.e.assign(K, std::vector<long long>(K, 0));
        c.row.assign(K, 0);
        for (const Edge& ed : g.edges()) {
            const int r = z[ed.u], s = z[ed.v];
            if (r == s) {
                c.e[r][r] += 2;
            } else {
                ++c.e[r][s];
                ++c.e[s][r];
            }
            c.row[r] += 1;
            c.row[s] += 1;
        }
        return c;
    }

    double l_kn() const {
        const int K = static_cast<int>(row.size());
        double l = 0.0;
        for (int r = 0; r < K; ++r) {
            for (int s = 0; s < K; ++s) {
                if (e[r][s] == 0) continue;
                l += e[r][s] * std::log(static_cast<double>(e[r][s]) /
                                        (static_cast<double>(row[r]) * row[s]));
            }
        }
        return l;
    }
};

}  // namespace

double dcsbm_log_likelihood(const Graph& g, std::span<const int> z, DcSbmVariant variant) {
    if (z.size() != static_cast<std::size_t>(g.num_nodes())) {
        throw std::invalid_argument("dcsbm: membership size mismatch");
    }
    int K = 0;
    for (int b : z) K = std::max(K, b + 1);
    const EndpointCounts c = EndpointCounts::from(g, z, K);
    if (variant == DcSbmVariant::kn) return c.l_kn();
    // Microcanonical: M + sum_k N_k ln(k!) + 1/2 sum_rs e_rs ln(e_rs/(e_r e_s)).
    const double m = static_cast<double>(g.num_edges());
    std::vector<long long> degree_hist;
    for (int v = 0; v < g.num_nodes(); ++v) {
        const int d = g.degree(v);
        if (d >= static_cast<int>(degree_hist.size())) degree_hist.resize(d + 1, 0);
        ++degree_hist[d];
    }
    double deg_term = 0.0;
    for (std::size_t k = 0; k < degree_hist.size(); ++k) {
        if (degree_hist[k] > 0) deg_term += degree_hist[k] * std::lgamma(static_cast<double>(k) + 1.0);
    }
    return m + deg_term + 0.5 * c.l_kn();
}

double dcsbm_edge_probability(double theta_i, double theta_j, double omega_rs) {
    if (theta_i < 0.0 || theta_j < 0.0 || omega_rs < 0.0) {
        throw std::domain_error("dcsbm_edge_probability: negative input");
    }
    return -std::expm1(-theta_i * theta_j * omega_rs);
}

DcSbmParams dcsbm_fit_params(const Graph& g, std::span<const int> z, int K) {
    check_block_count(g, K);
    DcSbmParams params;
    params.memberships.assign(z.begin(), z.end());
    params.degree_propensity.resize(g.num_nodes());
    std::vector<double> block_degree(K, 0.0);
    std::vector<int> block_size(K, 0);
    for (int v = 0; v < g.num_nodes(); ++v) {
        block_degree[z[v]] += g.degree(v);
        ++block_size[z[v]];
    }
    for (int v = 0; v < g.num_nodes(); ++v) {
        const double total = block_degree[z[v]];
        params.degree_propensity[v] =
            total > 0.0 ? g.degree(v) / total : 1.0 / block_size[z[v]];
    }
    const EndpointCounts c = EndpointCounts::from(g, z, K);
    params.block_rates = DenseMatrix(K, K);
    for (int r = 0; r < K; ++r)
        for (int s = 0; s < K; ++s) params.block_rates(r, s) = static_cast<double>(c.e[r][s]);
    return params;
}

Graph generate_sbm(int n, std::span<const int> z, const DenseMatrix& block_matrix,
                   std::uint64_t seed) {
    if (z.size() != static_cast<std::size_t>(n)) {
        throw std::invalid_argument("generate_sbm: membership size mismatch");
    }
    for (std::size_t i = 0; i < block_matrix.size(); ++i) {
        const double b = block_matrix.data()[i];
        if (b < 0.0 || b > 1.0) throw std::domain_error("generate_sbm: probability outside [0,1]");
    }
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (rng.uniform() < block_matrix(z[i], z[j])) edges.push_back({i, j, 1.0});
        }
    }
    return Graph::from_edges(edges, n);
}

DcSbmMhResult dcsbm_mh(const Graph& g, int K, int iters, int burn_in, std::uint64_t seed) {
    check_block_count(g, K);
    if (iters <= burn_in) throw std::invalid_argument("dcsbm_mh: iters must exceed burn_in");
    const int n = g.num_nodes();
    DcSbmMhResult res;
    if (K == 1) {
        res.partition = Partition::from_assignment(std::vector<int>(n, 0));
        std::vector<int> z(n, 0);
        res.best_objective = dcsbm_log_likelihood(g, z, DcSbmVariant::kn);
        return res;
    }

    Rng rng(seed);
    std::vector<int> z(n);
    std::vector<int> block_sizes(K, 0);
    for (int i = 0; i < n; ++i) {
        z[i] = static_cast<int>(rng.uniform_index(K));
        ++block_sizes[z[i]];
    }
    EndpointCounts ec = EndpointCounts::from(g, z, K);
    double obj = ec.l_kn();
    double best = obj;
    std::vector<int> best_z = z;
    std::vector<long long> c(K);
    long long accepted = 0;

    auto apply = [&](int v, int a, int b) {
        const int d = g.degree(v);
        for (int l = 0; l < K; ++l) {
            if (l == a) {
                ec.e[a][a] -= 2 * c[a];
            } else {
                ec.e[a][l] -= c[l];
                ec.e[l][a] -= c[l];
            }
        }
        for (int l = 0; l < K; ++l) {
            if (l == b) {
                ec.e[b][b] += 2 * c[b];
            } else {
                ec.e[b][l] += c[l];
                ec.e[l][b] += c[l];
            }
        }
        ec.row[a] -= d;
        ec.row[b] += d;
    };

    for (int it = 0; it < iters; ++it) {
        const int v = static_cast<int>(rng.uniform_index(n));
        const int a = z[v];
        int b = static_cast<int>(rng.uniform_index(K - 1));
        if (b >= a) ++b;
        std::fill(c.begin(), c.end(), 0);
        for (const auto& [u, w] : g.neighbors(v)) {
            (void)w;
            ++c[z[u]];
        }
        apply(v, a, b);
        const double proposed = ec.l_kn();
        const double delta = proposed - obj;
        if (delta >= 0.0 || rng.uniform() < std::exp(delta)) {
            z[v] = b;
            --block_sizes[a];
            ++block_sizes[b];
            obj = proposed;
            ++accepted;
            if (obj > best) {
                best = obj;
                best_z = z;
            }
        } else {
            apply(v, b, a);
        }
        res.trace.push_back(obj);
        int occupied = 0;
        for (int k = 0; k < K; ++k)
            if (block_sizes[k] > 0) ++occupied;
        res.occupied_trace.push_back(occupied);
    }
    res.partition = Partition::from_assignment(std::move(best_z)).compacted();
    res.best_objective = best;
    res.acceptance_rate = static_cast<double>(accepted) / iters;
    return res;
}

}  // namespace graphclust
