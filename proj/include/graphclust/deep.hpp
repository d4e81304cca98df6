#pragma once

#include <cstdint>
#include <vector>

#include "graphclust/autodiff.hpp"
#include "graphclust/dense_matrix.hpp"
#include "graphclust/graph.hpp"
#include "graphclust/ingest.hpp"
#include "graphclust/kmeans.hpp"

namespace graphclust {

/// Hyperparameters shared by the deep models. Factories carry the
/// best-known per-model values (latent width, epochs).
struct DeepHyper {
    double lr = 0.001;
    int latent_dim = 32;
    int hidden_dim = 0;  // 0 -> same as latent_dim
    int epochs = 50;
    int gcn_layers = 2;
    int disc_iters = 5;       // ARGA discriminator steps per epoch
    int disc_hidden = 64;     // ARGA discriminator width
    double ppr_alpha = 0.2;   // MVGRL diffusion restart probability
    bool normalize_features = true;
    bool pos_weight = false;  // reweight positive pairs in the reconstruction loss
    bool saturating_generator = false;
    std::uint64_t seed = 0;
    int kmeans_restarts = 10;

    static DeepHyper gae() { return {}; }
    static DeepHyper arga() { return {}; }
    static DeepHyper mvgrl() {
        DeepHyper h;
        h.latent_dim = 128;
        h.epochs = 40;
        return h;
    }
};

/// Trained GCN stack: layer weights plus the cached propagation matrix.
struct GcnEncoder {
    std::vector<DenseMatrix> weights;
    DenseMatrix propagation;
};

/// Forward pass H_{l+1} = act(P H_l W_l), relu on hidden layers, identity on
/// the output layer.
DenseMatrix gcn_forward(const GcnEncoder& enc, const DenseMatrix& features);

struct TrainTrace {
    std::vector<double> loss;
    int numeric_faults = 0;
};

struct GaeModel {
    GcnEncoder encoder;
    TrainTrace trace;
    bool normalized_features = true;
};

struct ArgaModel {
    GcnEncoder encoder;
    std::vector<DenseMatrix> discriminator;  // W1, b1, W2, b2
    TrainTrace trace;
    TrainTrace disc_trace;
    bool normalized_features = true;
};

struct MvgrlModel {
    GcnEncoder encoder_adj;
    GcnEncoder encoder_diff;
    DenseMatrix mlp_w, mlp_b;   // shared projection head
    DenseMatrix pool_w;         // (L*d_h) x d_h readout
    DenseMatrix disc_w;         // bilinear discriminator
    DenseMatrix disc_b;         // 1x1 bias
    TrainTrace trace;
    bool normalized_features = true;
};

/// Graph autoencoder: full-graph epochs minimizing the reconstruction
/// cross-entropy of sigma(Z Z^T) against the adjacency.
GaeModel gae_train(const Dataset& ds, const DeepHyper& hyper);

/// Adversarially regularized variant: per epoch, K discriminator steps
/// against standard-normal samples, then one encoder step on
/// reconstruction + generator loss.
ArgaModel arga_train(const Dataset& ds, const DeepHyper& hyper);

/// Personalized-PageRank diffusion
/// S = alpha (I - (1-alpha) D^{-1/2} A D^{-1/2})^{-1}.
/// Requires 0 < alpha < 1 and no isolated nodes.
DenseMatrix ppr_diffusion(const Graph& g, double alpha);

/// Contrastive two-view model: adjacency and diffusion encoders with a
/// shared projection head, trained to tell (nodes, other view's graph
/// vector) pairs from feature-shuffled corruptions.
MvgrlModel mvgrl_train(const Dataset& ds, const DeepHyper& hyper);

/// Node embeddings for clustering/export.
DenseMatrix embed(const GaeModel& model, const Dataset& ds);
DenseMatrix embed(const ArgaModel& model, const Dataset& ds);
DenseMatrix embed(const MvgrlModel& model, const Dataset& ds);

struct EncodeResult {
    Partition partition;
    DenseMatrix embeddings;
    double inertia = 0.0;
};

/// k-means over embeddings, best inertia over `restarts` seeded restarts.
EncodeResult encode_and_cluster(const DenseMatrix& embeddings, std::size_t k, std::uint64_t seed,
                                int restarts = 10);

/// Feature preprocessing used before training: L2-normalize rows (zero rows
/// stay zero).
DenseMatrix l2_normalize_rows(const DenseMatrix& m);

}  // namespace graphclust
