#include "graphclust/deep.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "graphclust/linalg.hpp"

namespace graphclust {

namespace {

DenseMatrix binary_adjacency(const Graph& g) {
    DenseMatrix a(g.num_nodes(), g.num_nodes());
    for (const Edge& e : g.edges()) {
        a(e.u, e.v) = 1.0;
        a(e.v, e.u) = 1.0;
    }
    return a;
}

int hidden_width(const DeepHyper& hyper) {
    return hyper.hidden_dim > 0 ? hyper.hidden_dim : hyper.latent_dim;
}

std::vector<Parameter> init_gcn_weights(std::size_t in_dim, const DeepHyper& hyper, Rng& rng) {
    if (hyper.gcn_layers < 1) throw std::invalid_argument("deep: gcn_layers must be >= 1");
    std::vector<Parameter> weights;
    std::size_t cur = in_dim;
    for (int l = 0; l < hyper.gcn_layers; ++l) {
        const std::size_t out =
            (l + 1 == hyper.gcn_layers) ? hyper.latent_dim : hidden_width(hyper);
        weights.emplace_back(glorot_uniform(cur, out, rng));
        cur = out;
    }
    return weights;
}

// Tape-side GCN forward; returns each layer's output (for MVGRL pooling).
std::vector<Tensor> gcn_layers_on_tape(Tape& tape, Tensor prop, Tensor x,
                                       std::vector<Tensor>& weights) {
    std::vector<Tensor> outs;
    Tensor h = x;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        Tensor lin = tape.matmul(prop, tape.matmul(h, weights[l]));
        h = (l + 1 == weights.size()) ? lin : tape.relu(lin);
        outs.push_back(h);
    }
    return outs;
}

DenseMatrix prepared_features(const Dataset& ds, const DeepHyper& hyper) {
    return hyper.normalize_features ? l2_normalize_rows(ds.features) : ds.features;
}

double reconstruction_pos_weight(const Graph& g, const DeepHyper& hyper) {
    if (!hyper.pos_weight) return 1.0;
    const double n = g.num_nodes();
    const double pos = 2.0 * static_cast<double>(g.num_edges());
    if (pos == 0.0) return 1.0;
    return (n * n - pos) / pos;
}

}  // namespace

DenseMatrix l2_normalize_rows(const DenseMatrix& m) {
    DenseMatrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) norm += m(i, j) * m(i, j);
        norm = std::sqrt(norm);
        if (norm > 1e-12) {
            for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= norm;
        }
    }
    return out;
}

DenseMatrix gcn_forward(const GcnEncoder& enc, const DenseMatrix& features) {
    DenseMatrix h = features;
    for (std::size_t l = 0; l < enc.weights.size(); ++l) {
        h = matmul(enc.propagation, matmul(h, enc.weights[l]));
        if (l + 1 != enc.weights.size()) {
            for (std::size_t i = 0; i < h.size(); ++i)
                if (h.data()[i] < 0.0) h.data()[i] = 0.0;
        }
    }
    return h;
}

GaeModel gae_train(const Dataset& ds, const DeepHyper& hyper) {
    const int n = ds.graph.num_nodes();
    Rng rng(hyper.seed);
    const DenseMatrix prop = matrix_view(ds.graph, MatrixKind::normalized_adjacency_self_loops);
    const DenseMatrix x = prepared_features(ds, hyper);
    const DenseMatrix targets = binary_adjacency(ds.graph);
    const double pos_w = reconstruction_pos_weight(ds.graph, hyper);

    std::vector<Parameter> weights = init_gcn_weights(x.cols(), hyper, rng);
    Adam adam(hyper.lr);
    GaeModel model;
    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        try {
            Tape tape;
            Tensor tp = tape.constant(prop);
            Tensor tx = tape.constant(x);
            std::vector<Tensor> tw;
            for (Parameter& w : weights) tw.push_back(tape.input(w.value));
            Tensor z = gcn_layers_on_tape(tape, tp, tx, tw).back();
            Tensor logits = tape.matmul(z, tape.transpose(z));
            Tensor loss = tape.bce_with_logits_mean(logits, targets, pos_w);
            tape.backward(loss);
            std::vector<Parameter*> params;
            std::vector<const DenseMatrix*> grads;
            for (std::size_t i = 0; i < weights.size(); ++i) {
                params.push_back(&weights[i]);
                grads.push_back(&tw[i].grad());
            }
            adam.step(params, grads);
            model.trace.loss.push_back(loss.value()(0, 0));
            model.trace.numeric_faults += tape.numeric_faults();
        } catch (const NumericFault& fault) {
            throw NumericFault("gae_train: " + std::string(fault.what()) + " at epoch " +
                               std::to_string(epoch));
        }
    }
    model.encoder.propagation = prop;
    for (Parameter& w : weights) model.encoder.weights.push_back(std::move(w.value));
    model.normalized_features = hyper.normalize_features;
    (void)n;
    return model;
}

ArgaModel arga_train(const Dataset& ds, const DeepHyper& hyper) {
    const int n = ds.graph.num_nodes();
    Rng rng(hyper.seed);
    const DenseMatrix prop = matrix_view(ds.graph, MatrixKind::normalized_adjacency_self_loops);
    const DenseMatrix x = prepared_features(ds, hyper);
    const DenseMatrix targets = binary_adjacency(ds.graph);
    const double pos_w = reconstruction_pos_weight(ds.graph, hyper);
    const int dh = hyper.latent_dim;

    std::vector<Parameter> enc = init_gcn_weights(x.cols(), hyper, rng);
    // Discriminator MLP d_h -> disc_hidden -> 1.
    std::vector<Parameter> disc;
    disc.emplace_back(glorot_uniform(dh, hyper.disc_hidden, rng));
    disc.emplace_back(DenseMatrix(1, hyper.disc_hidden));
    disc.emplace_back(glorot_uniform(hyper.disc_hidden, 1, rng));
    disc.emplace_back(DenseMatrix(1, 1));

    auto disc_logits = [&](Tape& tape, Tensor z, std::vector<Tensor>& dw) {
        Tensor h = tape.relu(tape.add_row_broadcast(tape.matmul(z, dw[0]), dw[1]));
        return tape.add_row_broadcast(tape.matmul(h, dw[2]), dw[3]);
    };

    Adam adam_enc(hyper.lr);
    Adam adam_disc(hyper.lr);
    ArgaModel model;
    const DenseMatrix ones_col(n, 1, 1.0);
    const DenseMatrix zeros_col(n, 1, 0.0);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        try {
            // Current encoding, detached for the discriminator phase.
            GcnEncoder snapshot;
            snapshot.propagation = prop;
            for (const Parameter& w : enc) snapshot.weights.push_back(w.value);
            const DenseMatrix z_detached = gcn_forward(snapshot, x);

            for (int k = 0; k < hyper.disc_iters; ++k) {
                DenseMatrix z_prior(n, dh);
                for (std::size_t i = 0; i < z_prior.size(); ++i) z_prior.data()[i] = rng.normal();
                Tape tape;
                std::vector<Tensor> dw;
                for (Parameter& w : disc) dw.push_back(tape.input(w.value));
                Tensor logit_prior = disc_logits(tape, tape.constant(z_prior), dw);
                Tensor logit_enc = disc_logits(tape, tape.constant(z_detached), dw);
                // prior samples labeled true, encodings labeled false
                Tensor loss = tape.add(tape.bce_with_logits_mean(logit_prior, ones_col),
                                       tape.bce_with_logits_mean(logit_enc, zeros_col));
                tape.backward(loss);
                std::vector<Parameter*> params;
                std::vector<const DenseMatrix*> grads;
                for (std::size_t i = 0; i < disc.size(); ++i) {
                    params.push_back(&disc[i]);
                    grads.push_back(&dw[i].grad());
                }
                adam_disc.step(params, grads);
                model.disc_trace.loss.push_back(loss.value()(0, 0));
                model.disc_trace.numeric_faults += tape.numeric_faults();
            }

            // Encoder step: reconstruction + generator term, discriminator frozen.
            Tape tape;
            Tensor tp = tape.constant(prop);
            Tensor tx = tape.constant(x);
            std::vector<Tensor> tw;
            for (Parameter& w : enc) tw.push_back(tape.input(w.value));
            std::vector<Tensor> dw;
            for (Parameter& w : disc) dw.push_back(tape.constant(w.value));
            Tensor z = gcn_layers_on_tape(tape, tp, tx, tw).back();
            Tensor logits = tape.matmul(z, tape.transpose(z));
            Tensor loss = tape.bce_with_logits_mean(logits, targets, pos_w);
            Tensor gen_logits = disc_logits(tape, z, dw);
            Tensor gen_loss =
                hyper.saturating_generator
                    ? tape.scalar_mul(tape.bce_with_logits_mean(gen_logits, zeros_col), -1.0)
                    : tape.bce_with_logits_mean(gen_logits, ones_col);
            loss = tape.add(loss, gen_loss);
            tape.backward(loss);
            std::vector<Parameter*> params;
            std::vector<const DenseMatrix*> grads;
            for (std::size_t i = 0; i < enc.size(); ++i) {
                params.push_back(&enc[i]);
                grads.push_back(&tw[i].grad());
            }
            adam_enc.step(params, grads);
            model.trace.loss.push_back(loss.value()(0, 0));
            model.trace.numeric_faults += tape.numeric_faults();
        } catch (const NumericFault& fault) {
            throw NumericFault("arga_train: " + std::string(fault.what()) + " at epoch " +
                               std::to_string(epoch));
        }
    }
    model.encoder.propagation = prop;
    for (Parameter& w : enc) model.encoder.weights.push_back(std::move(w.value));
    for (Parameter& w : disc) model.discriminator.push_back(std::move(w.value));
    model.normalized_features = hyper.normalize_features;
    return model;
}

DenseMatrix ppr_diffusion(const Graph& g, double alpha) {
    if (alpha <= 0.0 || alpha >= 1.0) {
        throw std::invalid_argument("ppr_diffusion: alpha must lie in (0,1), got " +
                                    std::to_string(alpha));
    }
    for (int v = 0; v < g.num_nodes(); ++v) {
        if (g.degree(v) == 0) {
            throw std::domain_error("ppr_diffusion: node " + std::to_string(v) + " is isolated");
        }
    }
    const DenseMatrix norm_adj = matrix_view(g, MatrixKind::normalized_adjacency);
    DenseMatrix system = DenseMatrix::identity(g.num_nodes());
    for (std::size_t i = 0; i < system.size(); ++i)
        system.data()[i] -= (1.0 - alpha) * norm_adj.data()[i];
    return scale(inverse(system), alpha);
}

MvgrlModel mvgrl_train(const Dataset& ds, const DeepHyper& hyper) {
    const int n = ds.graph.num_nodes();
    Rng rng(hyper.seed);
    const int dh = hyper.latent_dim;
    if (hidden_width(hyper) != dh) {
        throw std::invalid_argument("mvgrl: pooling requires hidden width == latent width");
    }
    const DenseMatrix prop_adj =
        matrix_view(ds.graph, MatrixKind::normalized_adjacency_self_loops);
    const DenseMatrix prop_diff = ppr_diffusion(ds.graph, hyper.ppr_alpha);
    const DenseMatrix x = prepared_features(ds, hyper);

    std::vector<Parameter> enc_a = init_gcn_weights(x.cols(), hyper, rng);
    std::vector<Parameter> enc_b = init_gcn_weights(x.cols(), hyper, rng);
    Parameter mlp_w(glorot_uniform(dh, dh, rng));
    Parameter mlp_b{DenseMatrix(1, dh)};
    Parameter pool_w(glorot_uniform(static_cast<std::size_t>(hyper.gcn_layers) * dh, dh, rng));
    Parameter disc_w(glorot_uniform(dh, dh, rng));
    Parameter disc_b{DenseMatrix(1, 1)};

    // Corrupted features: one fixed row shuffle.
    DenseMatrix x_c(n, x.cols());
    {
        auto perm = rng.permutation(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (std::size_t j = 0; j < x.cols(); ++j) x_c(i, j) = x(perm[i], j);
    }

    Adam adam(hyper.lr);
    MvgrlModel model;
    const DenseMatrix ones_col(n, 1, 1.0);
    const DenseMatrix zeros_col(n, 1, 0.0);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        try {
            Tape tape;
            Tensor tpa = tape.constant(prop_adj);
            Tensor tpb = tape.constant(prop_diff);
            Tensor tx = tape.constant(x);
            Tensor txc = tape.constant(x_c);
            std::vector<Tensor> twa, twb;
            for (Parameter& w : enc_a) twa.push_back(tape.input(w.value));
            for (Parameter& w : enc_b) twb.push_back(tape.input(w.value));
            Tensor t_mlp_w = tape.input(mlp_w.value);
            Tensor t_mlp_b = tape.input(mlp_b.value);
            Tensor t_pool_w = tape.input(pool_w.value);
            Tensor t_disc_w = tape.input(disc_w.value);
            Tensor t_disc_b = tape.input(disc_b.value);

            auto project = [&](Tensor h) {
                return tape.add_row_broadcast(tape.matmul(h, t_mlp_w), t_mlp_b);
            };
            auto pool = [&](const std::vector<Tensor>& layers) {
                Tensor cat = tape.mean_rows(layers[0]);
                for (std::size_t l = 1; l < layers.size(); ++l)
                    cat = tape.concat_cols(cat, tape.mean_rows(layers[l]));
                return tape.sigmoid(tape.matmul(cat, t_pool_w));  // 1 x d_h
            };
            auto score = [&](Tensor z_nodes, Tensor z_graph) {
                Tensor logits = tape.bilinear(z_nodes, t_disc_w, tape.transpose(z_graph));
                return tape.add_row_broadcast(logits, t_disc_b);
            };

            auto layers_a = gcn_layers_on_tape(tape, tpa, tx, twa);
            auto layers_b = gcn_layers_on_tape(tape, tpb, tx, twb);
            Tensor za = project(layers_a.back());
            Tensor zb = project(layers_b.back());
            auto layers_ac = gcn_layers_on_tape(tape, tpa, txc, twa);
            auto layers_bc = gcn_layers_on_tape(tape, tpb, txc, twb);
            Tensor zac = project(layers_ac.back());
            Tensor zbc = project(layers_bc.back());
            Tensor zg_a = pool(layers_a);
            Tensor zg_b = pool(layers_b);

            Tensor loss = tape.add(
                tape.add(tape.bce_with_logits_mean(score(za, zg_b), ones_col),
                         tape.bce_with_logits_mean(score(zac, zg_b), zeros_col)),
                tape.add(tape.bce_with_logits_mean(score(zb, zg_a), ones_col),
                         tape.bce_with_logits_mean(score(zbc, zg_a), zeros_col)));
            tape.backward(loss);

            std::vector<Parameter*> params;
            std::vector<const DenseMatrix*> grads;
            for (std::size_t i = 0; i < enc_a.size(); ++i) {
                params.push_back(&enc_a[i]);
                grads.push_back(&twa[i].grad());
            }
            for (std::size_t i = 0; i < enc_b.size(); ++i) {
                params.push_back(&enc_b[i]);
                grads.push_back(&twb[i].grad());
            }
            params.push_back(&mlp_w);
            grads.push_back(&t_mlp_w.grad());
            params.push_back(&mlp_b);
            grads.push_back(&t_mlp_b.grad());
            params.push_back(&pool_w);
            grads.push_back(&t_pool_w.grad());
            params.push_back(&disc_w);
            grads.push_back(&t_disc_w.grad());
            params.push_back(&disc_b);
            grads.push_back(&t_disc_b.grad());
            adam.step(params, grads);
            model.trace.loss.push_back(loss.value()(0, 0));
            model.trace.numeric_faults += tape.numeric_faults();
        } catch (const NumericFault& fault) {
            throw NumericFault("mvgrl_train: " + std::string(fault.what()) + " at epoch " +
                               std::to_string(epoch));
        }
    }

    model.encoder_adj.propagation = prop_adj;
    for (Parameter& w : enc_a) model.encoder_adj.weights.push_back(std::move(w.value));
    model.encoder_diff.propagation = prop_diff;
    for (Parameter& w : enc_b) model.encoder_diff.weights.push_back(std::move(w.value));
    model.mlp_w = std::move(mlp_w.value);
    model.mlp_b = std::move(mlp_b.value);
    model.pool_w = std::move(pool_w.value);
    model.disc_w = std::move(disc_w.value);
    model.disc_b = std::move(disc_b.value);
    model.normalized_features = hyper.normalize_features;
    return model;
}

namespace {

DenseMatrix mlp_project(const DenseMatrix& h, const DenseMatrix& w, const DenseMatrix& b) {
    DenseMatrix out = matmul(h, w);
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += b(0, j);
    return out;
}

}  // namespace

DenseMatrix embed(const GaeModel& model, const Dataset& ds) {
    return gcn_forward(model.encoder,
                       model.normalized_features ? l2_normalize_rows(ds.features) : ds.features);
}

DenseMatrix embed(const ArgaModel& model, const Dataset& ds) {
    return gcn_forward(model.encoder,
                       model.normalized_features ? l2_normalize_rows(ds.features) : ds.features);
}

DenseMatrix embed(const MvgrlModel& model, const Dataset& ds) {
    const DenseMatrix x =
        model.normalized_features ? l2_normalize_rows(ds.features) : ds.features;
    DenseMatrix za = mlp_project(gcn_forward(model.encoder_adj, x), model.mlp_w, model.mlp_b);
    DenseMatrix zb = mlp_project(gcn_forward(model.encoder_diff, x), model.mlp_w, model.mlp_b);
    return add(za, zb);
}

EncodeResult encode_and_cluster(const DenseMatrix& embeddings, std::size_t k, std::uint64_t seed,
                                int restarts) {
    if (restarts < 1) throw std::invalid_argument("encode_and_cluster: restarts must be >= 1");
    Rng rng(seed);
    EncodeResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        const std::uint64_t sub_seed = rng.next_u64();
        KmeansResult res = kmeans(embeddings, k, sub_seed);
        if (res.inertia < best.inertia) {
            best.inertia = res.inertia;
            best.partition = std::move(res.partition);
        }
    }
    best.embeddings = embeddings;
    return best;
}

}  // namespace graphclust
