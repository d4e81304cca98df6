#include "graphclust/autodiff.hpp"

#include <cmath>
#include <string>

namespace graphclust {

namespace {

constexpr double kLogClamp = 1e-12;

double sigmoid_scalar(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double softplus(double x) {
    // log(1 + e^x) without overflow.
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace

const DenseMatrix& Tensor::value() const { return tape_->node(id_).value; }
const DenseMatrix& Tensor::grad() const { return tape_->node(id_).grad; }

void Tape::check(Tensor t) const {
    if (!t.valid() || t.tape_ != this || t.id_ < 0 ||
        t.id_ >= static_cast<int>(nodes_.size())) {
        throw std::invalid_argument("tape: tensor does not belong to this tape");
    }
}

int Tape::push(Node node, const char* op_name) {
    if (!all_finite(node.value)) {
        throw NumericFault(std::string("numeric fault in op '") + op_name + "'");
    }
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size() - 1);
}

DenseMatrix& Tape::grad_of(int id) {
    Node& n = nodes_[id];
    if (!n.grad_alloc) {
        n.grad = DenseMatrix(n.value.rows(), n.value.cols());
        n.grad_alloc = true;
    }
    return n.grad;
}

Tensor Tape::input(DenseMatrix value, bool requires_grad) {
    Node n;
    n.op = Op::leaf;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    return Tensor(this, push(std::move(n), "input"));
}

Tensor Tape::matmul(Tensor a, Tensor b) {
    check(a);
    check(b);
    Node n;
    n.op = Op::matmul;
    n.a = a.id_;
    n.b = b.id_;
    n.value = graphclust::matmul(a.value(), b.value());
    n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
    return Tensor(this, push(std::move(n), "matmul"));
}

Tensor Tape::add(Tensor a, Tensor b) {
    check(a);
    check(b);
    Node n;
    n.op = Op::add;
    n.a = a.id_;
    n.b = b.id_;
    n.value = graphclust::add(a.value(), b.value());
    n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
    return Tensor(this, push(std::move(n), "add"));
}

Tensor Tape::add_row_broadcast(Tensor a, Tensor row) {
    check(a);
    check(row);
    const DenseMatrix& av = a.value();
    const DenseMatrix& rv = row.value();
    if (rv.rows() != 1 || rv.cols() != av.cols()) {
        throw std::invalid_argument("add_row_broadcast: bias must be 1 x " +
                                    std::to_string(av.cols()) + ", got " +
                                    std::to_string(rv.rows()) + "x" + std::to_string(rv.cols()));
    }
    Node n;
    n.op = Op::add_row_broadcast;
    n.a = a.id_;
    n.b = row.id_;
    n.value = av;
    for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) n.value(i, j) += rv(0, j);
    n.requires_grad = node(a.id_).requires_grad || node(row.id_).requires_grad;
    return Tensor(this, push(std::move(n), "add_row_broadcast"));
}

Tensor Tape::transpose(Tensor a) {
    check(a);
    Node n;
    n.op = Op::transpose;
    n.a = a.id_;
    n.value = graphclust::transpose(a.value());
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "transpose"));
}

Tensor Tape::sigmoid(Tensor a) {
    check(a);
    Node n;
    n.op = Op::sigmoid;
    n.a = a.id_;
    const DenseMatrix& av = a.value();
    n.value = DenseMatrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) n.value.data()[i] = sigmoid_scalar(av.data()[i]);
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "sigmoid"));
}

Tensor Tape::relu(Tensor a) {
    check(a);
    Node n;
    n.op = Op::relu;
    n.a = a.id_;
    const DenseMatrix& av = a.value();
    n.value = DenseMatrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i)
        n.value.data()[i] = av.data()[i] > 0.0 ? av.data()[i] : 0.0;
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "relu"));
}

Tensor Tape::log(Tensor a) {
    check(a);
    Node n;
    n.op = Op::log;
    n.a = a.id_;
    const DenseMatrix& av = a.value();
    n.value = DenseMatrix(av.rows(), av.cols());
    for (std::size_t i = 0; i < av.size(); ++i) {
        double x = av.data()[i];
        if (x < kLogClamp) {
            x = kLogClamp;
            ++numeric_faults_;
        }
        n.value.data()[i] = std::log(x);
    }
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "log"));
}

Tensor Tape::mean_rows(Tensor a) {
    check(a);
    Node n;
    n.op = Op::mean_rows;
    n.a = a.id_;
    const DenseMatrix& av = a.value();
    n.value = DenseMatrix(1, av.cols());
    for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) n.value(0, j) += av(i, j);
    for (std::size_t j = 0; j < av.cols(); ++j) n.value(0, j) /= static_cast<double>(av.rows());
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "mean_rows"));
}

Tensor Tape::concat_cols(Tensor a, Tensor b) {
    check(a);
    check(b);
    const DenseMatrix& av = a.value();
    const DenseMatrix& bv = b.value();
    if (av.rows() != bv.rows()) {
        throw std::invalid_argument("concat_cols: row mismatch " + std::to_string(av.rows()) +
                                    " vs " + std::to_string(bv.rows()));
    }
    Node n;
    n.op = Op::concat_cols;
    n.a = a.id_;
    n.b = b.id_;
    n.value = DenseMatrix(av.rows(), av.cols() + bv.cols());
    for (std::size_t i = 0; i < av.rows(); ++i) {
        for (std::size_t j = 0; j < av.cols(); ++j) n.value(i, j) = av(i, j);
        for (std::size_t j = 0; j < bv.cols(); ++j) n.value(i, av.cols() + j) = bv(i, j);
    }
    n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
    return Tensor(this, push(std::move(n), "concat_cols"));
}

Tensor Tape::scalar_mul(Tensor a, double c) {
    check(a);
    Node n;
    n.op = Op::scalar_mul;
    n.a = a.id_;
    n.scalar = c;
    n.value = scale(a.value(), c);
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "scalar_mul"));
}

Tensor Tape::sum_all(Tensor a) {
    check(a);
    Node n;
    n.op = Op::sum_all;
    n.a = a.id_;
    n.value = DenseMatrix(1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value().data()[i];
    n.value(0, 0) = s;
    n.requires_grad = node(a.id_).requires_grad;
    return Tensor(this, push(std::move(n), "sum_all"));
}

Tensor Tape::elementwise_mul(Tensor a, Tensor b) {
    check(a);
    check(b);
    Node n;
    n.op = Op::elementwise_mul;
    n.a = a.id_;
    n.b = b.id_;
    n.value = hadamard(a.value(), b.value());
    n.requires_grad = node(a.id_).requires_grad || node(b.id_).requires_grad;
    return Tensor(this, push(std::move(n), "elementwise_mul"));
}

Tensor Tape::bilinear(Tensor x, Tensor w, Tensor y) {
    return matmul(x, matmul(w, y));
}

Tensor Tape::bce_with_logits_mean(Tensor logits, const DenseMatrix& targets, double pos_weight) {
    check(logits);
    const DenseMatrix& lv = logits.value();
    if (!lv.same_shape(targets)) {
        throw std::invalid_argument("bce_with_logits_mean: targets shape mismatch");
    }
    Node n;
    n.op = Op::bce;
    n.a = logits.id_;
    n.aux = targets;
    n.scalar = pos_weight;
    n.value = DenseMatrix(1, 1);
    double s = 0.0;
    for (std::size_t i = 0; i < lv.size(); ++i) {
        const double t = targets.data()[i];
        const double l = lv.data()[i];
        s += pos_weight * t * softplus(-l) + (1.0 - t) * softplus(l);
    }
    n.value(0, 0) = s / static_cast<double>(lv.size());
    n.requires_grad = node(logits.id_).requires_grad;
    return Tensor(this, push(std::move(n), "bce_with_logits_mean"));
}

void Tape::backward(Tensor loss) {
    check(loss);
    const Node& top = node(loss.id_);
    if (top.value.rows() != 1 || top.value.cols() != 1) {
        throw std::invalid_argument("backward: loss must be 1x1, got " +
                                    std::to_string(top.value.rows()) + "x" +
                                    std::to_string(top.value.cols()));
    }

    // Per-pass gradient buffers: intermediates live only for this pass,
    // leaves accumulate into their persistent grad storage.
    std::vector<DenseMatrix> local(loss.id_ + 1);
    std::vector<char> alloc(loss.id_ + 1, 0);
    auto local_grad = [&](int id) -> DenseMatrix& {
        if (!alloc[id]) {
            local[id] = DenseMatrix(nodes_[id].value.rows(), nodes_[id].value.cols());
            alloc[id] = 1;
        }
        return local[id];
    };
    local_grad(loss.id_)(0, 0) = 1.0;

    for (int id = loss.id_; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!alloc[id] || !n.requires_grad) continue;
        if (n.op == Op::leaf) {
            DenseMatrix& sink = grad_of(id);
            for (std::size_t i = 0; i < sink.size(); ++i) sink.data()[i] += local[id].data()[i];
            continue;
        }
        const DenseMatrix& g = local[id];
        const bool need_a = n.a >= 0 && nodes_[n.a].requires_grad;
        const bool need_b = n.b >= 0 && nodes_[n.b].requires_grad;
        switch (n.op) {
            case Op::matmul: {
                if (need_a) {
                    // dA = dC * B^T
                    DenseMatrix bt = graphclust::transpose(nodes_[n.b].value);
                    DenseMatrix da = graphclust::matmul(g, bt);
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += da.data()[i];
                }
                if (need_b) {
                    DenseMatrix at = graphclust::transpose(nodes_[n.a].value);
                    DenseMatrix db = graphclust::matmul(at, g);
                    DenseMatrix& gb = local_grad(n.b);
                    for (std::size_t i = 0; i < gb.size(); ++i) gb.data()[i] += db.data()[i];
                }
                break;
            }
            case Op::add: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g.data()[i];
                }
                if (need_b) {
                    DenseMatrix& gb = local_grad(n.b);
                    for (std::size_t i = 0; i < gb.size(); ++i) gb.data()[i] += g.data()[i];
                }
                break;
            }
            case Op::add_row_broadcast: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += g.data()[i];
                }
                if (need_b) {
                    DenseMatrix& gb = local_grad(n.b);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
                }
                break;
            }
            case Op::transpose: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) ga(j, i) += g(i, j);
                }
                break;
            }
            case Op::sigmoid: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < ga.size(); ++i) {
                        const double s = n.value.data()[i];
                        ga.data()[i] += g.data()[i] * s * (1.0 - s);
                    }
                }
                break;
            }
            case Op::relu: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    const DenseMatrix& av = nodes_[n.a].value;
                    for (std::size_t i = 0; i < ga.size(); ++i)
                        if (av.data()[i] > 0.0) ga.data()[i] += g.data()[i];
                }
                break;
            }
            case Op::log: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    const DenseMatrix& av = nodes_[n.a].value;
                    for (std::size_t i = 0; i < ga.size(); ++i) {
                        const double x = av.data()[i];
                        if (x >= kLogClamp) ga.data()[i] += g.data()[i] / x;
                        // clamped region: output constant, gradient 0
                    }
                }
                break;
            }
            case Op::mean_rows: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    const double inv = 1.0 / static_cast<double>(ga.rows());
                    for (std::size_t i = 0; i < ga.rows(); ++i)
                        for (std::size_t j = 0; j < ga.cols(); ++j) ga(i, j) += g(0, j) * inv;
                }
                break;
            }
            case Op::concat_cols: {
                const std::size_t ac = nodes_[n.a].value.cols();
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < ga.rows(); ++i)
                        for (std::size_t j = 0; j < ac; ++j) ga(i, j) += g(i, j);
                }
                if (need_b) {
                    DenseMatrix& gb = local_grad(n.b);
                    for (std::size_t i = 0; i < gb.rows(); ++i)
                        for (std::size_t j = 0; j < gb.cols(); ++j) gb(i, j) += g(i, ac + j);
                }
                break;
            }
            case Op::scalar_mul: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    for (std::size_t i = 0; i < ga.size(); ++i)
                        ga.data()[i] += g.data()[i] * n.scalar;
                }
                break;
            }
            case Op::sum_all: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    const double gv = g(0, 0);
                    for (std::size_t i = 0; i < ga.size(); ++i) ga.data()[i] += gv;
                }
                break;
            }
            case Op::elementwise_mul: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    const DenseMatrix& bv = nodes_[n.b].value;
                    for (std::size_t i = 0; i < ga.size(); ++i)
                        ga.data()[i] += g.data()[i] * bv.data()[i];
                }
                if (need_b) {
                    DenseMatrix& gb = local_grad(n.b);
                    const DenseMatrix& av = nodes_[n.a].value;
                    for (std::size_t i = 0; i < gb.size(); ++i)
                        gb.data()[i] += g.data()[i] * av.data()[i];
                }
                break;
            }
            case Op::bce: {
                if (need_a) {
                    DenseMatrix& ga = local_grad(n.a);
                    const DenseMatrix& lv = nodes_[n.a].value;
                    const double gv = g(0, 0) / static_cast<double>(lv.size());
                    for (std::size_t i = 0; i < ga.size(); ++i) {
                        const double t = n.aux.data()[i];
                        const double s = sigmoid_scalar(lv.data()[i]);
                        // d/dl [w t softplus(-l) + (1-t) softplus(l)]
                        ga.data()[i] += gv * ((1.0 - t) * s - n.scalar * t * (1.0 - s));
                    }
                }
                break;
            }
            case Op::leaf:
                break;
        }
    }
}

void Tape::zero_grads() {
    for (Node& n : nodes_) {
        if (n.grad_alloc) n.grad.fill(0.0);
    }
}

void Adam::step(const std::vector<Parameter*>& params,
                const std::vector<const DenseMatrix*>& grads) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam: params/grads size mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Parameter& param = *params[p];
        const DenseMatrix& g = *grads[p];
        if (!param.value.same_shape(g)) {
            throw std::invalid_argument("adam: gradient shape mismatch at parameter " +
                                        std::to_string(p));
        }
        if (param.m.size() != param.value.size()) {
            param.m = DenseMatrix(param.value.rows(), param.value.cols());
            param.v = DenseMatrix(param.value.rows(), param.value.cols());
        }
        for (std::size_t i = 0; i < param.value.size(); ++i) {
            const double gi = g.data()[i];
            param.m.data()[i] = beta1_ * param.m.data()[i] + (1.0 - beta1_) * gi;
            param.v.data()[i] = beta2_ * param.v.data()[i] + (1.0 - beta2_) * gi * gi;
            const double mhat = param.m.data()[i] / bc1;
            const double vhat = param.v.data()[i] / bc2;
            param.value.data()[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    DenseMatrix w(rows, cols);
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
    return w;
}

}  // namespace graphclust
