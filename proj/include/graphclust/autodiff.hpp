#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "graphclust/dense_matrix.hpp"
#include "graphclust/rng.hpp"

namespace graphclust {

/// Raised when a forward op produces a non-finite value.
class NumericFault : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Tape;

/// Lightweight handle into a Tape node. Value and gradient live on the tape.
class Tensor {
public:
    Tensor() = default;
    const DenseMatrix& value() const;
    const DenseMatrix& grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    bool valid() const { return tape_ != nullptr; }

private:
    friend class Tape;
    Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    int id_ = -1;
};

/// Reverse-mode tape over dense matrices. Records one forward pass; a single
/// backward() accumulates gradients into every reachable input created with
/// requires_grad. Gradients accumulate across backward calls; callers start
/// a fresh tape (or zero grads) between steps.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Tensor input(DenseMatrix value, bool requires_grad = true);
    Tensor constant(DenseMatrix value) { return input(std::move(value), false); }

    Tensor matmul(Tensor a, Tensor b);
    Tensor add(Tensor a, Tensor b);
    /// a: n x m plus a 1 x m row bias broadcast over rows.
    Tensor add_row_broadcast(Tensor a, Tensor row);
    Tensor transpose(Tensor a);
    Tensor sigmoid(Tensor a);
    Tensor relu(Tensor a);
    /// Natural log; entries below 1e-12 are clamped and counted as faults.
    Tensor log(Tensor a);
    /// Column means over rows: n x m -> 1 x m.
    Tensor mean_rows(Tensor a);
    Tensor concat_cols(Tensor a, Tensor b);
    Tensor scalar_mul(Tensor a, double c);
    Tensor sum_all(Tensor a);
    Tensor elementwise_mul(Tensor a, Tensor b);
    /// x (n x d) * W (d x e) * y (e x 1) -> n x 1 scores.
    Tensor bilinear(Tensor x, Tensor w, Tensor y);
    /// Mean of pos_weight*T*softplus(-L) + (1-T)*softplus(L) over all
    /// entries: binary cross-entropy on logits, stable in the saturated
    /// regime. Targets are constants.
    Tensor bce_with_logits_mean(Tensor logits, const DenseMatrix& targets,
                                double pos_weight = 1.0);

    /// Reverse pass from a 1x1 loss.
    void backward(Tensor loss);

    void zero_grads();
    int numeric_faults() const { return numeric_faults_; }
    std::size_t size() const { return nodes_.size(); }

private:
    friend class Tensor;
    enum class Op {
        leaf,
        matmul,
        add,
        add_row_broadcast,
        transpose,
        sigmoid,
        relu,
        log,
        mean_rows,
        concat_cols,
        scalar_mul,
        sum_all,
        elementwise_mul,
        bce,
    };
    struct Node {
        Op op = Op::leaf;
        int a = -1;
        int b = -1;
        DenseMatrix value;
        DenseMatrix grad;
        DenseMatrix aux;  // saved targets for bce
        double scalar = 0.0;
        bool requires_grad = false;
        bool grad_alloc = false;
    };

    int push(Node node, const char* op_name);
    DenseMatrix& grad_of(int id);
    const Node& node(int id) const { return nodes_[id]; }
    void check(Tensor t) const;

    std::vector<Node> nodes_;
    int numeric_faults_ = 0;
};

/// Trainable value plus Adam moment state.
struct Parameter {
    DenseMatrix value;
    DenseMatrix m;
    DenseMatrix v;

    explicit Parameter(DenseMatrix init) : value(std::move(init)) {}
};

/// Standard Adam with bias correction; step count owned by the optimizer.
class Adam {
public:
    explicit Adam(double lr = 0.001, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Parameter*>& params, const std::vector<const DenseMatrix*>& grads);
    long steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace graphclust
