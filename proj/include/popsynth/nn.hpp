#pragma once

#include "popsynth/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace popsynth::nn {

template <typename T> using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T> using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T> using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T> struct Linear {
    Matrix<T> weight; // out x in
    RowVector<T> bias;

    void init(std::size_t out, std::size_t in, Rng &rng) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::uniform_real_distribution<double> u(-bound, bound);
        weight.resize(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
        bias.resize(static_cast<Eigen::Index>(out));
        for (Eigen::Index r = 0; r < weight.rows(); ++r)
            for (Eigen::Index c = 0; c < weight.cols(); ++c) weight(r, c) = static_cast<T>(u(rng));
        for (Eigen::Index c = 0; c < bias.size(); ++c) bias(c) = static_cast<T>(u(rng));
    }

    Matrix<T> forward(const Matrix<T> &x) const {
        return (x * weight.transpose()).rowwise() + bias;
    }
};

template <typename T> struct LinearGrad {
    Matrix<T> weight;
    RowVector<T> bias;

    void zero_like(const Linear<T> &layer) {
        weight = Matrix<T>::Zero(layer.weight.rows(), layer.weight.cols());
        bias = RowVector<T>::Zero(layer.bias.size());
    }
};

template <typename T> struct Adam {
    T lr, beta1, beta2, eps = static_cast<T>(1e-8);
    Matrix<T> mw, vw;
    RowVector<T> mb, vb;
    long step = 0;

    void init(const Linear<T> &layer, T lr_, T beta1_, T beta2_) {
        lr = lr_;
        beta1 = beta1_;
        beta2 = beta2_;
        mw = Matrix<T>::Zero(layer.weight.rows(), layer.weight.cols());
        vw = mw;
        mb = RowVector<T>::Zero(layer.bias.size());
        vb = mb;
        step = 0;
    }

    void update(Linear<T> &layer, const LinearGrad<T> &grad) {
        ++step;
        const T c1 = T(1) - std::pow(beta1, static_cast<T>(step));
        const T c2 = T(1) - std::pow(beta2, static_cast<T>(step));
        mw = beta1 * mw + (T(1) - beta1) * grad.weight;
        vw = (beta2 * vw.array() + (T(1) - beta2) * grad.weight.array().square()).matrix();
        layer.weight.array() -= lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + eps);
        mb = beta1 * mb + (T(1) - beta1) * grad.bias;
        vb = (beta2 * vb.array() + (T(1) - beta2) * grad.bias.array().square()).matrix();
        layer.bias.array() -= lr * (mb.array() / c1) / ((vb.array() / c2).sqrt() + eps);
    }
};

template <typename T> struct AdamVec {
    T lr, beta1, beta2, eps = static_cast<T>(1e-8);
    RowVector<T> m, v;
    long step = 0;

    void init(const RowVector<T> &param, T lr_, T beta1_, T beta2_) {
        lr = lr_;
        beta1 = beta1_;
        beta2 = beta2_;
        m = RowVector<T>::Zero(param.size());
        v = m;
        step = 0;
    }

    void update(RowVector<T> &param, const RowVector<T> &grad) {
        ++step;
        const T c1 = T(1) - std::pow(beta1, static_cast<T>(step));
        const T c2 = T(1) - std::pow(beta2, static_cast<T>(step));
        m = beta1 * m + (T(1) - beta1) * grad;
        v = (beta2 * v.array() + (T(1) - beta2) * grad.array().square()).matrix();
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

template <typename T> Matrix<T> leaky_relu(const Matrix<T> &x, T slope) {
    return x.array().max(x.array() * slope).matrix();
}

template <typename T> Matrix<T> leaky_relu_grad(const Matrix<T> &pre, T slope) {
    return (pre.array() > T(0)).template cast<T>().max(slope).matrix();
}

// WGAN-style critic: pac-grouped input, two leaky-ReLU + dropout hidden
// layers, scalar output per group.
template <typename T> struct Critic {
    Linear<T> l1, l2, l3; // l3 maps hidden -> 1
    T leak = static_cast<T>(0.2);
    T drop_p = static_cast<T>(0.5);

    void init(std::size_t input_width, std::size_t hidden, Rng &rng) {
        l1.init(hidden, input_width, rng);
        l2.init(hidden, hidden, rng);
        l3.init(1, hidden, rng);
    }

    struct Forward {
        Matrix<T> x;
        Matrix<T> a1, m1, h1;
        Matrix<T> a2, m2, h2;
        Vector<T> y;
    };

    struct Grads {
        LinearGrad<T> g1, g2, g3;
        void zero_like(const Critic &net) {
            g1.zero_like(net.l1);
            g2.zero_like(net.l2);
            g3.zero_like(net.l3);
        }
    };

    // In train mode dropout draws fresh inverted-scaling masks from rng;
    // in eval mode the critic is deterministic.
    Forward forward(const Matrix<T> &x, bool train, Rng *rng) const {
        Forward f;
        f.x = x;
        f.a1 = l1.forward(x);
        f.m1 = dropout_mask(f.a1.rows(), f.a1.cols(), train, rng);
        f.h1 = leaky_relu(f.a1, leak).cwiseProduct(f.m1);
        f.a2 = l2.forward(f.h1);
        f.m2 = dropout_mask(f.a2.rows(), f.a2.cols(), train, rng);
        f.h2 = leaky_relu(f.a2, leak).cwiseProduct(f.m2);
        f.y = (f.h2 * l3.weight.transpose()).col(0).array() + l3.bias(0);
        return f;
    }

    void backward(const Forward &f, const Vector<T> &dy, Grads &grads, Matrix<T> *dx) const {
        grads.g3.weight.row(0) += dy.transpose() * f.h2;
        grads.g3.bias(0) += dy.sum();
        Matrix<T> dh2 = dy * l3.weight; // [G x H]
        Matrix<T> da2 = dh2.cwiseProduct(f.m2).cwiseProduct(leaky_relu_grad(f.a2, leak));
        grads.g2.weight += da2.transpose() * f.h1;
        grads.g2.bias += da2.colwise().sum();
        Matrix<T> dh1 = da2 * l2.weight;
        Matrix<T> da1 = dh1.cwiseProduct(f.m1).cwiseProduct(leaky_relu_grad(f.a1, leak));
        grads.g1.weight += da1.transpose() * f.x;
        grads.g1.bias += da1.colwise().sum();
        if (dx != nullptr) *dx = da1 * l1.weight;
    }

    // d y / d x for each group of a stored forward pass.
    Matrix<T> input_gradient(const Forward &f) const {
        const Matrix<T> c2 = leaky_relu_grad(f.a2, leak).cwiseProduct(f.m2);
        const Matrix<T> c1 = leaky_relu_grad(f.a1, leak).cwiseProduct(f.m1);
        Matrix<T> v2 = c2.array().rowwise() * l3.weight.row(0).array();
        Matrix<T> v1 = c1.cwiseProduct(v2 * l2.weight);
        return v1 * l1.weight;
    }

    // Two-sided penalty lambda * mean_g (||dy/dx_g|| - 1)^2 evaluated at the
    // stored (interpolated) inputs; parameter gradients are accumulated into
    // grads. Piecewise-linear activations make the bias gradients vanish.
    T gradient_penalty(const Forward &f, T lambda, Grads &grads) const {
        const Eigen::Index n_groups = f.x.rows();
        const Matrix<T> c2 = leaky_relu_grad(f.a2, leak).cwiseProduct(f.m2);
        const Matrix<T> c1 = leaky_relu_grad(f.a1, leak).cwiseProduct(f.m1);
        Matrix<T> v2 = c2.array().rowwise() * l3.weight.row(0).array();
        Matrix<T> v1 = c1.cwiseProduct(v2 * l2.weight);
        Matrix<T> gin = v1 * l1.weight; // [G x M]

        T value = T(0);
        Matrix<T> u(n_groups, gin.cols());
        for (Eigen::Index g = 0; g < n_groups; ++g) {
            const T s = gin.row(g).norm();
            const T diff = s - T(1);
            value += diff * diff;
            const T scale = s > T(0) ? T(2) * diff / s : T(0);
            u.row(g) = gin.row(g) * (scale * lambda / static_cast<T>(n_groups));
        }
        value = value * lambda / static_cast<T>(n_groups);

        grads.g1.weight += v1.transpose() * u;
        Matrix<T> p = c1.cwiseProduct(u * l1.weight.transpose());
        grads.g2.weight += v2.transpose() * p;
        Matrix<T> t = p * l2.weight.transpose();
        grads.g3.weight.row(0) += c2.cwiseProduct(t).colwise().sum();
        return value;
    }

  private:
    Matrix<T> dropout_mask(Eigen::Index rows, Eigen::Index cols, bool train, Rng *rng) const {
        if (!train || drop_p <= T(0)) return Matrix<T>::Ones(rows, cols);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Matrix<T> mask(rows, cols);
        const T scale = T(1) / (T(1) - drop_p);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c)
                mask(r, c) = u(*rng) < static_cast<double>(drop_p) ? T(0) : scale;
        return mask;
    }
};

// Batch normalization over features with running statistics for eval mode.
template <typename T> struct BatchNorm {
    RowVector<T> gamma, beta;
    RowVector<T> running_mean, running_var;
    T momentum = static_cast<T>(0.1);
    T eps = static_cast<T>(1e-5);

    void init(std::size_t width) {
        gamma = RowVector<T>::Ones(static_cast<Eigen::Index>(width));
        beta = RowVector<T>::Zero(static_cast<Eigen::Index>(width));
        running_mean = beta;
        running_var = gamma;
    }

    struct Cache {
        Matrix<T> x_hat;
        RowVector<T> inv_std;
    };

    Matrix<T> forward_train(const Matrix<T> &x, Cache &cache) {
        if (x.rows() < 2) return forward_eval(x, cache);
        const auto rows = static_cast<T>(x.rows());
        const RowVector<T> mean = x.colwise().mean();
        const RowVector<T> var =
            ((x.rowwise() - mean).array().square().colwise().sum() / rows).matrix();
        // unbiased variance feeds the running estimate
        running_mean = (T(1) - momentum) * running_mean + momentum * mean;
        running_var =
            (T(1) - momentum) * running_var + momentum * (var * rows / (rows - T(1)));
        cache.inv_std = (var.array() + eps).rsqrt().matrix();
        cache.x_hat = (x.rowwise() - mean).array().rowwise() * cache.inv_std.array();
        return (cache.x_hat.array().rowwise() * gamma.array()).rowwise() + beta.array();
    }

    Matrix<T> forward_eval(const Matrix<T> &x, Cache &cache) const {
        cache.inv_std = (running_var.array() + eps).rsqrt().matrix();
        cache.x_hat = (x.rowwise() - running_mean).array().rowwise() * cache.inv_std.array();
        return (cache.x_hat.array().rowwise() * gamma.array()).rowwise() + beta.array();
    }

    // train-mode backward; accumulates dgamma/dbeta and returns dx
    Matrix<T> backward(const Cache &cache, const Matrix<T> &dy, RowVector<T> &dgamma,
                       RowVector<T> &dbeta) const {
        const auto rows = static_cast<T>(dy.rows());
        dgamma += (dy.array() * cache.x_hat.array()).colwise().sum().matrix();
        dbeta += dy.colwise().sum();
        Matrix<T> dx_hat = dy.array().rowwise() * gamma.array();
        const RowVector<T> sum_dx_hat = dx_hat.colwise().sum();
        const RowVector<T> sum_dx_hat_xhat =
            (dx_hat.array() * cache.x_hat.array()).colwise().sum().matrix();
        Matrix<T> dx = rows * dx_hat;
        dx.rowwise() -= sum_dx_hat;
        dx -= (cache.x_hat.array().rowwise() * sum_dx_hat_xhat.array()).matrix();
        dx.array().rowwise() *= cache.inv_std.array() / rows;
        return dx;
    }
};

// Generator with two batch-normalized ReLU hidden layers and residual
// concatenation; the final linear layer emits one logit block per attribute
// head.
template <typename T> struct Generator {
    Linear<T> l1; // hidden x input
    Linear<T> l2; // hidden x (input + hidden)
    Linear<T> l3; // data_width x (input + 2*hidden)
    BatchNorm<T> bn1, bn2;

    void init(std::size_t input_width, std::size_t hidden, std::size_t data_width, Rng &rng) {
        l1.init(hidden, input_width, rng);
        l2.init(hidden, input_width + hidden, rng);
        l3.init(data_width, input_width + 2 * hidden, rng);
        bn1.init(hidden);
        bn2.init(hidden);
    }

    struct Forward {
        Matrix<T> in0;
        Matrix<T> a1, n1, r1, h1;
        Matrix<T> a2, n2, r2, h2;
        typename BatchNorm<T>::Cache c1, c2;
        Matrix<T> logits;
        Matrix<T> soft; // gumbel-softmax output per head
    };

    struct Grads {
        LinearGrad<T> g1, g2, g3;
        RowVector<T> dgamma1, dbeta1, dgamma2, dbeta2;
        void zero_like(const Generator &net) {
            g1.zero_like(net.l1);
            g2.zero_like(net.l2);
            g3.zero_like(net.l3);
            dgamma1 = RowVector<T>::Zero(net.bn1.gamma.size());
            dbeta1 = dgamma1;
            dgamma2 = RowVector<T>::Zero(net.bn2.gamma.size());
            dbeta2 = dgamma2;
        }
    };

    Matrix<T> forward_logits(const Matrix<T> &in0, Forward &f, bool train) {
        f.in0 = in0;
        f.a1 = l1.forward(in0);
        f.n1 = train ? bn1.forward_train(f.a1, f.c1) : bn1.forward_eval(f.a1, f.c1);
        f.r1 = f.n1.array().max(T(0)).matrix();
        f.h1.resize(in0.rows(), f.r1.cols() + in0.cols());
        f.h1 << f.r1, in0;
        f.a2 = l2.forward(f.h1);
        f.n2 = train ? bn2.forward_train(f.a2, f.c2) : bn2.forward_eval(f.a2, f.c2);
        f.r2 = f.n2.array().max(T(0)).matrix();
        f.h2.resize(in0.rows(), f.r2.cols() + f.h1.cols());
        f.h2 << f.r2, f.h1;
        f.logits = l3.forward(f.h2);
        return f.logits;
    }

    // inference path: running statistics, no state updates
    Matrix<T> eval_logits(const Matrix<T> &in0, Forward &f) const {
        f.in0 = in0;
        f.a1 = l1.forward(in0);
        f.n1 = bn1.forward_eval(f.a1, f.c1);
        f.r1 = f.n1.array().max(T(0)).matrix();
        f.h1.resize(in0.rows(), f.r1.cols() + in0.cols());
        f.h1 << f.r1, in0;
        f.a2 = l2.forward(f.h1);
        f.n2 = bn2.forward_eval(f.a2, f.c2);
        f.r2 = f.n2.array().max(T(0)).matrix();
        f.h2.resize(in0.rows(), f.r2.cols() + f.h1.cols());
        f.h2 << f.r2, f.h1;
        f.logits = l3.forward(f.h2);
        return f.logits;
    }

    // heads: (offset, width) logit blocks that get an independent
    // gumbel-softmax at temperature tau. Training path (updates BN stats).
    Forward forward(const Matrix<T> &in0, const std::vector<std::pair<std::size_t, std::size_t>> &heads,
                    T tau, Rng &rng) {
        Forward f;
        forward_logits(in0, f, true);
        f.soft.resize(f.logits.rows(), f.logits.cols());
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (Eigen::Index r = 0; r < f.logits.rows(); ++r) {
            for (const auto &[off, width] : heads) {
                T max_v = -std::numeric_limits<T>::infinity();
                for (std::size_t c = 0; c < width; ++c) {
                    const double draw = std::max(u(rng), 1e-300);
                    const T g = static_cast<T>(-std::log(std::max(-std::log(draw), 1e-300)));
                    const T v = (f.logits(r, static_cast<Eigen::Index>(off + c)) + g) / tau;
                    f.soft(r, static_cast<Eigen::Index>(off + c)) = v;
                    max_v = std::max(max_v, v);
                }
                T sum = T(0);
                for (std::size_t c = 0; c < width; ++c) {
                    auto &cell = f.soft(r, static_cast<Eigen::Index>(off + c));
                    cell = std::exp(cell - max_v);
                    sum += cell;
                }
                for (std::size_t c = 0; c < width; ++c)
                    f.soft(r, static_cast<Eigen::Index>(off + c)) /= sum;
            }
        }
        return f;
    }

    // dsoft: gradient w.r.t. the gumbel-softmax outputs; dlogits_extra:
    // gradient applied directly to the raw logits (conditioning loss).
    void backward(const Forward &f, const Matrix<T> &dsoft, const Matrix<T> &dlogits_extra,
                  const std::vector<std::pair<std::size_t, std::size_t>> &heads, T tau,
                  Grads &grads) const {
        Matrix<T> dlogits = dlogits_extra;
        if (dlogits.size() == 0) dlogits = Matrix<T>::Zero(f.logits.rows(), f.logits.cols());
        if (dsoft.size() != 0) {
            for (Eigen::Index r = 0; r < f.logits.rows(); ++r) {
                for (const auto &[off, width] : heads) {
                    T dot = T(0);
                    for (std::size_t c = 0; c < width; ++c) {
                        const auto idx = static_cast<Eigen::Index>(off + c);
                        dot += f.soft(r, idx) * dsoft(r, idx);
                    }
                    for (std::size_t c = 0; c < width; ++c) {
                        const auto idx = static_cast<Eigen::Index>(off + c);
                        dlogits(r, idx) += f.soft(r, idx) * (dsoft(r, idx) - dot) / tau;
                    }
                }
            }
        }

        grads.g3.weight += dlogits.transpose() * f.h2;
        grads.g3.bias += dlogits.colwise().sum();
        Matrix<T> dh2 = dlogits * l3.weight;

        const Eigen::Index hid = f.r2.cols();
        Matrix<T> dn2 =
            dh2.leftCols(hid).cwiseProduct((f.n2.array() > T(0)).template cast<T>().matrix());
        Matrix<T> da2 = bn2.backward(f.c2, dn2, grads.dgamma2, grads.dbeta2);
        grads.g2.weight += da2.transpose() * f.h1;
        grads.g2.bias += da2.colwise().sum();
        Matrix<T> dh1 = dh2.rightCols(f.h1.cols()) + da2 * l2.weight;

        Matrix<T> dn1 =
            dh1.leftCols(hid).cwiseProduct((f.n1.array() > T(0)).template cast<T>().matrix());
        Matrix<T> da1 = bn1.backward(f.c1, dn1, grads.dgamma1, grads.dbeta1);
        grads.g1.weight += da1.transpose() * f.in0;
        grads.g1.bias += da1.colwise().sum();
    }
};

} // namespace popsynth::nn
