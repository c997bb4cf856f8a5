#include "hpmr/mlp.hpp"

#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace hpmr::surrogate {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& Z, Activation a) {
    return a == Activation::tanh ? Eigen::MatrixXd(Z.array().tanh()) : Z;
}

// Derivative expressed through the activation output.
Eigen::MatrixXd activate_grad(const Eigen::MatrixXd& A, Activation a) {
    return a == Activation::tanh ? Eigen::MatrixXd(1.0 - A.array().square())
                                 : Eigen::MatrixXd::Ones(A.rows(), A.cols());
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& X, std::span<const std::size_t> idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

}  // namespace

MLPModel::MLPModel(int inputs, std::vector<int> hidden, Activation act, std::uint64_t seed)
    : inputs_(inputs), hidden_(std::move(hidden)), act_(act) {
    if (inputs_ < 1) throw DomainError("MLP needs at least one input");
    std::vector<int> sizes{inputs_};
    for (int h : hidden_) {
        if (h < 1) throw DomainError("MLP hidden layers must be non-empty");
        sizes.push_back(h);
    }
    sizes.push_back(1);
    std::mt19937_64 rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const double limit = std::sqrt(6.0 / (sizes[l] + sizes[l + 1]));
        std::uniform_real_distribution<double> u(-limit, limit);
        Eigen::MatrixXd W(sizes[l + 1], sizes[l]);
        for (Eigen::Index j = 0; j < W.cols(); ++j)
            for (Eigen::Index i = 0; i < W.rows(); ++i) W(i, j) = u(rng);
        W_.push_back(std::move(W));
        b_.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
    }
}

Eigen::MatrixXd MLPModel::forward(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd A = X;
    for (std::size_t l = 0; l < W_.size(); ++l) {
        Eigen::MatrixXd Z = A * W_[l].transpose();
        Z.rowwise() += b_[l].transpose();
        A = l + 1 < W_.size() ? activate(Z, act_) : Z;
    }
    return A;
}

double MLPModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != inputs_) throw DomainError("MLP input has the wrong dimension");
    return forward(x.transpose())(0, 0);
}

Eigen::VectorXd MLPModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != inputs_) throw DomainError("MLP input has the wrong dimension");
    return forward(X).col(0);
}

double MLPModel::loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    return 0.5 * (predict(X) - y).squaredNorm() / static_cast<double>(y.size());
}

double MLPModel::backprop(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Grads& g) const {
    const double n = static_cast<double>(X.rows());
    std::vector<Eigen::MatrixXd> acts{X};
    for (std::size_t l = 0; l < W_.size(); ++l) {
        Eigen::MatrixXd Z = acts.back() * W_[l].transpose();
        Z.rowwise() += b_[l].transpose();
        acts.push_back(l + 1 < W_.size() ? activate(Z, act_) : Z);
    }
    const Eigen::VectorXd err = acts.back().col(0) - y;
    g.dW.assign(W_.size(), {});
    g.db.assign(W_.size(), {});
    Eigen::MatrixXd delta = err / n;
    for (std::size_t l = W_.size(); l-- > 0;) {
        g.dW[l] = delta.transpose() * acts[l];
        g.db[l] = delta.colwise().sum().transpose();
        if (l > 0) delta = (delta * W_[l]).cwiseProduct(activate_grad(acts[l], act_));
    }
    return 0.5 * err.squaredNorm() / n;
}

std::vector<double> MLPModel::gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const {
    Grads g;
    backprop(X, y, g);
    std::vector<double> out;
    for (std::size_t l = 0; l < W_.size(); ++l) {
        out.insert(out.end(), g.dW[l].data(), g.dW[l].data() + g.dW[l].size());
        out.insert(out.end(), g.db[l].data(), g.db[l].data() + g.db[l].size());
    }
    return out;
}

std::vector<double> MLPModel::parameters() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < W_.size(); ++l) {
        out.insert(out.end(), W_[l].data(), W_[l].data() + W_[l].size());
        out.insert(out.end(), b_[l].data(), b_[l].data() + b_[l].size());
    }
    return out;
}

void MLPModel::set_parameters(std::span<const double> p) {
    std::size_t k = 0;
    for (std::size_t l = 0; l < W_.size(); ++l) {
        const auto need = static_cast<std::size_t>(W_[l].size() + b_[l].size());
        if (k + need > p.size()) throw DomainError("MLP parameter vector is too short");
        std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(k), W_[l].size(), W_[l].data());
        k += static_cast<std::size_t>(W_[l].size());
        std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(k), b_[l].size(), b_[l].data());
        k += static_cast<std::size_t>(b_[l].size());
    }
    if (k != p.size()) throw DomainError("MLP parameter vector is too long");
}

MLPModel MLPModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpConfig& cfg) {
    if (X.rows() != y.size() || X.rows() < 1) throw DomainError("MLP needs matching non-empty inputs and targets");
    if (!X.allFinite() || !y.allFinite()) throw DomainError("MLP training data must be finite");
    if (cfg.epochs < 0 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
        throw DomainError("MLP needs epochs >= 0, batch_size >= 1 and a positive learning rate");
    MLPModel net(static_cast<int>(X.cols()), cfg.hidden, cfg.activation, cfg.seed);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);

    const std::size_t L = net.W_.size();
    std::vector<Eigen::MatrixXd> mW, vW;
    std::vector<Eigen::VectorXd> mb, vb;
    const auto reset_moments = [&] {
        mW.clear(), vW.clear(), mb.clear(), vb.clear();
        for (std::size_t l = 0; l < L; ++l) {
            mW.push_back(Eigen::MatrixXd::Zero(net.W_[l].rows(), net.W_[l].cols()));
            vW.push_back(mW.back());
            mb.push_back(Eigen::VectorXd::Zero(net.b_[l].size()));
            vb.push_back(mb.back());
        }
    };
    reset_moments();
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    double lr = cfg.learning_rate;
    long step = 0;
    double best = net.loss(X, y);
    net.history_.push_back(best);
    auto best_W = net.W_;
    auto best_b = net.b_;
    Grads g;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            const std::span<const std::size_t> idx(order.data() + start, end - start);
            const Eigen::MatrixXd Xb = rows_of(X, idx);
            Eigen::VectorXd yb(static_cast<Eigen::Index>(idx.size()));
            for (std::size_t i = 0; i < idx.size(); ++i) yb(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(idx[i]));
            net.backprop(Xb, yb, g);
            ++step;
            const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
            for (std::size_t l = 0; l < L; ++l) {
                mW[l] = b1 * mW[l] + (1 - b1) * g.dW[l];
                vW[l] = b2 * vW[l] + (1 - b2) * g.dW[l].cwiseProduct(g.dW[l]);
                mb[l] = b1 * mb[l] + (1 - b1) * g.db[l];
                vb[l] = b2 * vb[l] + (1 - b2) * g.db[l].cwiseProduct(g.db[l]);
                net.W_[l].array() -= lr * (mW[l].array() / c1) / ((vW[l].array() / c2).sqrt() + eps);
                net.b_[l].array() -= lr * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
            }
        }
        const double now = net.loss(X, y);
        if (!std::isfinite(now))
            throw NumericalError("MLP training diverged at epoch " + std::to_string(epoch) + " (seed " +
                                 std::to_string(cfg.seed) + ", lr " + std::to_string(cfg.learning_rate) + ")");
        if (now <= best) {
            best = now;
            best_W = net.W_;
            best_b = net.b_;
        } else {
            net.W_ = best_W;
            net.b_ = best_b;
            lr *= 0.5;
            reset_moments();
            step = 0;
        }
        net.history_.push_back(best);
    }
    return net;
}

}  // namespace hpmr::surrogate
