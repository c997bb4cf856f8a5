#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace hpmr::surrogate {

enum class Activation { tanh, identity };

struct MlpConfig {
    std::vector<int> hidden = {64, 64};
    Activation activation = Activation::tanh;
    double learning_rate = 1e-3;
    int epochs = 300;
    int batch_size = 32;
    std::uint64_t seed = 0;
};

/// Fully connected regressor with a linear scalar output. Loss is half the mean squared error.
class MLPModel {
public:
    /// Glorot-uniform initialization. Throws DomainError on empty layers.
    MLPModel(int inputs, std::vector<int> hidden, Activation act, std::uint64_t seed);

    /// Minibatch Adam. An epoch that raises the full-batch loss is reverted and the step is halved,
    /// so loss_history() is non-increasing. NumericalError on divergence.
    static MLPModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpConfig& cfg);

    double predict(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;

    double loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;
    /// d loss / d parameters in the order of parameters().
    std::vector<double> gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> p);

    int inputs() const noexcept { return inputs_; }
    const std::vector<int>& hidden() const noexcept { return hidden_; }
    Activation activation() const noexcept { return act_; }
    const std::vector<double>& loss_history() const noexcept { return history_; }

private:
    struct Grads {
        std::vector<Eigen::MatrixXd> dW;
        std::vector<Eigen::VectorXd> db;
    };
    double backprop(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, Grads& g) const;
    Eigen::MatrixXd forward(const Eigen::MatrixXd& X) const;

    int inputs_;
    std::vector<int> hidden_;
    Activation act_;
    std::vector<Eigen::MatrixXd> W_;  // layer l maps (rows, in) -> out rows: A_{l+1} = f(A_l W^T + b)
    std::vector<Eigen::VectorXd> b_;
    std::vector<double> history_;
};

}  // namespace hpmr::surrogate
