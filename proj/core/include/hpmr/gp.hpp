#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace hpmr::surrogate {

/// RBF kernel hyperparameters in the units of standardized inputs and targets.
struct GpHyper {
    double signal_variance = 1.0;
    std::vector<double> length_scales{1.0};  // one entry: shared; otherwise one per input
    double noise_variance = 1e-6;
};

/// Log-marginal-likelihood search. Shared length scale over a grid with the signal variance profiled out,
/// then optional per-dimension refinement by gradient ascent.
struct GpSearch {
    std::vector<double> length_grid = {0.25, 0.35, 0.5, 0.7, 1.0, 1.4, 2.0, 2.8, 4.0, 5.6, 8.0, 11.0, 16.0};
    std::vector<double> noise_ratio_grid = {1e-8, 1e-6, 1e-4, 1e-2};
    bool ard = false;
    int ard_iterations = 60;
    double ard_step = 0.05;
    std::optional<GpHyper> fixed;
};

class GPModel {
public:
    struct Prediction {
        double mean;
        double variance;
    };

    /// n_train >= 1 for fixed hyperparameters, >= 10 when searching.
    static GPModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpSearch& search = {});
    /// Rebuild from stored parts (deserialization).
    static GPModel from_parts(Eigen::MatrixXd X, Eigen::VectorXd y, GpHyper hyper, double y_mean, double y_scale);

    Prediction predict(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict_mean(const Eigen::MatrixXd& X) const;

    const GpHyper& hyper() const noexcept { return hyper_; }
    double log_marginal_likelihood() const noexcept { return lml_; }
    double jitter() const noexcept { return jitter_; }
    double y_mean() const noexcept { return y_mean_; }
    double y_scale() const noexcept { return y_scale_; }
    const Eigen::MatrixXd& inputs() const noexcept { return X_; }
    Eigen::VectorXd targets() const;

private:
    GPModel() = default;
    void factorize();

    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    Eigen::VectorXd z_;  // standardized targets
    GpHyper hyper_;
    double y_mean_ = 0.0;
    double y_scale_ = 1.0;
    Eigen::MatrixXd chol_;  // lower factor of K + (noise + jitter) I
    Eigen::VectorXd alpha_;
    double lml_ = 0.0;
    double jitter_ = 0.0;
};

/// Unit-variance RBF correlation between the rows of A and B.
Eigen::MatrixXd rbf_correlation(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<double>& ls);

}  // namespace hpmr::surrogate
