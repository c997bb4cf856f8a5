#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace hpmr::surrogate {

struct ForestConfig {
    int trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 3;
    double feature_fraction = 0.5;
    std::uint64_t seed = 0;
};

/// Bootstrap CART regression forest with random feature subsets at every split.
class RandomForest {
public:
    /// DomainError for fewer than 10 rows or a zero-variance target.
    static RandomForest fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ForestConfig& cfg = {});

    double predict(const Eigen::VectorXd& x) const;
    /// Impurity decrease per feature, normalized to sum to one.
    const std::vector<double>& importance() const noexcept { return importance_; }
    /// Feature indices by decreasing importance, ties broken by index.
    std::vector<std::size_t> ranking() const;

private:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        double value = 0.0;
        int left = -1;
        int right = -1;
    };
    using Tree = std::vector<Node>;

    std::vector<Tree> trees_;
    std::vector<double> importance_;
};

}  // namespace hpmr::surrogate
