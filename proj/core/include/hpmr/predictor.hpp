#pragma once

#include "hpmr/dataset.hpp"
#include "hpmr/forest.hpp"
#include "hpmr/gp.hpp"
#include "hpmr/mlp.hpp"
#include "hpmr/stats.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hpmr::surrogate {

struct PredictorConfig {
    GpSearch gp;
    MlpConfig mlp;
    ForestConfig forest;
    std::size_t max_features = 8;
    std::uint64_t seed = 0;
};

struct SurrogateQoI {
    double lifetime_y;
    double sdm_pcm;
    double fdh;
    double q_max_mw_m2;

    double get(Target t) const;
};

/// Feature indices by decreasing forest importance. DomainError below 50 rows or for a constant target.
std::vector<std::size_t> rf_feature_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                               const ForestConfig& cfg, std::vector<double>* importance = nullptr);

/// Stage 1: one GP per lifetime, SDM and F_dh on the selected design features.
/// Stage 2: MLP for q''_max on selected design features plus the three stage-1 outputs,
/// trained on true stage-1 values and fed predictions at inference.
class TwoStagePredictor {
public:
    static TwoStagePredictor fit(const Dataset& d, const PredictorConfig& cfg);

    SurrogateQoI predict(const design::DesignPoint& x) const;
    /// Rows of raw design values (n x 7) to rows of (lifetime, sdm, fdh, qmax).
    Eigen::MatrixXd predict(const Eigen::MatrixXd& designs) const;

    const std::vector<std::size_t>& stage1_features() const noexcept { return stage1_features_; }
    const std::vector<std::size_t>& stage2_features() const noexcept { return stage2_features_; }
    std::size_t stage2_input_dim() const noexcept { return stage2_features_.size() + 3; }
    const std::vector<GPModel>& gps() const noexcept { return gps_; }
    const MLPModel& mlp() const;

    void save(std::ostream& out) const;
    /// SchemaError on a malformed document.
    static TwoStagePredictor load(std::istream& in);

private:
    TwoStagePredictor() = default;
    Eigen::MatrixXd select(const Eigen::MatrixXd& Z, const std::vector<std::size_t>& cols) const;

    Standardizer design_std_;
    std::vector<std::size_t> stage1_features_;
    std::vector<GPModel> gps_;
    std::vector<std::size_t> stage2_features_;
    Standardizer stage2_std_;
    double q_mean_ = 0.0;
    double q_scale_ = 1.0;
    std::optional<MLPModel> mlp_;
};

struct CvReport {
    std::array<double, kNumTargets> r2{};  // lifetime, sdm, fdh, qmax; mean over folds
    std::vector<std::array<double, kNumTargets>> per_fold;
};

/// DomainError when k < 2, rows < k or a validation fold has zero target variance.
CvReport kfold_r2(const PredictorConfig& cfg, const Dataset& d, int k = 5);

}  // namespace hpmr::surrogate
