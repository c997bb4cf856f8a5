#pragma once

#include "hpmr/design.hpp"
#include "hpmr/physics.hpp"
#include "hpmr/predictor.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hpmr::rl {

using surrogate::SurrogateQoI;
using surrogate::Target;

enum class Direction { upper, lower, interval };

/// Violation is measured against the nearer violated bound, relative to that bound.
struct Constraint {
    Target target;
    Direction direction;
    double lower;  // used by lower and interval
    double upper;  // used by upper and interval
    double weight;
};

struct ConstraintSpec {
    std::vector<Constraint> items;
    double lcoe_weight = 0.1;

    /// q''_max <= 0.020, F_dh <= 1.47, SDM <= -6700, lifetime in [6.0, 10.40]; all weights 10,000.
    static ConstraintSpec defaults();
    /// DomainError on a zero limit, a negative weight or an inverted interval.
    void check() const;
};

SurrogateQoI to_surrogate(const physics::QoIBundle& q);

/// Weighted sum of squared relative violations. DomainError on non-finite QoIs.
double penalty(const SurrogateQoI& q, const ConstraintSpec& spec);
bool feasible(const SurrogateQoI& q, const ConstraintSpec& spec);
/// -lcoe_weight * lcoe - penalty.
double reward(double lcoe, double penalty, const ConstraintSpec& spec);

/// min(r A, clip(r, 1 - eps, 1 + eps) A).
double clipped_objective(double ratio, double advantage, double eps);

/// Generalized advantage estimation over a buffer of steps. episode_end[t] marks the last step of an episode;
/// bootstrap is the value after the final step when it does not end an episode.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const char> episode_end, double gamma, double lambda, double bootstrap = 0.0);
/// Single-step episodes: A = r - V.
std::vector<double> gae(std::span<const double> rewards, std::span<const double> values, double gamma, double lambda);

/// Diagonal Gaussian over [0,1]^7 with mean sigmoid(logits), state-independent log-std and a scalar value baseline.
struct GaussianPolicy {
    Eigen::VectorXd logits = Eigen::VectorXd::Zero(design::kNumParams);
    Eigen::VectorXd log_std = Eigen::VectorXd::Constant(design::kNumParams, -1.2);
    double value = 0.0;

    Eigen::VectorXd mean() const;
    Eigen::VectorXd stddev() const;
    double log_prob(const Eigen::VectorXd& action) const;
    double entropy() const;
    static constexpr Eigen::Index parameter_count() { return 2 * design::kNumParams + 1; }
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& p);
};

struct ActionBatch {
    Eigen::MatrixXd raw;      // n x 7, before clipping
    Eigen::MatrixXd clipped;  // n x 7, in [0,1]
    Eigen::VectorXd log_prob; // of raw under the sampling policy
    std::vector<design::DesignPoint> designs;
};

ActionBatch sample_actions(const GaussianPolicy& policy, std::size_t n, std::mt19937_64& rng);

enum class Optimizer { adam, sgd };

struct PpoHyper {
    int n_steps = 8;
    int workers = 8;
    double learning_rate = 0.00025;
    double clip = 0.2;
    double entropy_coef = 0.0001;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    double batch_fraction = 0.5;
    int epochs = 10;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    bool normalize_advantage = true;
    Optimizer optimizer = Optimizer::adam;
    double adam_eps = 1e-5;
    double init_log_std = -1.2;

    void check() const;
};

struct PolicyState {
    GaussianPolicy policy;
    Eigen::VectorXd adam_m = Eigen::VectorXd::Zero(GaussianPolicy::parameter_count());
    Eigen::VectorXd adam_v = Eigen::VectorXd::Zero(GaussianPolicy::parameter_count());
    long step = 0;

    static PolicyState initial(const PpoHyper& h);
};

struct RolloutBatch {
    Eigen::MatrixXd actions;  // pre-clip
    Eigen::VectorXd old_log_prob;
    Eigen::VectorXd advantages;
    Eigen::VectorXd returns;
};

struct PpoDiagnostics {
    double policy_loss = 0.0;
    double value_loss = 0.0;
    double entropy = 0.0;
    double clip_fraction = 0.0;
    double grad_norm = 0.0;
    int gradient_steps = 0;
};

/// Loss = -clipped objective + value_coef * (V - R)^2 - entropy_coef * H, averaged per minibatch.
/// Returns the gradient of the loss with respect to GaussianPolicy::parameters().
Eigen::VectorXd ppo_loss_gradient(const GaussianPolicy& policy, const RolloutBatch& batch,
                                  std::span<const Eigen::Index> rows, const PpoHyper& h, PpoDiagnostics* diag);

/// Epochs of shuffled minibatch steps. NumericalError on a non-finite loss.
PpoDiagnostics ppo_update(PolicyState& state, const RolloutBatch& batch, const PpoHyper& h, std::mt19937_64& rng);

}  // namespace hpmr::rl
