#include "hpmr/rl.hpp"

#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hpmr::rl {

namespace {

double relative_violation(double x, double bound) {
    const double r = (x - bound) / bound;
    return r * r;
}

double violation(const Constraint& c, double x) {
    switch (c.direction) {
        case Direction::upper: return x > c.upper ? relative_violation(x, c.upper) : 0.0;
        case Direction::lower: return x < c.lower ? relative_violation(x, c.lower) : 0.0;
        case Direction::interval:
            if (x < c.lower) return relative_violation(x, c.lower);
            if (x > c.upper) return relative_violation(x, c.upper);
            return 0.0;
    }
    return 0.0;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

const double kHalfLog2PiE = 0.5 * (1.0 + std::log(2.0 * std::numbers::pi));
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

}  // namespace

ConstraintSpec ConstraintSpec::defaults() {
    ConstraintSpec s;
    s.items = {
        {Target::qmax, Direction::upper, 0.0, 0.020, 10'000.0},
        {Target::fdh, Direction::upper, 0.0, 1.47, 10'000.0},
        {Target::sdm, Direction::upper, 0.0, -6700.0, 10'000.0},
        {Target::lifetime, Direction::interval, 6.0, 10.40, 10'000.0},
    };
    return s;
}

void ConstraintSpec::check() const {
    if (!(lcoe_weight >= 0.0)) throw DomainError("LCOE weight must be non-negative");
    for (const auto& c : items) {
        const std::string name = surrogate::to_string(c.target);
        if (!(c.weight >= 0.0)) throw DomainError("negative constraint weight for " + name);
        const bool uses_lower = c.direction != Direction::upper;
        const bool uses_upper = c.direction != Direction::lower;
        if ((uses_lower && c.lower == 0.0) || (uses_upper && c.upper == 0.0))
            throw DomainError("constraint limit for " + name + " is zero");
        if (c.direction == Direction::interval && !(c.lower < c.upper))
            throw DomainError("inverted interval for " + name);
    }
}

SurrogateQoI to_surrogate(const physics::QoIBundle& q) { return {q.lifetime_y, q.sdm_pcm, q.fdh, q.q_max_mw_m2}; }

double penalty(const SurrogateQoI& q, const ConstraintSpec& spec) {
    double phi = 0.0;
    for (const auto& c : spec.items) {
        const double x = q.get(c.target);
        if (!std::isfinite(x)) throw DomainError("penalty on non-finite " + surrogate::to_string(c.target));
        phi += c.weight * violation(c, x);
    }
    return phi;
}

bool feasible(const SurrogateQoI& q, const ConstraintSpec& spec) {
    return std::all_of(spec.items.begin(), spec.items.end(),
                       [&](const Constraint& c) { return violation(c, q.get(c.target)) == 0.0; });
}

double reward(double lcoe, double penalty, const ConstraintSpec& spec) { return -spec.lcoe_weight * lcoe - penalty; }

double clipped_objective(double ratio, double advantage, double eps) {
    return std::min(ratio * advantage, std::clamp(ratio, 1.0 - eps, 1.0 + eps) * advantage);
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values,
                        std::span<const char> episode_end, double gamma, double lambda, double bootstrap) {
    if (rewards.size() != values.size() || rewards.size() != episode_end.size())
        throw DomainError("GAE inputs differ in length");
    std::vector<double> adv(rewards.size());
    double carry = 0.0;
    for (std::size_t t = rewards.size(); t-- > 0;) {
        const bool end = episode_end[t] != 0;
        const double next_value = end ? 0.0 : (t + 1 < values.size() ? values[t + 1] : bootstrap);
        const double delta = rewards[t] + gamma * next_value - values[t];
        carry = delta + (end ? 0.0 : gamma * lambda * carry);
        adv[t] = carry;
    }
    return adv;
}

std::vector<double> gae(std::span<const double> rewards, std::span<const double> values, double gamma, double lambda) {
    const std::vector<char> ends(rewards.size(), 1);
    return gae(rewards, values, ends, gamma, lambda);
}

Eigen::VectorXd GaussianPolicy::mean() const { return logits.unaryExpr([](double z) { return sigmoid(z); }); }

Eigen::VectorXd GaussianPolicy::stddev() const { return log_std.array().exp(); }

double GaussianPolicy::log_prob(const Eigen::VectorXd& a) const {
    const Eigen::ArrayXd z = (a - mean()).array() / stddev().array();
    return (-0.5 * z.square() - log_std.array() - kHalfLog2Pi).sum();
}

double GaussianPolicy::entropy() const { return (log_std.array() + kHalfLog2PiE).sum(); }

Eigen::VectorXd GaussianPolicy::parameters() const {
    Eigen::VectorXd p(parameter_count());
    p << logits, log_std, value;
    return p;
}

void GaussianPolicy::set_parameters(const Eigen::VectorXd& p) {
    if (p.size() != parameter_count()) throw DomainError("policy parameter vector has the wrong length");
    constexpr auto d = static_cast<Eigen::Index>(design::kNumParams);
    logits = p.head(d);
    log_std = p.segment(d, d);
    value = p(2 * d);
}

ActionBatch sample_actions(const GaussianPolicy& policy, std::size_t n, std::mt19937_64& rng) {
    constexpr auto d = static_cast<Eigen::Index>(design::kNumParams);
    const auto rows = static_cast<Eigen::Index>(n);
    ActionBatch b{Eigen::MatrixXd(rows, d), Eigen::MatrixXd(rows, d), Eigen::VectorXd(rows), {}};
    const Eigen::VectorXd mu = policy.mean();
    const Eigen::VectorXd sd = policy.stddev();
    std::normal_distribution<double> normal(0.0, 1.0);
    b.designs.reserve(n);
    for (Eigen::Index i = 0; i < rows; ++i) {
        std::array<double, design::kNumParams> u{};
        for (Eigen::Index k = 0; k < d; ++k) {
            const double raw = mu(k) + sd(k) * normal(rng);
            b.raw(i, k) = raw;
            u[static_cast<std::size_t>(k)] = b.clipped(i, k) = std::clamp(raw, 0.0, 1.0);
        }
        b.log_prob(i) = policy.log_prob(b.raw.row(i).transpose());
        b.designs.push_back(design::denormalize(u));
    }
    return b;
}

void PpoHyper::check() const {
    if (n_steps < 1 || workers < 1 || epochs < 1) throw DomainError("PPO needs n_steps, workers and epochs >= 1");
    if (!(learning_rate > 0.0) || !(clip > 0.0) || !(max_grad_norm > 0.0))
        throw DomainError("PPO learning rate, clip range and max grad norm must be positive");
    if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) throw DomainError("PPO batch fraction must be in (0, 1]");
    if (!(entropy_coef >= 0.0) || !(value_coef >= 0.0)) throw DomainError("PPO loss coefficients must be non-negative");
}

PolicyState PolicyState::initial(const PpoHyper& h) {
    PolicyState s;
    s.policy.log_std.setConstant(h.init_log_std);
    return s;
}

Eigen::VectorXd ppo_loss_gradient(const GaussianPolicy& policy, const RolloutBatch& batch,
                                  std::span<const Eigen::Index> rows, const PpoHyper& h, PpoDiagnostics* diag) {
    constexpr auto d = static_cast<Eigen::Index>(design::kNumParams);
    const double m = static_cast<double>(rows.size());
    Eigen::VectorXd adv(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) adv(static_cast<Eigen::Index>(i)) = batch.advantages(rows[i]);
    if (h.normalize_advantage && rows.size() > 1) {
        const double mu = adv.mean();
        const double sd = std::sqrt((adv.array() - mu).square().sum() / (m - 1.0));
        adv = ((adv.array() - mu) / (sd + 1e-8)).matrix();
    }
    const Eigen::ArrayXd a = policy.mean().array();
    const Eigen::ArrayXd var = (2.0 * policy.log_std.array()).exp();
    const Eigen::ArrayXd dsig = a * (1.0 - a);

    Eigen::VectorXd g = Eigen::VectorXd::Zero(GaussianPolicy::parameter_count());
    double policy_loss = 0.0, value_loss = 0.0, clipped = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Eigen::ArrayXd u = batch.actions.row(rows[i]).transpose().array();
        const double lp = policy.log_prob(u.matrix());
        const double ratio = std::exp(lp - batch.old_log_prob(rows[i]));
        const double A = adv(static_cast<Eigen::Index>(i));
        const double surr1 = ratio * A;
        const double surr2 = std::clamp(ratio, 1.0 - h.clip, 1.0 + h.clip) * A;
        policy_loss -= std::min(surr1, surr2) / m;
        if (std::abs(ratio - 1.0) > h.clip) clipped += 1.0;
        if (surr1 <= surr2) {
            // d(-r A)/d theta = -A r d(log pi)
            const double w = -A * ratio / m;
            const Eigen::ArrayXd diff = u - a;
            g.head(d).array() += w * diff / var * dsig;
            g.segment(d, d).array() += w * (diff.square() / var - 1.0);
        }
        const double err = policy.value - batch.returns(rows[i]);
        value_loss += err * err / m;
        g(2 * d) += h.value_coef * 2.0 * err / m;
    }
    g.segment(d, d).array() -= h.entropy_coef;
    const double total = policy_loss + h.value_coef * value_loss - h.entropy_coef * policy.entropy();
    if (!std::isfinite(total) || !g.allFinite()) {
        const double mean_adv = batch.advantages.mean();
        throw NumericalError("PPO loss is not finite (minibatch " + std::to_string(rows.size()) +
                             ", mean advantage " + std::to_string(mean_adv) + ", mean return " +
                             std::to_string(batch.returns.mean()) + ")");
    }
    if (diag) {
        diag->policy_loss = policy_loss;
        diag->value_loss = value_loss;
        diag->entropy = policy.entropy();
        diag->clip_fraction = clipped / m;
    }
    return g;
}

PpoDiagnostics ppo_update(PolicyState& state, const RolloutBatch& batch, const PpoHyper& h, std::mt19937_64& rng) {
    h.check();
    const Eigen::Index n = batch.actions.rows();
    if (n < 1 || batch.old_log_prob.size() != n || batch.advantages.size() != n || batch.returns.size() != n)
        throw DomainError("PPO batch fields differ in length");
    const auto mb = static_cast<std::size_t>(std::max<long>(1, std::lround(h.batch_fraction * static_cast<double>(n))));
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    PpoDiagnostics diag;
    constexpr double b1 = 0.9, b2 = 0.999;
    for (int epoch = 0; epoch < h.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += mb) {
            const std::size_t len = std::min(mb, order.size() - start);
            Eigen::VectorXd g = ppo_loss_gradient(state.policy, batch, {order.data() + start, len}, h, &diag);
            const double norm = g.norm();
            diag.grad_norm = norm;
            if (std::isfinite(h.max_grad_norm) && norm > h.max_grad_norm) g *= h.max_grad_norm / (norm + 1e-6);
            Eigen::VectorXd p = state.policy.parameters();
            ++state.step;
            if (h.optimizer == Optimizer::sgd) {
                p -= h.learning_rate * g;
            } else {
                state.adam_m = b1 * state.adam_m + (1.0 - b1) * g;
                state.adam_v = b2 * state.adam_v + (1.0 - b2) * g.cwiseProduct(g);
                const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
                const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
                p.array() -= (h.learning_rate / c1) * state.adam_m.array() /
                             ((state.adam_v.array() / c2).sqrt() + h.adam_eps);
            }
            state.policy.set_parameters(p);
            ++diag.gradient_steps;
        }
    }
    return diag;
}

}  // namespace hpmr::rl
