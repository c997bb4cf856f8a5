#pragma once

#include "hpmr/econ.hpp"
#include "hpmr/physics.hpp"
#include "hpmr/predictor.hpp"
#include "hpmr/rl.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hpmr::rl {

struct EconContext {
    design::ReactorConstants constants;
    econ::CostDatabase costs = econ::CostDatabase::defaults();
    econ::FinanceAssumptions finance;
};

/// QoIs and FOAK LCOE for one design. LCOE is NaN for non-starters; failed marks an evaluator error.
struct Outcome {
    SurrogateQoI qoi{};
    double lcoe = NAN;
    bool failed = false;
    std::string error;
};

/// Evaluation path used by the optimizer. Implementations must be callable concurrently.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::vector<Outcome> evaluate(std::span<const design::DesignPoint> designs) const = 0;
    virtual std::string id() const = 0;
};

class OracleObjective final : public Objective {
public:
    OracleObjective(const physics::PhysicsEvaluator& evaluator, EconContext econ);
    std::vector<Outcome> evaluate(std::span<const design::DesignPoint> designs) const override;
    std::string id() const override { return evaluator_.id(); }

private:
    const physics::PhysicsEvaluator& evaluator_;
    EconContext econ_;
};

class SurrogateObjective final : public Objective {
public:
    SurrogateObjective(const surrogate::TwoStagePredictor& predictor, EconContext econ);
    std::vector<Outcome> evaluate(std::span<const design::DesignPoint> designs) const override;
    std::string id() const override { return "two-stage-surrogate"; }

private:
    const surrogate::TwoStagePredictor& predictor_;
    EconContext econ_;
};

/// FOAK LCOE from a lifetime, NaN for non-starters.
double foak_lcoe(const design::DesignPoint& d, double lifetime_y, const EconContext& econ);

struct Scored {
    design::DesignPoint design;
    Outcome outcome;
    double penalty;
    double reward;
    bool feasible;
};

struct EpochRow {
    int epoch;
    double mean_reward;
    double max_reward;
    double best_lcoe;  // best feasible so far, NaN until one is found
    double feasible_fraction;
};

struct SearchResult {
    std::vector<EpochRow> trace;
    std::vector<Scored> champions;  // feasible by ascending LCOE, then infeasible by descending reward
    Scored best;                    // highest reward seen
    std::size_t samples = 0;
    std::size_t feasible_count = 0;
    double feasible_mean_lcoe = NAN;
    std::size_t failures = 0;
    double lcoe_cap = NAN;
    bool aborted = false;
    std::string abort_reason;
};

struct TrainConfig {
    PpoHyper ppo;
    ConstraintSpec constraints = ConstraintSpec::defaults();
    std::size_t budget = 100'000;
    std::size_t epoch_samples = 10'000;
    std::uint64_t seed = 0;
    std::size_t top_k = 5;
    double lcoe_cap = 0.0;  // 0 derives 2x the worst finite LCOE of a 256-design probe
    int threads = 0;        // 0 uses min(workers, hardware threads)
    double max_failure_fraction = 0.01;
};

/// 2x the worst finite LCOE over uniform probe designs. NumericalError when none is finite.
double derive_lcoe_cap(const Objective& objective, std::uint64_t seed, std::size_t probe = 256);

/// Score an outcome; non-starters use the cap in place of LCOE, failures score as a cap non-starter at -1 y.
Scored score(const design::DesignPoint& d, const Outcome& o, const ConstraintSpec& spec, double lcoe_cap);

/// PPO over single-step episodes. Workers collect n_steps samples each per rollout.
SearchResult train(const Objective& objective, const TrainConfig& cfg, PolicyState* final_state = nullptr);

/// Uniform samples over the design bounds scored with the same reward.
SearchResult random_search_baseline(const Objective& objective, const TrainConfig& cfg);

void write_trace_csv(std::ostream& out, const std::vector<EpochRow>& trace);

}  // namespace hpmr::rl
