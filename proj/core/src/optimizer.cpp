#include "hpmr/optimizer.hpp"

#include "hpmr/csv.hpp"
#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

namespace hpmr::rl {

namespace {

constexpr std::size_t kFailureFloor = 10;

Outcome failure(const std::string& what) {
    Outcome o;
    o.failed = true;
    o.error = what;
    return o;
}

template <class Fn>
void run_workers(int count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (int w = 0; w < count; ++w) fn(w);
        return;
    }
    std::vector<std::jthread> pool;
    const int n = std::min(threads, count);
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&, t] {
            for (int w = t; w < count; w += n) fn(w);
        });
}

int thread_count(const TrainConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::min(cfg.ppo.workers, hw);
}

// Running epoch statistics and champion sets shared by PPO and random search.
class Recorder {
public:
    Recorder(const TrainConfig& cfg, double cap) : cfg_(cfg) {
        result_.lcoe_cap = cap;
        result_.best.reward = -std::numeric_limits<double>::infinity();
    }

    void add(const Scored& s) {
        if (s.outcome.failed) ++result_.failures;
        const auto epoch = static_cast<int>(result_.samples / cfg_.epoch_samples);
        if (epoch != epoch_) flush();
        epoch_ = epoch;
        ++result_.samples;
        ++n_;
        sum_ += s.reward;
        max_ = std::max(max_, s.reward);
        if (s.reward > result_.best.reward) result_.best = s;
        if (s.feasible) {
            ++feasible_;
            ++result_.feasible_count;
            feasible_sum_ += s.outcome.lcoe;
            best_lcoe_ = std::isnan(best_lcoe_) ? s.outcome.lcoe : std::min(best_lcoe_, s.outcome.lcoe);
            insert(feasible_set_, s, [](const Scored& a, const Scored& b) { return a.outcome.lcoe < b.outcome.lcoe; });
        } else {
            insert(infeasible_set_, s, [](const Scored& a, const Scored& b) { return a.reward > b.reward; });
        }
    }

    bool too_many_failures() const {
        const auto limit = std::max<std::size_t>(
            kFailureFloor, static_cast<std::size_t>(cfg_.max_failure_fraction * static_cast<double>(cfg_.budget)));
        return result_.failures > limit;
    }

    SearchResult finish() {
        flush();
        if (result_.feasible_count > 0) result_.feasible_mean_lcoe = feasible_sum_ / static_cast<double>(result_.feasible_count);
        result_.champions = feasible_set_;
        for (const auto& s : infeasible_set_) {
            if (result_.champions.size() >= cfg_.top_k) break;
            result_.champions.push_back(s);
        }
        return std::move(result_);
    }

    SearchResult& result() { return result_; }

private:
    template <class Less>
    void insert(std::vector<Scored>& set, const Scored& s, Less less) {
        for (const auto& e : set)
            if (e.design == s.design) return;
        const auto pos = std::upper_bound(set.begin(), set.end(), s, less);
        if (static_cast<std::size_t>(pos - set.begin()) >= cfg_.top_k) return;
        set.insert(pos, s);
        if (set.size() > cfg_.top_k) set.pop_back();
    }

    void flush() {
        if (n_ == 0) return;
        result_.trace.push_back({epoch_ + 1, sum_ / static_cast<double>(n_), max_, best_lcoe_,
                                 static_cast<double>(feasible_) / static_cast<double>(n_)});
        n_ = feasible_ = 0;
        sum_ = 0.0;
        max_ = -std::numeric_limits<double>::infinity();
    }

    const TrainConfig& cfg_;
    SearchResult result_;
    std::vector<Scored> feasible_set_;
    std::vector<Scored> infeasible_set_;
    int epoch_ = 0;
    std::size_t n_ = 0;
    std::size_t feasible_ = 0;
    double sum_ = 0.0;
    double max_ = -std::numeric_limits<double>::infinity();
    double best_lcoe_ = NAN;
    double feasible_sum_ = 0.0;
};

std::vector<design::DesignPoint> uniform_designs(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<design::DesignPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, design::kNumParams> x{};
        for (auto& v : x) v = u(rng);
        out.push_back(design::denormalize(x));
    }
    return out;
}

double resolve_cap(const Objective& objective, const TrainConfig& cfg) {
    return cfg.lcoe_cap > 0.0 ? cfg.lcoe_cap : derive_lcoe_cap(objective, cfg.seed);
}

void validate_config(const TrainConfig& cfg) {
    cfg.ppo.check();
    cfg.constraints.check();
    if (cfg.epoch_samples < 1) throw DomainError("epoch size must be positive");
    if (cfg.top_k < 1) throw DomainError("top_k must be positive");
}

}  // namespace

double foak_lcoe(const design::DesignPoint& d, double lifetime_y, const EconContext& econ) {
    if (!(lifetime_y > 0.0)) return NAN;
    return econ::compute_ledger(design::validate(d), lifetime_y, econ.constants, econ.costs, econ.finance).foak_lcoe;
}

OracleObjective::OracleObjective(const physics::PhysicsEvaluator& evaluator, EconContext econ)
    : evaluator_(evaluator), econ_(std::move(econ)) {}

std::vector<Outcome> OracleObjective::evaluate(std::span<const design::DesignPoint> designs) const {
    std::vector<Outcome> out;
    out.reserve(designs.size());
    for (const auto& d : designs) {
        try {
            Outcome o;
            o.qoi = to_surrogate(evaluator_.evaluate(design::validate(d)).qoi);
            o.lcoe = foak_lcoe(d, o.qoi.lifetime_y, econ_);
            out.push_back(std::move(o));
        } catch (const Error& e) {
            out.push_back(failure(e.what()));
        }
    }
    return out;
}

SurrogateObjective::SurrogateObjective(const surrogate::TwoStagePredictor& predictor, EconContext econ)
    : predictor_(predictor), econ_(std::move(econ)) {}

std::vector<Outcome> SurrogateObjective::evaluate(std::span<const design::DesignPoint> designs) const {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(designs.size()), static_cast<Eigen::Index>(design::kNumParams));
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const auto a = designs[i].to_array();
        for (std::size_t k = 0; k < design::kNumParams; ++k) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = a[k];
    }
    const Eigen::MatrixXd P = predictor_.predict(X);
    std::vector<Outcome> out;
    out.reserve(designs.size());
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        Outcome o;
        o.qoi = {P(r, 0), P(r, 1), P(r, 2), P(r, 3)};
        try {
            if (!P.row(r).allFinite()) throw NumericalError("surrogate prediction is not finite");
            o.lcoe = foak_lcoe(designs[i], o.qoi.lifetime_y, econ_);
        } catch (const Error& e) {
            o = failure(e.what());
        }
        out.push_back(std::move(o));
    }
    return out;
}

double derive_lcoe_cap(const Objective& objective, std::uint64_t seed, std::size_t probe) {
    std::mt19937_64 rng(seed ^ 0x5eedcab5ULL);
    const auto designs = uniform_designs(probe, rng);
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& o : objective.evaluate(designs))
        if (!o.failed && std::isfinite(o.lcoe)) worst = std::max(worst, o.lcoe);
    if (!std::isfinite(worst)) throw NumericalError("no probe design produced a finite LCOE");
    return 2.0 * worst;
}

Scored score(const design::DesignPoint& d, const Outcome& o, const ConstraintSpec& spec, double lcoe_cap) {
    if (o.failed) {
        SurrogateQoI q{-1.0, 0.0, 0.0, 0.0};
        const double phi = penalty(q, spec);
        return {d, o, phi, reward(lcoe_cap, phi, spec), false};
    }
    const double phi = penalty(o.qoi, spec);
    const bool starter = std::isfinite(o.lcoe);
    const double cost = starter ? o.lcoe : lcoe_cap;
    return {d, o, phi, reward(cost, phi, spec), starter && phi == 0.0};
}

SearchResult train(const Objective& objective, const TrainConfig& cfg, PolicyState* final_state) {
    validate_config(cfg);
    const double cap = resolve_cap(objective, cfg);
    Recorder rec(cfg, cap);
    PolicyState state = PolicyState::initial(cfg.ppo);
    const int workers = cfg.ppo.workers;
    const auto per_worker = static_cast<std::size_t>(cfg.ppo.n_steps);
    std::vector<std::mt19937_64> worker_rng;
    for (int w = 0; w < workers; ++w) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(w), 0x70u};
        worker_rng.emplace_back(seq);
    }
    std::mt19937_64 update_rng(cfg.seed ^ 0xa5a5a5a5ULL);
    const int threads = thread_count(cfg);

    std::size_t done = 0;
    while (done < cfg.budget) {
        const GaussianPolicy snapshot = state.policy;
        std::vector<ActionBatch> actions(static_cast<std::size_t>(workers));
        std::vector<std::vector<Outcome>> outcomes(static_cast<std::size_t>(workers));
        run_workers(workers, threads, [&](int w) {
            auto& a = actions[static_cast<std::size_t>(w)];
            a = sample_actions(snapshot, per_worker, worker_rng[static_cast<std::size_t>(w)]);
            outcomes[static_cast<std::size_t>(w)] = objective.evaluate(a.designs);
        });

        // Concatenate in worker order, truncated to the remaining budget.
        const std::size_t take = std::min(cfg.budget - done, per_worker * static_cast<std::size_t>(workers));
        RolloutBatch batch{Eigen::MatrixXd(static_cast<Eigen::Index>(take), static_cast<Eigen::Index>(design::kNumParams)),
                           Eigen::VectorXd(static_cast<Eigen::Index>(take)), Eigen::VectorXd(static_cast<Eigen::Index>(take)),
                           Eigen::VectorXd(static_cast<Eigen::Index>(take))};
        std::vector<double> rewards, values;
        std::size_t row = 0;
        for (int w = 0; w < workers && row < take; ++w) {
            const auto& a = actions[static_cast<std::size_t>(w)];
            for (std::size_t i = 0; i < per_worker && row < take; ++i, ++row) {
                const auto s = score(a.designs[i], outcomes[static_cast<std::size_t>(w)][i], cfg.constraints, cap);
                rec.add(s);
                const auto r = static_cast<Eigen::Index>(row);
                batch.actions.row(r) = a.raw.row(static_cast<Eigen::Index>(i));
                batch.old_log_prob(r) = a.log_prob(static_cast<Eigen::Index>(i));
                rewards.push_back(s.reward);
                values.push_back(snapshot.value);
            }
        }
        done += take;
        if (rec.too_many_failures()) {
            auto res = rec.finish();
            res.aborted = true;
            res.abort_reason = "evaluator failures exceeded threshold after " + std::to_string(done) + " samples";
            if (final_state) *final_state = state;
            return res;
        }
        const auto adv = gae(rewards, values, cfg.ppo.gamma, cfg.ppo.gae_lambda);
        for (std::size_t i = 0; i < take; ++i) {
            batch.advantages(static_cast<Eigen::Index>(i)) = adv[i];
            batch.returns(static_cast<Eigen::Index>(i)) = adv[i] + values[i];
        }
        ppo_update(state, batch, cfg.ppo, update_rng);
    }
    if (final_state) *final_state = state;
    return rec.finish();
}

SearchResult random_search_baseline(const Objective& objective, const TrainConfig& cfg) {
    validate_config(cfg);
    if (cfg.budget < 1) throw DomainError("random search needs a budget of at least one");
    const double cap = resolve_cap(objective, cfg);
    Recorder rec(cfg, cap);
    std::mt19937_64 rng(cfg.seed);
    constexpr std::size_t kChunk = 256;
    std::size_t done = 0;
    while (done < cfg.budget) {
        const std::size_t n = std::min(kChunk, cfg.budget - done);
        const auto designs = uniform_designs(n, rng);
        const auto outcomes = objective.evaluate(designs);
        for (std::size_t i = 0; i < n; ++i) rec.add(score(designs[i], outcomes[i], cfg.constraints, cap));
        done += n;
        if (rec.too_many_failures()) {
            auto res = rec.finish();
            res.aborted = true;
            res.abort_reason = "evaluator failures exceeded threshold after " + std::to_string(done) + " samples";
            return res;
        }
    }
    return rec.finish();
}

void write_trace_csv(std::ostream& out, const std::vector<EpochRow>& trace) {
    out << "epoch,mean_reward,max_reward,best_lcoe,feasible_fraction\n";
    for (const auto& r : trace)
        out << r.epoch << ',' << csv::format(r.mean_reward) << ',' << csv::format(r.max_reward) << ','
            << csv::format(r.best_lcoe) << ',' << csv::format(r.feasible_fraction) << '\n';
}

}  // namespace hpmr::rl
