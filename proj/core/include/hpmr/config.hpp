#pragma once

#include "hpmr/design.hpp"
#include "hpmr/econ.hpp"
#include "hpmr/optimizer.hpp"
#include "hpmr/predictor.hpp"
#include "hpmr/rom.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace hpmr::config {

enum class Sampling { uniform, latin_hypercube };

struct RunSettings {
    std::string scenario = "default";
    std::uint64_t seed = 0;
    int workers = 8;
    int threads = 0;
    std::size_t sample_budget = 900;
    Sampling sampling = Sampling::latin_hypercube;
    std::size_t optimize_budget = 100'000;
    std::size_t epoch_samples = 10'000;
    std::size_t top_k = 5;
    int folds = 5;
    bool oracle = false;
    std::string out = "runs";
};

struct RunConfig {
    RunSettings run;
    design::ReactorConstants reactor;
    physics::RomConfig rom;
    econ::CostDatabase costs = econ::CostDatabase::defaults();
    econ::FinanceAssumptions finance;
    surrogate::PredictorConfig surrogate;
    rl::PpoHyper ppo;
    rl::ConstraintSpec constraints = rl::ConstraintSpec::defaults();
    double lcoe_cap = 0.0;
    double max_failure_fraction = 0.01;

    rl::EconContext econ() const { return {reactor, costs, finance}; }
    rl::TrainConfig train_config() const;
};

/// The complete default document, every key present. Written as config/defaults.json.
std::string defaults_json();

/// Overlay a JSON document on the defaults. ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Sorted-key JSON of the effective configuration.
std::string canonical_json(const RunConfig& c);
std::uint64_t fnv1a(std::string_view bytes);
/// 16 hex digits of fnv1a over the canonical document without run.out and run.threads.
std::string config_hash(const RunConfig& c);

}  // namespace hpmr::config
