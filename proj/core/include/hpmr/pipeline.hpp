#pragma once

#include "hpmr/config.hpp"
#include "hpmr/dataset.hpp"
#include "hpmr/optimizer.hpp"
#include "hpmr/predictor.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

namespace hpmr::pipeline {

namespace fs = std::filesystem;

/// Uniform or Latin-hypercube designs over the bounds, deterministic per seed.
std::vector<design::DesignPoint> sample_designs(std::size_t n, config::Sampling method, std::uint64_t seed);

struct EvaluatedSet {
    surrogate::Dataset dataset;  // unfiltered; non-starters carry NaN LCOE
    std::size_t failures = 0;
};

/// Evaluate designs with the oracle and price the starters. Row order follows the input.
EvaluatedSet evaluate_designs(const std::vector<design::DesignPoint>& designs, const physics::PhysicsEvaluator& oracle,
                              const rl::EconContext& econ, std::uint64_t seed, int threads, std::ostream* log = nullptr);

/// Sample, evaluate and filter with the config's budget, sampling method and seed.
surrogate::Dataset build_dataset(const config::RunConfig& cfg, surrogate::FilterReport* report = nullptr,
                                 std::size_t* failures = nullptr, std::ostream* log = nullptr);

struct SampleReport {
    std::size_t requested = 0;
    std::size_t failures = 0;
    surrogate::FilterReport filter;
    fs::path dataset;
};

struct TrainReport {
    surrogate::CvReport cv;
    fs::path model;
};

struct ChampionRow {
    rl::Scored predicted;
    rl::Outcome truth;
    bool true_feasible = false;
};

struct OptimizeReport {
    rl::SearchResult search;
    std::vector<ChampionRow> champions;
    fs::path trace;
};

struct LedgerReport {
    physics::QoIBundle qoi;
    econ::CostLedger ledger;
};

SampleReport cmd_sample(const config::RunConfig& cfg, const fs::path& dir, std::ostream* log = nullptr);
/// DomainError below 100 rows.
TrainReport cmd_train(const config::RunConfig& cfg, const fs::path& dataset, const fs::path& dir,
                      std::ostream* log = nullptr);
/// Trains against the surrogate in model, or against the oracle when cfg.run.oracle is set.
OptimizeReport cmd_optimize(const config::RunConfig& cfg, const std::optional<fs::path>& model, const fs::path& dir,
                            std::ostream* log = nullptr);
/// DomainError for a non-starter design.
LedgerReport cmd_report(const config::RunConfig& cfg, const design::DesignPoint& d, const fs::path& dir);
rl::SearchResult cmd_baseline(const config::RunConfig& cfg, const fs::path& dir, std::ostream* log = nullptr);

/// Full-order re-evaluation of search champions.
std::vector<ChampionRow> reevaluate(const std::vector<rl::Scored>& champions, const physics::PhysicsEvaluator& oracle,
                                    const rl::EconContext& econ, const rl::ConstraintSpec& spec);

void write_champions_csv(std::ostream& out, const std::vector<ChampionRow>& rows);

/// Writes manifest.json and config.json into dir. Files are listed with their FNV-1a content hash.
void write_manifest(const fs::path& dir, const std::string& command, const config::RunConfig& cfg,
                    const std::vector<fs::path>& files);

csv::Meta run_meta(const config::RunConfig& cfg, const std::string& command);

}  // namespace hpmr::pipeline
