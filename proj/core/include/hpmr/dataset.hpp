#pragma once

#include "hpmr/csv.hpp"
#include "hpmr/design.hpp"
#include "hpmr/physics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hpmr::surrogate {

/// One evaluated design. LCOE is NaN for non-starters, which carry no ledger.
struct Sample {
    design::DesignPoint design;
    physics::QoIBundle qoi;
    double lcoe_foak;
    double lcoe_noak;
    std::uint64_t seed;
    std::string oracle_id;
};

struct Dataset {
    std::vector<Sample> rows;
    csv::Meta meta;

    std::size_t size() const noexcept { return rows.size(); }
};

struct FilterReport {
    std::size_t raw = 0;
    std::size_t retained = 0;
    std::size_t negative_cost = 0;
    std::size_t non_finite = 0;
};

/// Drops rows with negative LCOE or non-finite QoIs. DomainError when nothing survives.
Dataset filter_outliers(Dataset raw, FilterReport* report = nullptr);

const std::vector<std::string>& dataset_columns();
void write_dataset(std::ostream& out, const Dataset& d);
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset(const csv::Table& table);

enum class Target { lifetime, sdm, fdh, qmax };
inline constexpr std::size_t kNumTargets = 4;
std::string to_string(Target t);
double value(const physics::QoIBundle& q, Target t);

}  // namespace hpmr::surrogate
