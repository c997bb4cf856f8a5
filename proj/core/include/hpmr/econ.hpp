#pragma once

#include "hpmr/design.hpp"

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hpmr::econ {

/// An amount in dollars of a given year.
struct Money {
    double amount = 0.0;
    int year = 2024;
};

class EscalationTable {
public:
    EscalationTable() = default;
    EscalationTable(std::map<int, double> index, int base_year);

    /// amount * index(base) / index(from_year); DomainError for a missing year.
    double to_base(double amount, int from_year) const;
    double to_base(const Money& m) const { return to_base(m.amount, m.year); }
    int base_year() const noexcept { return base_year_; }
    const std::map<int, double>& index() const noexcept { return index_; }

    static EscalationTable cpi();

private:
    std::map<int, double> index_;
    int base_year_ = 2024;
};

double escalate(double amount, int from_year, const EscalationTable& table);

enum class ReflectorPricing { beryllium, graphite };
std::string to_string(ReflectorPricing p);
ReflectorPricing reflector_pricing_from(std::string_view s);

enum class ScalingDriver { thermal_power_mw, electric_power_mw, vessel_mass_kg, none };

/// Cost-to-capacity account: fixed + reference * (X / X_ref)^exponent.
struct ScaledAccount {
    std::string id;
    Money fixed;
    Money reference;
    double reference_capacity = 1.0;
    double exponent = 1.0;
    ScalingDriver driver = ScalingDriver::none;
    bool replaced = false;  // part of the periodic replacement annuity
};

struct CostDatabase {
    Money natural_uranium{184.0, 2022};   // $/kgU
    Money conversion{15.1, 2022};         // $/kgU
    Money swu{184.2, 2022};               // $/SWU
    double enrichment_premium = 1.15;     // HALEU provision
    double feed_assay = 0.0071;
    double tails_assay = 0.0025;
    Money fabrication{10000.0, 2009};     // $/kgU
    Money disposal_per_mwh{1.0, 2024};
    Money decommissioning_per_kwe{1100.0, 2024};
    Money heat_pipe{10000.0, 2017};       // $/HP
    Money beryllium{45000.0, 2024};       // $/kg
    Money b4c_enriched{10064.0, 2023};
    Money b4c_natural{14268.0, 2023};
    Money triso{10000.0, 2009};
    Money yhx{1520.0, 2017};
    Money graphite{80.0, 2022};
    Money drum_installation{80665.0, 2024};  // per drum
    Money drum_fabrication{323650.0, 2024};  // per drum
    Money labor_per_fte{178500.0, 2024};
    double maintenance_fraction = 0.015;
    std::vector<ScaledAccount> scaled_accounts;
    std::map<std::string, double> learning_rates;  // account id -> rate; absent means no learning
    EscalationTable escalation = EscalationTable::cpi();
    ReflectorPricing reflector = ReflectorPricing::beryllium;

    static CostDatabase defaults();
    void check() const;
    double learning_rate(const std::string& account) const;
    /// Every unit cost, for uniform scaling and randomized checks.
    std::vector<Money*> money_fields();
    /// Every money field multiplied by s (learning rates, fractions and assays untouched).
    CostDatabase scaled(double s) const;
};

struct FinanceAssumptions {
    double discount_rate = 0.06;
    int levelization_years = 60;
    double debt_to_equity = 0.5;
    double financing_factor = 0.10;     // capitalized interest on OCC at the stated debt ratio
    double indirect_fraction = 0.5;
    double thermal_efficiency = 0.36;
    int refueling_operators = 2;
    double refueling_days = 7.0;
    double emergency_rate_per_y = 0.2;
    double refuel_startup_days = 2.0;
    double emergency_startup_days = 14.0;
    int reactors_per_monitor = 10;
    int security_per_shift = 1;
    double ftes_per_post = 5.0;                 // 24/7 coverage
    double emergency_operator_fte = 0.08;       // per operator per emergency
    double replacement_interval_y = 10.0;
    double capacity_factor_cap_y = 10.0;
    int noak_units = 20;
    int learning_saturation_units = 100;
    double capital_plant_fraction = 0.005;
    Money fixed_om{500000.0, 2024};             // regulatory, tax, insurance
    bool decommissioning_at_start = true;

    double electric_power_mw(const design::ReactorConstants& c) const { return c.thermal_power_mw * thermal_efficiency; }
    void check() const;
};

struct SwuResult {
    double swu_per_kg;
    double feed_per_kg;
};

double separative_potential(double x);
SwuResult swu_per_kg_product(double x_p, double x_f, double x_t);

struct CashFlow {
    double time_y;
    double amount;
};

double present_value(std::span<const CashFlow> flows, double r);

/// Costs per fuel cycle, $2024.
struct FuelCycleCost {
    double natural_uranium;
    double conversion;
    double enrichment;
    double fabrication;
    double cycle_length_y;          // irradiation + outage
    double per_cycle() const { return natural_uranium + conversion + enrichment + fabrication; }
    std::vector<CashFlow> reloads;  // one entry per cycle start, including t = 0
    std::vector<CashFlow> disposal;
};

double capacity_factor(double lifetime_y, const FinanceAssumptions& fin);
double annual_energy_mwh(double lifetime_y, const design::ReactorConstants& c, const FinanceAssumptions& fin);

FuelCycleCost fuel_cycle_cost(const design::MassInventory& m, double enrichment, double lifetime_y,
                              const design::ReactorConstants& c, const CostDatabase& db,
                              const FinanceAssumptions& fin);

double cost_to_capacity(double fixed, double reference, double x0, double x_ref, double exponent);

double control_drum_cost(const design::MassInventory& m, int drums, const CostDatabase& db);

struct Account {
    std::string id;
    double direct;     // $2024
    bool replaced;
};

struct CapitalCost {
    std::vector<Account> accounts;
    double direct;
    double indirect;
    double occ;
    double tci;
    double decommissioning;

    double account(const std::string& id) const;
};

CapitalCost capital_cost(const design::ValidatedDesign& d, const design::MassInventory& m,
                         const design::GeometrySpec& g, const design::ReactorConstants& c, const CostDatabase& db,
                         const FinanceAssumptions& fin);

struct OmItem {
    std::string id;
    double annual;  // $2024 per year
};

std::vector<OmItem> om_cost(const CapitalCost& capital, const CostDatabase& db, const FinanceAssumptions& fin);

double lcoe(std::span<const CashFlow> fuel, std::span<const CashFlow> om, double tci,
            std::span<const CashFlow> energy, double r, int n);

double noak_factor(double lr, int units, int saturation = 100);
double noak(double foak, double lr, int units, int saturation = 100);

enum class Group { fuel, om, capital };
std::string to_string(Group g);

struct LedgerLine {
    std::string account;
    Group group;
    double present_value;   // $2024 at t = 0
    double annualized;      // present value times the capital recovery factor
    double lcoe_share;      // $/MWh
    double learning_rate;
};

struct CostLedger {
    std::vector<LedgerLine> lines;
    double capacity_factor;
    double annual_energy_mwh;
    double discounted_energy_mwh;
    double foak_lcoe;
    double noak_lcoe;
    double occ;
    double tci;

    double group_total(Group g) const;
    const LedgerLine& line(const std::string& account) const;
};

/// Full ledger for one design. DomainError for non-starters or a negative line.
CostLedger compute_ledger(const design::ValidatedDesign& d, double lifetime_y, const design::ReactorConstants& c,
                          const CostDatabase& db, const FinanceAssumptions& fin);

void write_ledger_csv(std::ostream& out, const CostLedger& ledger);
void write_ledger_text(std::ostream& out, const CostLedger& ledger);
void write_group_csv(std::ostream& out, const CostLedger& ledger);

}  // namespace hpmr::econ
