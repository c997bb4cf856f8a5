#include "hpmr/econ.hpp"

#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

#include "hpmr/csv.hpp"

namespace hpmr::econ {

namespace {

constexpr double kDaysPerYear = 365.25;
constexpr double kHoursPerYear = 8766.0;

double annuity_factor(double r, int n) {
    double s = 0.0;
    for (int t = 1; t <= n; ++t) s += std::pow(1.0 + r, -t);
    return s;
}

std::vector<CashFlow> yearly(double amount, int n) {
    std::vector<CashFlow> out;
    out.reserve(n);
    for (int t = 1; t <= n; ++t) out.push_back({static_cast<double>(t), amount});
    return out;
}

}  // namespace

EscalationTable::EscalationTable(std::map<int, double> index, int base_year)
    : index_(std::move(index)), base_year_(base_year) {
    for (const auto& [y, v] : index_)
        if (!(v > 0.0)) throw ConfigError("escalation index for " + std::to_string(y) + " must be positive");
    if (!index_.contains(base_year_)) throw ConfigError("escalation table lacks its base year");
}

double EscalationTable::to_base(double amount, int from_year) const {
    auto it = index_.find(from_year);
    if (it == index_.end()) throw DomainError("no escalation index for year " + std::to_string(from_year));
    if (from_year == base_year_) return amount;
    return amount * index_.at(base_year_) / it->second;
}

EscalationTable EscalationTable::cpi() {
    // CPI-U annual averages.
    return EscalationTable({{2009, 214.537}, {2017, 245.120}, {2022, 292.655}, {2023, 304.702}, {2024, 313.689}},
                           2024);
}

double escalate(double amount, int from_year, const EscalationTable& table) {
    return table.to_base(amount, from_year);
}

std::string to_string(ReflectorPricing p) { return p == ReflectorPricing::beryllium ? "be" : "graphite"; }

ReflectorPricing reflector_pricing_from(std::string_view s) {
    if (s == "be") return ReflectorPricing::beryllium;
    if (s == "graphite") return ReflectorPricing::graphite;
    throw ConfigError("reflector mode must be 'be' or 'graphite', got '" + std::string(s) + "'");
}

CostDatabase CostDatabase::defaults() {
    CostDatabase db;
    ScaledAccount vessel{"vessel", {0.0, 2024}, {3.0e6, 2024}, 4700.0, 0.8, ScalingDriver::vessel_mass_kg, true};
    ScaledAccount structures{"structures", {1.0e6, 2024}, {6.0e6, 2024}, 2.0, 0.7, ScalingDriver::thermal_power_mw,
                             false};
    ScaledAccount conversion{"power_conversion", {0.0, 2024}, {10.0e6, 2024}, 0.72, 0.7,
                             ScalingDriver::electric_power_mw, false};
    ScaledAccount ic{"instrumentation_control", {3.0e6, 2024}, {0.0, 2024}, 1.0, 1.0, ScalingDriver::none, false};
    db.scaled_accounts = {vessel, structures, conversion, ic};
    constexpr double factory = 0.35;
    for (const char* id : {"axial_reflector", "radial_reflector", "control_drums", "moderator", "monolith",
                           "heat_pipes", "vessel", "structures", "power_conversion", "instrumentation_control",
                           "maintenance", "capital_plant"})
        db.learning_rates[id] = factory;
    return db;
}

void CostDatabase::check() const {
    if (!(0.0 < tails_assay && tails_assay < feed_assay && feed_assay < 1.0))
        throw ConfigError("cost database: need 0 < tails < feed < 1");
    if (enrichment_premium < 0 || maintenance_fraction < 0) throw ConfigError("cost database: negative fraction");
    for (const auto& [id, lr] : learning_rates)
        if (!(lr >= 0.0 && lr < 1.0)) throw ConfigError("learning rate for " + id + " must lie in [0, 1)");
    for (const auto& a : scaled_accounts) {
        if (!(a.exponent > 0.0 && a.exponent <= 1.2))
            throw ConfigError("account " + a.id + ": scaling exponent must lie in (0, 1.2]");
        if (!(a.reference_capacity > 0.0)) throw ConfigError("account " + a.id + ": reference capacity must be positive");
    }
    auto self = *this;
    for (const Money* m : self.money_fields()) escalation.to_base(*m);
    for (const auto& a : scaled_accounts) {
        escalation.to_base(a.fixed);
        escalation.to_base(a.reference);
    }
}

double CostDatabase::learning_rate(const std::string& account) const {
    auto it = learning_rates.find(account);
    return it == learning_rates.end() ? 0.0 : it->second;
}

std::vector<Money*> CostDatabase::money_fields() {
    std::vector<Money*> out = {&natural_uranium, &conversion,         &swu,          &fabrication,
                               &disposal_per_mwh, &decommissioning_per_kwe, &heat_pipe, &beryllium,
                               &b4c_enriched,     &b4c_natural,        &triso,        &yhx,
                               &graphite,         &drum_installation,  &drum_fabrication, &labor_per_fte};
    for (auto& a : scaled_accounts) {
        out.push_back(&a.fixed);
        out.push_back(&a.reference);
    }
    return out;
}

CostDatabase CostDatabase::scaled(double s) const {
    CostDatabase out = *this;
    for (Money* m : out.money_fields()) m->amount *= s;
    return out;
}

void FinanceAssumptions::check() const {
    if (!(discount_rate > -1.0)) throw ConfigError("finance: discount rate must exceed -1");
    if (levelization_years < 1) throw ConfigError("finance: levelization period must be at least one year");
    for (double v : {refueling_days, emergency_rate_per_y, refuel_startup_days, emergency_startup_days,
                     replacement_interval_y, indirect_fraction, financing_factor, capital_plant_fraction})
        if (v < 0.0) throw ConfigError("finance: durations, rates and fractions must be non-negative");
    if (!(thermal_efficiency > 0.0 && thermal_efficiency <= 1.0)) throw ConfigError("finance: efficiency in (0, 1]");
    if (noak_units < 1 || learning_saturation_units < 1) throw ConfigError("finance: unit counts must be >= 1");
    if (!(replacement_interval_y > 0.0)) throw ConfigError("finance: replacement interval must be positive");
}

double separative_potential(double x) { return (2.0 * x - 1.0) * std::log(x / (1.0 - x)); }

SwuResult swu_per_kg_product(double x_p, double x_f, double x_t) {
    if (!(0.0 < x_t && x_t < x_f && x_f <= x_p && x_p < 1.0))
        throw DomainError("assays must satisfy 0 < tails < feed <= product < 1");
    const double feed = (x_p - x_t) / (x_f - x_t);
    const double swu = separative_potential(x_p) + (feed - 1.0) * separative_potential(x_t) -
                       feed * separative_potential(x_f);
    return {swu, feed};
}

double present_value(std::span<const CashFlow> flows, double r) {
    double pv = 0.0;
    for (const auto& f : flows) pv += f.amount * std::pow(1.0 + r, -f.time_y);
    return pv;
}

double capacity_factor(double lifetime_y, const FinanceAssumptions& fin) {
    if (!(lifetime_y > 0.0)) throw DomainError("capacity factor needs a positive lifetime");
    const double cycle_days = std::min(lifetime_y, fin.capacity_factor_cap_y) * kDaysPerYear;
    const double emergency = 1.0 - fin.emergency_rate_per_y * fin.emergency_startup_days / kDaysPerYear;
    return emergency * cycle_days / (cycle_days + fin.refueling_days + fin.refuel_startup_days);
}

double annual_energy_mwh(double lifetime_y, const design::ReactorConstants& c, const FinanceAssumptions& fin) {
    return fin.electric_power_mw(c) * kHoursPerYear * capacity_factor(lifetime_y, fin);
}

FuelCycleCost fuel_cycle_cost(const design::MassInventory& m, double enrichment, double lifetime_y,
                              const design::ReactorConstants& c, const CostDatabase& db,
                              const FinanceAssumptions& fin) {
    if (!(lifetime_y > 0.0)) throw DomainError("fuel cycle cost needs a positive lifetime");
    const auto& esc = db.escalation;
    const auto swu = swu_per_kg_product(enrichment, db.feed_assay, db.tails_assay);
    FuelCycleCost f{};
    f.natural_uranium = m.uranium * swu.feed_per_kg * esc.to_base(db.natural_uranium);
    f.conversion = m.uranium * swu.feed_per_kg * esc.to_base(db.conversion);
    f.enrichment = m.uranium * swu.swu_per_kg * esc.to_base(db.swu) * db.enrichment_premium;
    f.fabrication = m.uranium * esc.to_base(db.fabrication);
    f.cycle_length_y = lifetime_y + (fin.refueling_days + fin.refuel_startup_days) / kDaysPerYear;

    const int n = fin.levelization_years;
    for (int k = 0;; ++k) {
        const double t = k * f.cycle_length_y;
        if (t >= n) break;
        f.reloads.push_back({t, f.per_cycle()});
    }
    const double disposal = esc.to_base(db.disposal_per_mwh) * annual_energy_mwh(lifetime_y, c, fin);
    f.disposal = yearly(disposal, n);
    return f;
}

double cost_to_capacity(double fixed, double reference, double x0, double x_ref, double exponent) {
    if (!(x_ref > 0.0)) throw DomainError("cost-to-capacity reference must be positive");
    if (x0 < 0.0) throw DomainError("cost-to-capacity capacity must be non-negative");
    return fixed + reference * std::pow(x0 / x_ref, exponent);
}

double control_drum_cost(const design::MassInventory& m, int drums, const CostDatabase& db) {
    if (drums < 1) throw DomainError("need at least one control drum");
    const auto& esc = db.escalation;
    const double per_drum = esc.to_base(db.drum_installation) + esc.to_base(db.drum_fabrication);
    return m.drum_body * esc.to_base(db.beryllium) + m.drum_coating_b4c * esc.to_base(db.b4c_enriched) +
           per_drum * drums;
}

double CapitalCost::account(const std::string& id) const {
    for (const auto& a : accounts)
        if (a.id == id) return a.direct;
    throw DomainError("no capital account " + id);
}

CapitalCost capital_cost(const design::ValidatedDesign&, const design::MassInventory& m,
                         const design::GeometrySpec&, const design::ReactorConstants& c, const CostDatabase& db,
                         const FinanceAssumptions& fin) {
    const auto& esc = db.escalation;
    const double reflector_price =
        db.reflector == ReflectorPricing::beryllium ? esc.to_base(db.beryllium) : esc.to_base(db.graphite);

    CapitalCost cap{};
    cap.accounts = {
        {"axial_reflector", m.axial_reflector * reflector_price, true},
        {"radial_reflector", m.radial_reflector * esc.to_base(db.graphite), true},
        {"control_drums", control_drum_cost(m, c.drums, db), true},
        {"moderator", m.moderator_yhx * esc.to_base(db.yhx), true},
        {"monolith", m.monolith_graphite * esc.to_base(db.graphite), false},
        {"heat_pipes", c.total_heat_pipes() * esc.to_base(db.heat_pipe), false},
    };
    for (const auto& a : db.scaled_accounts) {
        double x = 1.0;
        switch (a.driver) {
            case ScalingDriver::thermal_power_mw: x = c.thermal_power_mw; break;
            case ScalingDriver::electric_power_mw: x = fin.electric_power_mw(c); break;
            case ScalingDriver::vessel_mass_kg: x = m.vessel_steel; break;
            case ScalingDriver::none: x = a.reference_capacity; break;
        }
        cap.accounts.push_back(
            {a.id, cost_to_capacity(esc.to_base(a.fixed), esc.to_base(a.reference), x, a.reference_capacity, a.exponent),
             a.replaced});
    }
    cap.direct = 0.0;
    for (const auto& a : cap.accounts) cap.direct += a.direct;
    cap.indirect = fin.indirect_fraction * cap.direct;
    cap.occ = cap.direct + cap.indirect;
    cap.tci = cap.occ * (1.0 + fin.financing_factor);
    cap.decommissioning = esc.to_base(db.decommissioning_per_kwe) * fin.electric_power_mw(c) * 1000.0;
    return cap;
}

std::vector<OmItem> om_cost(const CapitalCost& capital, const CostDatabase& db, const FinanceAssumptions& fin) {
    const auto& esc = db.escalation;
    std::vector<OmItem> items;
    double other = 0.0;
    for (const auto& a : capital.accounts) {
        if (a.replaced)
            items.push_back({"replace_" + a.id, a.direct / fin.replacement_interval_y});
        else
            other += a.direct;
    }
    items.push_back({"maintenance", db.maintenance_fraction * other});
    items.push_back({"capital_plant", fin.capital_plant_fraction * capital.direct});

    const double fte = esc.to_base(db.labor_per_fte);
    const double security = fin.security_per_shift * fin.ftes_per_post * fte;
    const double monitoring = fin.ftes_per_post * fte / fin.reactors_per_monitor;
    const double emergency = fin.refueling_operators * fin.emergency_operator_fte * fte * fin.emergency_rate_per_y;
    items.push_back({"staffing", security + monitoring + emergency});
    items.push_back({"fixed_om", esc.to_base(fin.fixed_om)});
    return items;
}

double lcoe(std::span<const CashFlow> fuel, std::span<const CashFlow> om, double tci,
            std::span<const CashFlow> energy, double r, int n) {
    if (!(r > -1.0)) throw DomainError("discount rate must exceed -1");
    const auto within = [n](const CashFlow& f) { return f.time_y <= n; };
    double cost = tci;
    double e = 0.0;
    for (const auto& f : fuel)
        if (within(f)) cost += f.amount * std::pow(1.0 + r, -f.time_y);
    for (const auto& f : om)
        if (within(f)) cost += f.amount * std::pow(1.0 + r, -f.time_y);
    for (const auto& f : energy)
        if (within(f) && f.time_y > 0.0) e += f.amount * std::pow(1.0 + r, -f.time_y);
    if (!(e > 0.0)) throw DomainError("zero discounted energy");
    return cost / e;
}

double noak_factor(double lr, int units, int saturation) {
    if (units < 1) throw DomainError("NOAK needs at least one unit");
    if (!(lr >= 0.0 && lr < 1.0)) throw DomainError("learning rate must lie in [0, 1)");
    const int n = std::min(units, saturation);
    return std::pow(1.0 - lr, std::log2(static_cast<double>(n)));
}

double noak(double foak, double lr, int units, int saturation) { return foak * noak_factor(lr, units, saturation); }

std::string to_string(Group g) {
    switch (g) {
        case Group::fuel: return "fuel";
        case Group::om: return "om";
        case Group::capital: return "capital";
    }
    return "?";
}

double CostLedger::group_total(Group g) const {
    double s = 0.0;
    for (const auto& l : lines)
        if (l.group == g) s += l.lcoe_share;
    return s;
}

const LedgerLine& CostLedger::line(const std::string& account) const {
    for (const auto& l : lines)
        if (l.account == account) return l;
    throw DomainError("no ledger line " + account);
}

CostLedger compute_ledger(const design::ValidatedDesign& d, double lifetime_y, const design::ReactorConstants& c,
                          const CostDatabase& db, const FinanceAssumptions& fin) {
    if (!(lifetime_y > 0.0)) throw DomainError("non-starter design has no ledger");
    const auto g = design::derive_geometry(d, c);
    const auto m = design::mass_inventory(g, d, c);
    const double r = fin.discount_rate;
    const int n = fin.levelization_years;

    const auto cap = capital_cost(d, m, g, c, db, fin);
    const auto om = om_cost(cap, db, fin);
    const auto fuel = fuel_cycle_cost(m, d.point().enrichment, lifetime_y, c, db, fin);

    CostLedger L{};
    L.capacity_factor = capacity_factor(lifetime_y, fin);
    L.annual_energy_mwh = annual_energy_mwh(lifetime_y, c, fin);
    const auto energy = yearly(L.annual_energy_mwh, n);
    L.discounted_energy_mwh = present_value(energy, r);
    L.occ = cap.occ;
    L.tci = cap.tci;

    const double annuity = annuity_factor(r, n);
    const double crf = 1.0 / annuity;
    const double multiplier = (1.0 + fin.indirect_fraction) * (1.0 + fin.financing_factor);
    const auto add = [&](std::string id, Group grp, double pv, double lr) {
        L.lines.push_back({std::move(id), grp, pv, pv * crf, pv / L.discounted_energy_mwh, lr});
    };

    for (const auto& a : cap.accounts) add(a.id, Group::capital, a.direct * multiplier, db.learning_rate(a.id));
    add("decommissioning", Group::capital, cap.decommissioning, db.learning_rate("decommissioning"));
    for (const auto& item : om) {
        const std::string base = item.id.rfind("replace_", 0) == 0 ? item.id.substr(8) : item.id;
        add(item.id, Group::om, item.annual * annuity, db.learning_rate(base));
    }
    add("fuel_cycles", Group::fuel, present_value(fuel.reloads, r), db.learning_rate("fuel_cycles"));
    add("spent_fuel_disposal", Group::fuel, present_value(fuel.disposal, r), db.learning_rate("spent_fuel_disposal"));

    for (const auto& l : L.lines)
        if (l.present_value < 0.0 || !std::isfinite(l.present_value))
            throw DomainError("negative or non-finite cost in ledger line " + l.account);

    std::vector<CashFlow> om_flows = yearly(0.0, n);
    for (const auto& item : om)
        for (auto& f : om_flows) f.amount += item.annual;
    std::vector<CashFlow> fuel_flows = fuel.reloads;
    fuel_flows.insert(fuel_flows.end(), fuel.disposal.begin(), fuel.disposal.end());
    L.foak_lcoe = lcoe(fuel_flows, om_flows, cap.tci + cap.decommissioning, energy, r, n);

    L.noak_lcoe = 0.0;
    for (const auto& l : L.lines)
        L.noak_lcoe += noak(l.lcoe_share, l.learning_rate, fin.noak_units, fin.learning_saturation_units);
    return L;
}

void write_ledger_csv(std::ostream& out, const CostLedger& L) {
    out << "account,group,annualized_cost_usd2024,lcoe_share_usd_per_mwh\n";
    for (const auto& l : L.lines)
        out << l.account << ',' << to_string(l.group) << ',' << csv::format(l.annualized) << ','
            << csv::format(l.lcoe_share) << '\n';
}

void write_group_csv(std::ostream& out, const CostLedger& L) {
    out << "group,lcoe_share_usd_per_mwh\n";
    for (Group g : {Group::capital, Group::om, Group::fuel})
        out << to_string(g) << ',' << csv::format(L.group_total(g)) << '\n';
    out << "foak," << csv::format(L.foak_lcoe) << '\n';
    out << "noak," << csv::format(L.noak_lcoe) << '\n';
}

void write_ledger_text(std::ostream& out, const CostLedger& L) {
    const auto old_flags = out.flags();
    const auto old_prec = out.precision();
    out << std::fixed;
    for (Group g : {Group::capital, Group::om, Group::fuel}) {
        out << to_string(g) << '\n';
        for (const auto& l : L.lines) {
            if (l.group != g) continue;
            out << "  " << std::left << std::setw(32) << l.account << std::right << std::setprecision(0)
                << std::setw(14) << l.annualized << " $/y" << std::setprecision(2) << std::setw(12) << l.lcoe_share
                << " $/MWh\n";
        }
        out << "  " << std::left << std::setw(32) << "subtotal" << std::right << std::setw(32) << std::setprecision(2)
            << L.group_total(g) << " $/MWh\n";
    }
    out << std::setprecision(4) << "capacity factor   " << L.capacity_factor << '\n'
        << std::setprecision(1) << "annual energy     " << L.annual_energy_mwh << " MWh\n"
        << std::setprecision(2) << "LCOE FOAK         " << L.foak_lcoe << " $/MWh\n"
        << "LCOE NOAK         " << L.noak_lcoe << " $/MWh\n";
    out.flags(old_flags);
    out.precision(old_prec);
}

}  // namespace hpmr::econ
