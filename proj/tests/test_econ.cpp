#include "hpmr/econ.hpp"
#include "hpmr/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace hpmr;
using namespace hpmr::econ;
using design::DesignPoint;
using design::validate;

namespace {

EscalationTable flat_index() {
    return EscalationTable({{2009, 1.0}, {2017, 1.0}, {2022, 1.0}, {2023, 1.0}, {2024, 1.0}}, 2024);
}

// Assay mass balance solved by bisection on the tails flow per kg of product.
struct Balance {
    double feed;
    double tails;
};
Balance mass_balance(double xp, double xf, double xt) {
    double lo = 0.0, hi = 1e4;
    for (int i = 0; i < 200; ++i) {
        const double t = 0.5 * (lo + hi);
        // U-235 surplus of feed over product plus tails for this tails flow.
        const double surplus = (1.0 + t) * xf - xp - t * xt;
        (surplus < 0.0 ? lo : hi) = t;
    }
    const double t = 0.5 * (lo + hi);
    return {1.0 + t, t};
}

double value_fn(double x) { return (1.0 - 2.0 * x) * std::log((1.0 - x) / x); }

double swu_oracle(double xp, double xf, double xt) {
    const auto b = mass_balance(xp, xf, xt);
    return value_fn(xp) + b.tails * value_fn(xt) - b.feed * value_fn(xf);
}

struct Setup {
    design::ReactorConstants constants;
    FinanceAssumptions finance;
    CostDatabase costs = CostDatabase::defaults();
};

CostLedger nominal_ledger(ReflectorPricing mode, double lifetime = 6.99) {
    Setup s;
    s.costs.reflector = mode;
    return compute_ledger(validate(DesignPoint::nominal()), lifetime, s.constants, s.costs, s.finance);
}

const LedgerLine* largest(const CostLedger& L, Group g) {
    const LedgerLine* best = nullptr;
    for (const auto& l : L.lines)
        if (l.group == g && (!best || l.lcoe_share > best->lcoe_share)) best = &l;
    return best;
}

}  // namespace

TEST_CASE("SWU and feed against an independent mass balance") {
    const auto r = swu_per_kg_product(0.197, 0.0071, 0.0025);
    CHECK(std::abs(r.feed_per_kg - 42.283) <= 0.001);
    CHECK(std::abs(r.swu_per_kg - 40.92) <= 0.01);
    const auto b = mass_balance(0.197, 0.0071, 0.0025);
    CHECK(r.feed_per_kg == doctest::Approx(b.feed).epsilon(1e-10));
    CHECK(r.swu_per_kg == doctest::Approx(swu_oracle(0.197, 0.0071, 0.0025)).epsilon(1e-10));
    for (double xp : {0.05, 0.1, 0.17, 0.199})
        CHECK(swu_per_kg_product(xp, 0.0071, 0.003).swu_per_kg ==
              doctest::Approx(swu_oracle(xp, 0.0071, 0.003)).epsilon(1e-10));
}

TEST_CASE("no separation needs no work") {
    const auto r = swu_per_kg_product(0.0071, 0.0071, 0.0025);
    CHECK(r.feed_per_kg == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(r.swu_per_kg) < 1e-12);
    CHECK_THROWS_AS(swu_per_kg_product(0.197, 0.002, 0.0025), DomainError);
}

TEST_CASE("escalation") {
    const EscalationTable t({{2009, 1.00}, {2024, 1.45}}, 2024);
    CHECK(escalate(100.0, 2009, t) == doctest::Approx(145.0).epsilon(1e-15));
    CHECK(escalate(100.0, 2024, t) == 100.0);
    CHECK_THROWS_AS(escalate(100.0, 1999, t), DomainError);
    CHECK(EscalationTable::cpi().to_base(Money{1.0, 2024}) == 1.0);
}

TEST_CASE("capacity factor") {
    FinanceAssumptions f;
    const double expected = (1.0 - 0.2 * 14.0 / 365.25) * 3652.5 / 3661.5;
    CHECK(capacity_factor(10.0, f) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(capacity_factor(10.0, f) == doctest::Approx(0.9899).epsilon(1e-4));
    CHECK(capacity_factor(12.0, f) == capacity_factor(10.0, f));
    f.emergency_rate_per_y = 0.0;
    f.refueling_days = 0.0;
    f.refuel_startup_days = 0.0;
    CHECK(capacity_factor(5.0, f) == 1.0);
    CHECK_THROWS_AS(capacity_factor(-1.0, f), DomainError);
}

TEST_CASE("per-cycle fuel cost is a line-item sum") {
    Setup s;
    s.costs.escalation = flat_index();
    const auto v = validate(DesignPoint::nominal());
    const auto m = design::mass_inventory(design::derive_geometry(v, s.constants), v, s.constants);
    const auto f = fuel_cycle_cost(m, 0.197, 6.99, s.constants, s.costs, s.finance);
    const auto swu = swu_per_kg_product(0.197, 0.0071, 0.0025);
    const double per_kg = swu.feed_per_kg * 184.0 + swu.feed_per_kg * 15.1 + swu.swu_per_kg * 184.2 * 1.15 + 10000.0;
    CHECK(f.per_cycle() == doctest::Approx(m.uranium * per_kg).epsilon(1e-12));
    // Rounded SWU and feed ratios at 525.06 kg.
    const double rounded = 525.06 * (42.283 * 184.0 + 42.283 * 15.1 + 40.92 * 184.2 * 1.15 + 10000.0);
    CHECK(std::abs(f.per_cycle() / rounded - 1.0) < 0.01);
    CHECK(f.reloads.front().time_y == 0.0);
    CHECK(f.reloads.size() == static_cast<std::size_t>(std::ceil(60.0 / f.cycle_length_y)));
}

TEST_CASE("zero uranium still accrues disposal") {
    Setup s;
    design::MassInventory m{};
    const auto f = fuel_cycle_cost(m, 0.197, 6.99, s.constants, s.costs, s.finance);
    CHECK(f.per_cycle() == 0.0);
    CHECK(f.disposal.size() == 60u);
    CHECK(f.disposal.front().amount > 0.0);
}

TEST_CASE("cost to capacity") {
    CHECK(cost_to_capacity(5.0, 1000.0, 3.0, 3.0, 0.7) == 1005.0);
    CHECK(cost_to_capacity(0.0, 1000.0, 2.0, 1.0, 0.7) == doctest::Approx(1624.5).epsilon(1e-4));
    CHECK(cost_to_capacity(0.0, 1000.0, 2.0, 1.0, 0.7) == doctest::Approx(1000.0 * std::pow(2.0, 0.7)).epsilon(1e-15));
    CHECK_THROWS_AS(cost_to_capacity(0.0, 1.0, 1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("control drum cost") {
    auto db = CostDatabase::defaults();
    db.escalation = flat_index();
    design::MassInventory m{};
    m.drum_body = 100.0;
    m.drum_coating_b4c = 10.0;
    CHECK(control_drum_cost(m, 12, db) == doctest::Approx(9452420.0).epsilon(1e-14));
    CHECK(control_drum_cost(design::MassInventory{}, 12, db) == doctest::Approx(404315.0 * 12).epsilon(1e-14));
}

TEST_CASE("capital cost accounts") {
    Setup s;
    const auto v = validate(DesignPoint::nominal());
    const auto g = design::derive_geometry(v, s.constants);
    const auto m = design::mass_inventory(g, v, s.constants);
    const auto cap = capital_cost(v, m, g, s.constants, s.costs, s.finance);
    CHECK(cap.account("heat_pipes") == doctest::Approx(1110.0 * 10000.0 * 313.689 / 245.120).epsilon(1e-12));
    CHECK(cap.occ == doctest::Approx(1.5 * cap.direct).epsilon(1e-14));
    CHECK(cap.tci == doctest::Approx(1.1 * cap.occ).epsilon(1e-14));

    auto graphite = s.costs;
    graphite.reflector = ReflectorPricing::graphite;
    const auto capg = capital_cost(v, m, g, s.constants, graphite, s.finance);
    const double diff = m.axial_reflector * (45000.0 - 80.0 * 313.689 / 292.655);
    CHECK(cap.direct - capg.direct == doctest::Approx(diff).epsilon(1e-10));

    const auto zero = capital_cost(v, m, g, s.constants, s.costs.scaled(0.0), s.finance);
    CHECK(zero.occ == 0.0);
    CHECK(zero.tci == 0.0);
}

TEST_CASE("operations and maintenance") {
    Setup s;
    const auto v = validate(DesignPoint::nominal());
    const auto g = design::derive_geometry(v, s.constants);
    const auto m = design::mass_inventory(g, v, s.constants);
    const auto cap = capital_cost(v, m, g, s.constants, s.costs, s.finance);
    const auto om = om_cost(cap, s.costs, s.finance);
    const auto item = [&](const std::string& id) {
        for (const auto& i : om)
            if (i.id == id) return i.annual;
        FAIL("missing O&M item " << id);
        return 0.0;
    };
    const double fte = 178500.0;
    const double monitoring = fte * 5.0 / 10.0;
    const double emergency_per_operator = fte * 0.08;
    CHECK(monitoring == doctest::Approx(89250.0));
    CHECK(emergency_per_operator == doctest::Approx(14280.0));
    CHECK(item("staffing") == doctest::Approx(5.0 * fte + monitoring + 2.0 * emergency_per_operator * 0.2).epsilon(1e-14));
    for (const auto& a : cap.accounts)
        if (a.replaced) CHECK(item("replace_" + a.id) == a.direct / 10.0);

    design::MassInventory none{};
    const auto cap0 = capital_cost(v, none, g, s.constants, s.costs, s.finance);
    const auto om0 = om_cost(cap0, s.costs, s.finance);
    for (const auto& i : om0)
        if (i.id == "replace_axial_reflector" || i.id == "replace_radial_reflector" || i.id == "replace_moderator" ||
            i.id == "replace_vessel")
            CHECK(i.annual == 0.0);
}

TEST_CASE("LCOE discounting") {
    const std::vector<CashFlow> none;
    const std::vector<CashFlow> e2{{1.0, 100.0}, {2.0, 100.0}};
    CHECK(lcoe(none, none, 1000.0, e2, 0.06, 60) == doctest::Approx(1000.0 / (100.0 / 1.06 + 100.0 / (1.06 * 1.06))).epsilon(1e-14));
    CHECK(lcoe(none, none, 1000.0, e2, 0.06, 60) == doctest::Approx(5.454).epsilon(1e-3));

    std::vector<CashFlow> cost, energy;
    for (int t = 1; t <= 60; ++t) {
        cost.push_back({double(t), 370.0});
        energy.push_back({double(t), 11.0});
    }
    CHECK(lcoe(cost, none, 0.0, energy, 0.0, 60) == 370.0 / 11.0);

    std::vector<CashFlow> more = energy;
    for (auto& f : more) f.amount *= 1.01;
    CHECK(lcoe(cost, none, 0.0, more, 0.06, 60) < lcoe(cost, none, 0.0, energy, 0.06, 60));
}

TEST_CASE("NOAK learning curve") {
    CHECK(noak(1234.5, 0.35, 1) == 1234.5);
    CHECK(std::abs(noak_factor(0.1, 4) - 0.81) < 1e-12);
    CHECK(noak_factor(0.2, 100) == noak_factor(0.2, 100000));
    CHECK(noak_factor(0.2, 150) == noak_factor(0.2, 100));
    CHECK(noak_factor(0.2, 99) > noak_factor(0.2, 100));
    CHECK(noak_factor(0.0, 50) == 1.0);
    CHECK_THROWS_AS(noak_factor(1.0, 4), DomainError);
    CHECK_THROWS_AS(noak_factor(0.1, 0), DomainError);
}

TEST_CASE("ledger partitions FOAK and applies learning per account") {
    for (auto mode : {ReflectorPricing::beryllium, ReflectorPricing::graphite}) {
        const auto L = nominal_ledger(mode);
        const double sum = L.group_total(Group::fuel) + L.group_total(Group::om) + L.group_total(Group::capital);
        CHECK(std::abs(sum / L.foak_lcoe - 1.0) < 1e-9);
        double noak_sum = 0.0;
        for (const auto& l : L.lines) {
            CHECK(l.present_value >= 0.0);
            noak_sum += l.lcoe_share * std::pow(1.0 - l.learning_rate, std::log2(20.0));
        }
        CHECK(L.noak_lcoe == doctest::Approx(noak_sum).epsilon(1e-12));
        CHECK(L.noak_lcoe <= L.foak_lcoe);
    }
}

TEST_CASE("ledger magnitudes are within a factor of two of the reference values") {
    const auto be = nominal_ledger(ReflectorPricing::beryllium);
    const auto gr = nominal_ledger(ReflectorPricing::graphite);
    const auto within2 = [](double x, double ref) { return x >= ref / 2.0 && x <= ref * 2.0; };
    CHECK(within2(be.foak_lcoe, 10307.0));
    CHECK(within2(gr.foak_lcoe, 5079.0));
    CHECK(within2(be.noak_lcoe, 1596.0));
    CHECK(within2(gr.noak_lcoe, 1442.0));
}

TEST_CASE("beryllium pricing makes the axial reflector the largest capital line") {
    const auto L = nominal_ledger(ReflectorPricing::beryllium);
    CHECK(largest(L, Group::capital)->account == "axial_reflector");
}

TEST_CASE("graphite pricing makes the control drums dominate capital and O&M") {
    const auto L = nominal_ledger(ReflectorPricing::graphite);
    CHECK(largest(L, Group::capital)->account == "control_drums");
    CHECK(largest(L, Group::om)->account == "replace_control_drums");
}

TEST_CASE("LCOE is homogeneous of degree one in unit costs") {
    const design::ReactorConstants c;
    const auto v = validate(DesignPoint::nominal());
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> jitter(0.5, 2.0), lam(0.1, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        auto db = CostDatabase::defaults();
        for (Money* m : db.money_fields()) m->amount *= jitter(rng);
        FinanceAssumptions fin;
        fin.fixed_om.amount *= jitter(rng);
        const double l = lam(rng);
        auto fin_l = fin;
        fin_l.fixed_om.amount *= l;
        const auto base = compute_ledger(v, 6.99, c, db, fin);
        const auto scaled = compute_ledger(v, 6.99, c, db.scaled(l), fin_l);
        CHECK(std::abs(scaled.foak_lcoe / (l * base.foak_lcoe) - 1.0) < 1e-9);
        CHECK(std::abs(scaled.noak_lcoe / (l * base.noak_lcoe) - 1.0) < 1e-9);
    }
}

TEST_CASE("undiscounted ledger is total cost over total energy") {
    Setup s;
    s.finance.discount_rate = 0.0;
    const auto v = validate(DesignPoint::nominal());
    const auto L = compute_ledger(v, 6.99, s.constants, s.costs, s.finance);
    double total = 0.0;
    for (const auto& l : L.lines) total += l.present_value;
    CHECK(L.foak_lcoe == doctest::Approx(total / (60.0 * L.annual_energy_mwh)).epsilon(1e-12));
    CHECK(L.discounted_energy_mwh == doctest::Approx(60.0 * L.annual_energy_mwh).epsilon(1e-14));
}

TEST_CASE("non-starters have no ledger") {
    Setup s;
    CHECK_THROWS_AS(compute_ledger(validate(DesignPoint::nominal()), -0.5, s.constants, s.costs, s.finance), DomainError);
}

TEST_CASE("ledger renderings") {
    const auto L = nominal_ledger(ReflectorPricing::beryllium);
    std::ostringstream csv, text, groups;
    write_ledger_csv(csv, L);
    write_ledger_text(text, L);
    write_group_csv(groups, L);
    CHECK(csv.str().rfind("account,group,annualized_cost_usd2024,lcoe_share_usd_per_mwh\n", 0) == 0);
    CHECK(text.str().find("axial_reflector") != std::string::npos);
    CHECK(groups.str().find("capital") != std::string::npos);
}

TEST_CASE("database validation") {
    auto db = CostDatabase::defaults();
    CHECK_NOTHROW(db.check());
    db.learning_rates["heat_pipes"] = 1.2;
    CHECK_THROWS_AS(db.check(), ConfigError);
    db = CostDatabase::defaults();
    db.scaled_accounts.front().exponent = 1.5;
    CHECK_THROWS_AS(db.check(), ConfigError);
    db = CostDatabase::defaults();
    db.swu.year = 1990;
    CHECK_THROWS(db.check());
    CHECK_THROWS_AS(reflector_pricing_from("steel"), ConfigError);
}
