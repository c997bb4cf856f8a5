#include "hpmr/design.hpp"
#include "hpmr/error.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hpmr;
using namespace hpmr::design;

namespace {

// Hand oracle: 13 pins across the flats of a hexagonal flake, plus a fixed margin.
double flake_width_oracle(double pitch) { return 13.0 * std::sqrt(3.0) / 2.0 * pitch + 0.858; }

// Heavy metal scales with TRISO volume: 525.06 kg at the nominal compact (r = 1 cm, L = 160 cm).
double uranium_oracle(double r_cm, double l_cm, double pf) { return 525.06 * (pf / 0.40) * (r_cm * r_cm * l_cm) / 160.0; }

DesignPoint be_solution() { return {91.0, 0.53, 190.0, 2.20, 0.199, 1.10, 0.75}; }

}  // namespace

TEST_CASE("nominal design is valid") {
    CHECK_NOTHROW(validate(DesignPoint::nominal()));
}

TEST_CASE("compact radius above half the pitch is rejected") {
    DesignPoint d;
    d.compact_radius_cm = 1.2;
    try {
        validate(d);
        FAIL("expected OutOfBoundsError");
    } catch (const OutOfBoundsError& e) {
        CHECK(e.parameter() == "x_cr");
        CHECK(e.upper() == doctest::Approx(1.15).epsilon(1e-12));
        CHECK(std::string(e.what()).find("x_cr") != std::string::npos);
    }
}

TEST_CASE("moderator radius at the pitch-dependent lower bound is valid") {
    DesignPoint d;
    d.pin_pitch_cm = 1.94;
    d.compact_radius_cm = 0.6;
    d.moderator_radius_cm = 0.35;
    CHECK(bounds(Param::moderator_radius, 1.94).lower == doctest::Approx((1.94 - 0.19) / 5.0).epsilon(1e-14));
    CHECK_NOTHROW(validate(d));
    d.moderator_radius_cm = 0.3499;
    CHECK_THROWS_AS(validate(d), OutOfBoundsError);
}

TEST_CASE("every fixed bound is enforced on both sides") {
    for (std::size_t i = 0; i < 5; ++i) {
        const auto p = static_cast<Param>(i);
        const Bounds b = bounds(p, 2.3);
        auto v = DesignPoint::nominal().to_array();
        v[i] = b.lower - 1e-6 * (1.0 + std::abs(b.lower));
        CHECK_THROWS_AS(validate(DesignPoint::from_array(v)), OutOfBoundsError);
        v[i] = b.upper + 1e-6 * (1.0 + std::abs(b.upper));
        CHECK_THROWS_AS(validate(DesignPoint::from_array(v)), OutOfBoundsError);
    }
    DesignPoint d;
    d.enrichment = std::nan("");
    CHECK_THROWS_AS(validate(d), OutOfBoundsError);
}

TEST_CASE("flake width and drum radius goldens") {
    CHECK(std::abs(flake_width(2.3) - 26.752) <= 0.001);
    CHECK(std::abs(2.0 * drum_radius(flake_width(2.3)) - 26.5) <= 0.01);
    CHECK(drum_radius(26.752) == doctest::Approx(13.25).epsilon(1e-12));
    CHECK(flake_width(1.94) == doctest::Approx(22.699).epsilon(2e-5));
    CHECK(drum_radius(flake_width(1.94)) == doctest::Approx(11.224).epsilon(5e-5));
    for (double p : {1.94, 2.1, 2.3, 2.5, 2.78}) CHECK(flake_width(p) == doctest::Approx(flake_width_oracle(p)).epsilon(1e-14));
}

TEST_CASE("geometry volumes follow the compact count") {
    const ReactorConstants c;
    const auto v = validate(DesignPoint::nominal());
    const auto g = derive_geometry(v, c);
    const double compacts = 30 * 63 * std::numbers::pi * 1.0 * 160.0 * 1e-6;
    CHECK(g.compact_volume_m3 == doctest::Approx(compacts).epsilon(1e-12));
    CHECK(g.flake_width_cm == doctest::Approx(flake_width(2.3)).epsilon(1e-14));
    CHECK(g.axial_reflector_total_cm == doctest::Approx(40.0).epsilon(1e-12));
    CHECK(g.drum_height_cm == doctest::Approx(160.0).epsilon(1e-12));
    for (double x : {g.moderator_volume_m3, g.heat_pipe_volume_m3, g.monolith_volume_m3, g.radial_reflector_volume_m3,
                     g.axial_reflector_volume_m3, g.drum_body_volume_m3, g.drum_coating_volume_m3, g.vessel_volume_m3})
        CHECK(x > 0.0);
}

TEST_CASE("uranium inventory goldens") {
    const ReactorConstants c;
    const auto v = validate(DesignPoint::nominal());
    const auto m = mass_inventory(derive_geometry(v, c), v, c);
    CHECK(std::abs(m.uranium / 525.06 - 1.0) <= 0.01);
    CHECK(std::abs(m.u235 / 103.44 - 1.0) <= 0.01);
    CHECK(m.u235 / m.uranium == doctest::Approx(0.197).epsilon(1e-14));

    const auto sol = validate(be_solution());
    const auto ms = mass_inventory(derive_geometry(sol, c), sol, c);
    CHECK(std::abs(ms.uranium / 753.27 - 1.0) <= 0.01);
    CHECK(ms.uranium == doctest::Approx(uranium_oracle(1.10, 190.0, 0.40)).epsilon(1e-12));
}

TEST_CASE("uranium scales with packing fraction") {
    ReactorConstants c;
    c.packing_fraction = 0.30;
    const auto v = validate(DesignPoint::nominal());
    const auto m = mass_inventory(derive_geometry(v, c), v, c);
    CHECK(m.uranium == doctest::Approx(uranium_oracle(1.0, 160.0, 0.30)).epsilon(1e-12));
}

TEST_CASE("power density and burnup goldens") {
    const ReactorConstants c;
    const auto v = validate(DesignPoint::nominal());
    const auto g = derive_geometry(v, c);
    const auto m = mass_inventory(g, v, c);
    CHECK(std::abs(power_density(g, c) / 2.105 - 1.0) <= 0.005);
    CHECK(std::abs(burnup(6.99, m, c) / 9.725 - 1.0) <= 0.005);
    // MWd per kg equals GWd per tonne.
    CHECK(burnup(6.99, m, c) == doctest::Approx(2.0 * 6.99 * 365.25 / m.uranium).epsilon(1e-12));
}

TEST_CASE("normalize maps bounds to the unit cube") {
    const auto u = normalize(DesignPoint::nominal());
    CHECK(u[0] == doctest::Approx((90.0 - 35.0) / (180.0 - 35.0)).epsilon(1e-14));
    CHECK(u[0] == doctest::Approx(0.3793).epsilon(1e-4));

    const std::array<double, kNumParams> zeros{};
    const auto lo = denormalize(zeros);
    CHECK(lo.coating_angle_deg == 35.0);
    CHECK(lo.b10_fraction == 0.20);
    CHECK(lo.fuel_height_cm == 130.0);
    CHECK(lo.pin_pitch_cm == 1.94);
    CHECK(lo.enrichment == 0.17);
    CHECK(lo.compact_radius_cm == doctest::Approx(1.94 / 4.0).epsilon(1e-14));
    CHECK(lo.moderator_radius_cm == doctest::Approx((1.94 - 0.19) / 5.0).epsilon(1e-14));
}

TEST_CASE("normalize and denormalize round trip inside the bounds") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        std::array<double, kNumParams> u{};
        for (auto& x : u) x = unit(rng);
        const DesignPoint d = denormalize(u);
        CHECK_NOTHROW(validate(d));
        const auto back = normalize(d);
        for (std::size_t k = 0; k < kNumParams; ++k) CHECK(back[k] == doctest::Approx(u[k]).epsilon(1e-12));
    }
}

TEST_CASE("denormalize clips outside the unit cube") {
    std::array<double, kNumParams> u{};
    u.fill(1.5);
    const auto hi = denormalize(u);
    CHECK(hi.coating_angle_deg == 180.0);
    CHECK(hi.enrichment == 0.199);
    CHECK_NOTHROW(validate(hi));
}

TEST_CASE("design rows round trip through csv") {
    const DesignPoint d = be_solution();
    CHECK(csv_header() == "x_ca,x_B10,x_fh,x_pp,x_e,x_cr,x_mr");
    CHECK(from_csv_row(to_csv_row(d)) == d);
    CHECK_THROWS_AS(from_csv_row("1,2,3"), SchemaError);
}

TEST_CASE("reactor constants reject nonsense") {
    ReactorConstants c;
    c.packing_fraction = 1.5;
    CHECK_THROWS_AS(c.check(), ConfigError);
    c = {};
    c.total_height_cm = 150.0;
    CHECK_THROWS_AS(c.check(), ConfigError);
}
