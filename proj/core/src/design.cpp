#include "hpmr/design.hpp"

#include "hpmr/csv.hpp"
#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hpmr {

namespace {
std::string bounds_message(const std::string& p, double v, double lo, double hi) {
    std::ostringstream os;
    os.precision(10);
    os << p << " = " << v << " outside [" << lo << ", " << hi << "]";
    return os.str();
}
}  // namespace

OutOfBoundsError::OutOfBoundsError(std::string parameter, double value, double lower, double upper)
    : Error(bounds_message(parameter, value, lower, upper)),
      parameter_(std::move(parameter)),
      value_(value),
      lower_(lower),
      upper_(upper) {}

}  // namespace hpmr

namespace hpmr::design {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

constexpr std::array<Bounds, 5> kFixedBounds = {{
    {35.0, 180.0},
    {0.20, 0.95},
    {130.0, 190.0},
    {1.94, 2.78},
    {0.17, 0.199},
}};

double hex_area(double flat_to_flat) { return kSqrt3 / 2.0 * flat_to_flat * flat_to_flat; }

}  // namespace

DesignPoint DesignPoint::from_array(std::span<const double, kNumParams> v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

std::array<double, kNumParams> DesignPoint::to_array() const {
    return {coating_angle_deg, b10_fraction,      fuel_height_cm,     pin_pitch_cm,
            enrichment,        compact_radius_cm, moderator_radius_cm};
}

double DesignPoint::operator[](Param p) const { return to_array()[static_cast<std::size_t>(p)]; }

Bounds bounds(Param p, double pin_pitch_cm) {
    switch (p) {
        case Param::compact_radius:
            return {pin_pitch_cm / 4.0, pin_pitch_cm / 2.0};
        case Param::moderator_radius: {
            const double free = pin_pitch_cm - 2.0 * kModeratorCladCm;
            return {free / 5.0, free / 2.0};
        }
        default:
            return kFixedBounds[static_cast<std::size_t>(p)];
    }
}

ValidatedDesign validate(const DesignPoint& d) {
    const auto v = d.to_array();
    // Fixed bounds first so the pitch is trustworthy for the radius bounds.
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const auto p = static_cast<Param>(i);
        const Bounds b = bounds(p, d.pin_pitch_cm);
        const double tol = 1e-12 * std::max(1.0, std::abs(b.upper));
        if (!std::isfinite(v[i]) || v[i] < b.lower - tol || v[i] > b.upper + tol)
            throw OutOfBoundsError(std::string(kParamNames[i]), v[i], b.lower, b.upper);
    }
    return ValidatedDesign(d);
}

void ReactorConstants::check() const {
    if (thermal_power_mw <= 0 || flakes <= 0 || compacts_per_flake <= 0 || heat_pipes_per_flake < 0 ||
        moderator_rods_per_flake < 0 || drums <= 0)
        throw ConfigError("reactor constants: counts and power must be positive");
    if (packing_fraction <= 0 || packing_fraction > 1)
        throw ConfigError("reactor constants: packing fraction must lie in (0, 1]");
    if (total_height_cm <= 190.0)
        throw ConfigError("reactor constants: total height must exceed the largest fuel height");
    const auto& r = density;
    if (r.triso <= 0 || r.yhx <= 0 || r.graphite <= 0 || r.beryllium <= 0 || r.b4c <= 0 || r.steel <= 0)
        throw ConfigError("reactor constants: densities must be positive");
}

double flake_width(double pin_pitch_cm, const ReactorConstants& c) {
    return 13.0 * kSqrt3 / 2.0 * pin_pitch_cm + c.flake_margin_cm;
}

double drum_radius(double flake_width_cm, const ReactorConstants& c) {
    return 0.5 * (flake_width_cm - c.drum_clearance_cm);
}

GeometrySpec derive_geometry(const ValidatedDesign& vd, const ReactorConstants& c) {
    const DesignPoint& d = vd.point();
    constexpr double cm3_to_m3 = 1e-6;
    const double L = d.fuel_height_cm;

    GeometrySpec g{};
    g.flake_width_cm = flake_width(d.pin_pitch_cm, c);
    g.drum_radius_cm = drum_radius(g.flake_width_cm, c);
    g.drum_height_cm = L;
    g.axial_reflector_total_cm = c.total_height_cm - L;
    g.flake_area_cm2 = hex_area(g.flake_width_cm);
    g.envelope_area_cm2 = hex_area(c.radial_reflector_width_cm);

    const double rc = d.compact_radius_cm;
    const double rm = d.moderator_radius_cm;
    const double clad_r = rm + c.moderator_clad_thickness_cm;
    const double hp_r = c.heat_pipe_radius_cm;

    const double compact = c.total_compacts() * kPi * rc * rc * L;
    const double yhx = c.total_moderator_rods() * kPi * rm * rm * L;
    const double clad = c.total_moderator_rods() * kPi * clad_r * clad_r * L;
    const double hp = c.total_heat_pipes() * kPi * hp_r * hp_r * L;
    const double monolith = c.flakes * g.flake_area_cm2 * L - compact - clad - hp;

    const double rd = g.drum_radius_cm;
    const double t = c.drum_coating_thickness_cm;
    const double drum_full = c.drums * kPi * rd * rd * L;
    const double coating = c.drums * (d.coating_angle_deg / 360.0) * kPi * (rd * rd - (rd - t) * (rd - t)) * L;

    const double radial = (g.envelope_area_cm2 - c.flakes * g.flake_area_cm2) * L - drum_full;
    const double axial = g.envelope_area_cm2 * g.axial_reflector_total_cm;

    const double perimeter = 2.0 * kSqrt3 * c.radial_reflector_width_cm;
    const double vessel = (perimeter * c.total_height_cm + 2.0 * g.envelope_area_cm2) * c.vessel_thickness_cm;

    g.compact_volume_m3 = compact * cm3_to_m3;
    g.moderator_volume_m3 = yhx * cm3_to_m3;
    g.heat_pipe_volume_m3 = hp * cm3_to_m3;
    g.monolith_volume_m3 = monolith * cm3_to_m3;
    g.radial_reflector_volume_m3 = radial * cm3_to_m3;
    g.axial_reflector_volume_m3 = axial * cm3_to_m3;
    g.drum_body_volume_m3 = (drum_full - coating) * cm3_to_m3;
    g.drum_coating_volume_m3 = coating * cm3_to_m3;
    g.vessel_volume_m3 = vessel * cm3_to_m3;
    return g;
}

MassInventory mass_inventory(const GeometrySpec& g, const ValidatedDesign& d, const ReactorConstants& c) {
    // g/cm^3 * m^3 -> kg: 1 g/cm^3 = 1000 kg/m^3
    const auto kg = [](double rho, double v_m3) { return rho * 1000.0 * v_m3; };
    const auto& r = c.density;
    MassInventory m{};
    m.compacts = kg(r.triso, g.compact_volume_m3);
    m.moderator_yhx = kg(r.yhx, g.moderator_volume_m3);
    m.monolith_graphite = kg(r.graphite, g.monolith_volume_m3);
    m.radial_reflector = kg(r.graphite, g.radial_reflector_volume_m3);
    m.axial_reflector = kg(r.beryllium, g.axial_reflector_volume_m3);
    m.drum_body = kg(r.beryllium, g.drum_body_volume_m3);
    m.drum_coating_b4c = kg(r.b4c, g.drum_coating_volume_m3);
    m.vessel_steel = kg(r.steel, g.vessel_volume_m3);
    m.uranium = c.uranium_per_particle_volume_kg_cm3 * c.packing_fraction * g.compact_volume_m3 * 1e6;
    m.u235 = d.point().enrichment * m.uranium;
    return m;
}

double power_density(const GeometrySpec& g, const ReactorConstants& c) {
    return c.thermal_power_mw / g.compact_volume_m3;
}

double burnup(double lifetime_y, const MassInventory& m, const ReactorConstants& c) {
    const double days = lifetime_y * 365.25;
    return c.thermal_power_mw * days / m.uranium;  // MWd/kg == GWd/t
}

std::array<double, kNumParams> normalize(const DesignPoint& d) {
    const auto v = d.to_array();
    std::array<double, kNumParams> u{};
    for (std::size_t i = 0; i < kNumParams; ++i) {
        const Bounds b = bounds(static_cast<Param>(i), d.pin_pitch_cm);
        u[i] = (v[i] - b.lower) / (b.upper - b.lower);
    }
    return u;
}

DesignPoint denormalize(std::span<const double, kNumParams> u) {
    std::array<double, kNumParams> v{};
    const auto lerp = [](Bounds b, double t) {
        t = std::clamp(t, 0.0, 1.0);
        return b.lower + t * (b.upper - b.lower);
    };
    for (std::size_t i = 0; i < 5; ++i) v[i] = lerp(bounds(static_cast<Param>(i), 0.0), u[i]);
    const double pitch = v[static_cast<std::size_t>(Param::pin_pitch)];
    v[5] = lerp(bounds(Param::compact_radius, pitch), u[5]);
    v[6] = lerp(bounds(Param::moderator_radius, pitch), u[6]);
    return DesignPoint::from_array(v);
}

std::string csv_header() {
    std::string h;
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (i) h += ',';
        h += kParamNames[i];
    }
    return h;
}

std::string to_csv_row(const DesignPoint& d) {
    std::string row;
    const auto v = d.to_array();
    for (std::size_t i = 0; i < kNumParams; ++i) {
        if (i) row += ',';
        row += csv::format(v[i]);
    }
    return row;
}

DesignPoint from_csv_row(std::string_view row) {
    auto cells = csv::split(row);
    if (cells.size() < kNumParams)
        throw SchemaError("design row needs " + std::to_string(kNumParams) + " columns, got " +
                          std::to_string(cells.size()));
    std::array<double, kNumParams> v{};
    for (std::size_t i = 0; i < kNumParams; ++i) v[i] = csv::parse_double(cells[i]);
    return DesignPoint::from_array(v);
}

}  // namespace hpmr::design
