#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace hpmr::design {

inline constexpr std::size_t kNumParams = 7;

enum class Param : std::size_t {
    coating_angle = 0,
    b10_enrichment,
    fuel_height,
    pin_pitch,
    enrichment,
    compact_radius,
    moderator_radius,
};

inline constexpr std::array<std::string_view, kNumParams> kParamNames = {
    "x_ca", "x_B10", "x_fh", "x_pp", "x_e", "x_cr", "x_mr"};

/// Seven-parameter design vector. Units: degrees, atom fraction, cm, cm, mass fraction, cm, cm.
struct DesignPoint {
    double coating_angle_deg = 90.0;
    double b10_fraction = 0.95;
    double fuel_height_cm = 160.0;
    double pin_pitch_cm = 2.3;
    double enrichment = 0.197;
    double compact_radius_cm = 1.0;
    double moderator_radius_cm = 0.825;

    static DesignPoint nominal() { return {}; }
    static DesignPoint from_array(std::span<const double, kNumParams> v);
    std::array<double, kNumParams> to_array() const;

    double operator[](Param p) const;

    bool operator==(const DesignPoint&) const = default;
};

struct Bounds {
    double lower;
    double upper;
};

inline constexpr double kModeratorCladCm = 0.095;

/// Bounds of one parameter; radius bounds depend on the pitch.
Bounds bounds(Param p, double pin_pitch_cm);

/// A design whose every bound has been checked. Only validate() constructs one.
class ValidatedDesign {
public:
    const DesignPoint& point() const noexcept { return point_; }
    operator const DesignPoint&() const noexcept { return point_; }

private:
    explicit ValidatedDesign(const DesignPoint& p) : point_(p) {}
    friend ValidatedDesign validate(const DesignPoint&);
    DesignPoint point_;
};

/// Throws OutOfBoundsError naming the parameter and both bounds.
ValidatedDesign validate(const DesignPoint& d);

struct MaterialDensities {
    double triso = 3.35;     // g/cm^3
    double yhx = 4.45;
    double graphite = 2.1;
    double beryllium = 1.85;
    double b4c = 2.52;
    double steel = 7.9;
};

struct ReactorConstants {
    double thermal_power_mw = 2.0;
    int flakes = 30;
    int compacts_per_flake = 63;
    int heat_pipes_per_flake = 37;
    int moderator_rods_per_flake = 27;
    int drums = 12;
    double drum_coating_thickness_cm = 1.0;
    double moderator_clad_thickness_cm = kModeratorCladCm;
    double heat_pipe_radius_cm = 1.05;
    double radial_reflector_width_cm = 260.0;
    double total_height_cm = 200.0;
    double packing_fraction = 0.40;
    double flake_margin_cm = 0.858;
    double drum_clearance_cm = 0.252;
    double vessel_thickness_cm = 2.0;
    // Heavy metal per cm^3 of TRISO particle volume inside a compact.
    double uranium_per_particle_volume_kg_cm3 = 525.06 / (0.40 * 30 * 63 * 3.14159265358979323846 * 160.0);
    MaterialDensities density;

    int total_compacts() const { return flakes * compacts_per_flake; }
    int total_heat_pipes() const { return flakes * heat_pipes_per_flake; }
    int total_moderator_rods() const { return flakes * moderator_rods_per_flake; }
    void check() const;
};

/// Derived dimensions. Volumes in m^3.
struct GeometrySpec {
    double flake_width_cm;
    double drum_radius_cm;
    double drum_height_cm;
    double axial_reflector_total_cm;  // top + bottom
    double flake_area_cm2;
    double envelope_area_cm2;
    double compact_volume_m3;
    double moderator_volume_m3;
    double heat_pipe_volume_m3;
    double monolith_volume_m3;
    double radial_reflector_volume_m3;
    double axial_reflector_volume_m3;
    double drum_body_volume_m3;
    double drum_coating_volume_m3;
    double vessel_volume_m3;
};

double flake_width(double pin_pitch_cm, const ReactorConstants& c = {});
double drum_radius(double flake_width_cm, const ReactorConstants& c = {});

GeometrySpec derive_geometry(const ValidatedDesign& d, const ReactorConstants& c);

/// Component masses in kg.
struct MassInventory {
    double compacts;
    double moderator_yhx;
    double monolith_graphite;
    double radial_reflector;
    double axial_reflector;   // Be mass whatever the pricing mode
    double drum_body;         // Be
    double drum_coating_b4c;
    double vessel_steel;
    double uranium;
    double u235;

    double beryllium() const { return axial_reflector + drum_body; }
    double graphite() const { return monolith_graphite + radial_reflector; }
};

MassInventory mass_inventory(const GeometrySpec& g, const ValidatedDesign& d, const ReactorConstants& c);

/// Q / total compact volume, MW/m^3.
double power_density(const GeometrySpec& g, const ReactorConstants& c);
/// Q * days / tHM, GWd/tHM.
double burnup(double lifetime_y, const MassInventory& m, const ReactorConstants& c);

/// Unit-cube map. Radius coordinates are relative to the pitch-dependent bounds.
std::array<double, kNumParams> normalize(const DesignPoint& d);
DesignPoint denormalize(std::span<const double, kNumParams> u);

std::string csv_header();
std::string to_csv_row(const DesignPoint& d);
DesignPoint from_csv_row(std::string_view row);

}  // namespace hpmr::design
