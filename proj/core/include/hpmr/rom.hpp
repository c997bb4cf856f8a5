#pragma once

#include "hpmr/design.hpp"
#include "hpmr/physics.hpp"

#include <array>
#include <string>
#include <vector>

namespace hpmr::physics {

/// Shape coefficients of the reduced-order model. The calibrated scale factors are solved from RomAnchors.
struct RomCoefficients {
    double enrichment_exponent = 0.35;
    double moderation_curvature = 0.12;
    double optimum_moderation_ratio = 0.5;   // relative to nominal moderation index
    double graphite_moderation_weight = 0.05;
    double radial_savings_exponent = 0.3;
    double axial_savings_length_cm = 10.0;
    double migration_area_cm2 = 30.0;
    double xenon_reactivity = 0.02;          // delta k
    double excess_reactivity = 0.10;         // k_hfp - xenon - 1 at nominal
    double absorber_opacity = 2.0;
    double worth_moderation_exponent = 0.6;
    double worth_leakage_exponent = 0.8;
    double moderator_temperature_coefficient = 3.0;  // pcm/K at nominal moderation
    double hfp_defect_pcm = -150.0;                  // nominal HZP -> HFP
    double burnup_step_y = 0.5;
    double quasi_equilibrium_step_y = 0.01;
    int max_burnup_steps = 120;
};

/// Nominal values the model is calibrated to reproduce.
struct RomAnchors {
    double lifetime_y = 6.99;
    double sdm_pcm = -6757.23;
    double fq = 1.787;
    double fdh = 1.469;
    double itc_high_pcm_k = -2.404;
};

struct RomCalibration {
    double k0;
    double depletion_alpha;
    double radial_savings_cm;
    double axial_savings_cm;
    double drum_worth_pcm;
    double doppler_pcm_sqrt_k;
    double fuel_rise_k_per_w_cm;
    double nominal_moderation;
    double nominal_leakage;
};

struct RomConfig {
    RomCoefficients coefficients;
    RomAnchors anchors;
};

/// Intermediate quantities for one design.
struct RomState {
    double moderation_index;
    double k_inf;
    double nonleakage;
    double extrapolated_radius_cm;
    double extrapolated_height_cm;
    double drum_worth_pcm;
    double depletion_slope_per_y;
    ReactivityStates states;
};

class ReducedOrderModel final : public PhysicsEvaluator {
public:
    explicit ReducedOrderModel(design::ReactorConstants constants = {}, RomConfig config = {});

    Evaluation evaluate(const design::ValidatedDesign& d) const override;
    std::string id() const override { return "rom-v1"; }

    RomState state(const design::ValidatedDesign& d) const;
    PowerField power_field(const design::ValidatedDesign& d) const;
    KeffTrace depletion_trace(const design::ValidatedDesign& d) const;

    const RomCalibration& calibration() const noexcept { return cal_; }
    const design::ReactorConstants& constants() const noexcept { return constants_; }
    const RomConfig& config() const noexcept { return config_; }

private:
    void calibrate();
    double moderation_index(const design::DesignPoint& d) const;
    std::array<double, kAxialNodes> axial_shape(double fuel_height_cm, double h_ext) const;
    std::vector<double> radial_shape(const design::DesignPoint& d, double r_ext) const;
    KeffTrace trace_from(const RomState& s) const;

    design::ReactorConstants constants_;
    RomConfig config_;
    RomCalibration cal_{};
    // Compact layout in lattice units: flake centre offsets and fuel pin offsets.
    std::vector<std::array<double, 2>> flake_offsets_;
    std::vector<std::array<double, 2>> fuel_offsets_;
};

}  // namespace hpmr::physics
