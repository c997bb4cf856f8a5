#include "hpmr/rom.hpp"

#include "hpmr/error.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

namespace hpmr::physics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;
constexpr double kBesselZero = 2.405;
constexpr double kReferenceTemperature = 800.0;

using Axial = std::array<int, 2>;

// Hex sites in axial coordinates, ring by ring from the centre.
std::vector<Axial> hex_sites(int rings) {
    static constexpr std::array<Axial, 6> dirs = {{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
    std::vector<Axial> sites{{0, 0}};
    for (int n = 1; n < rings; ++n) {
        Axial cur{n * dirs[4][0], n * dirs[4][1]};
        for (const auto& d : dirs)
            for (int j = 0; j < n; ++j) {
                sites.push_back(cur);
                cur[0] += d[0];
                cur[1] += d[1];
            }
    }
    return sites;
}

std::array<double, 2> cartesian(const Axial& a) {
    return {a[0] + a[1] / 2.0, kSqrt3 / 2.0 * a[1]};
}

double solve(const std::function<double(double)>& f, double lo, double hi, const char* what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo * fhi > 0) throw NumericalError(std::string("ROM calibration cannot bracket ") + what);
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                    boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (a + b);
}

double k_from_rho(double rho_pcm) { return 1.0 / (1.0 - rho_pcm * 1e-5); }

}  // namespace

ReducedOrderModel::ReducedOrderModel(design::ReactorConstants constants, RomConfig config)
    : constants_(constants), config_(config) {
    constants_.check();
    const int per_flake = constants_.compacts_per_flake + constants_.heat_pipes_per_flake +
                          constants_.moderator_rods_per_flake;
    int rings = 1;
    while (3 * rings * (rings - 1) + 1 < per_flake) ++rings;
    const auto pins = hex_sites(rings);
    const long nf = constants_.compacts_per_flake;
    for (long s = 0; s < per_flake; ++s)
        if ((s + 1) * nf / per_flake > s * nf / per_flake) fuel_offsets_.push_back(cartesian(pins[s]));

    int flake_rings = 1;
    while (3 * flake_rings * (flake_rings - 1) < constants_.flakes) ++flake_rings;
    auto cells = hex_sites(flake_rings + 1);
    cells.erase(cells.begin());  // centre position holds no flake
    std::stable_sort(cells.begin(), cells.end(), [](const Axial& a, const Axial& b) {
        const auto da = cartesian(a);
        const auto db = cartesian(b);
        return std::hypot(da[0], da[1]) < std::hypot(db[0], db[1]) - 1e-9;
    });
    for (int i = 0; i < constants_.flakes; ++i) flake_offsets_.push_back(cartesian(cells[i]));

    calibrate();
}

double ReducedOrderModel::moderation_index(const design::DesignPoint& d) const {
    const auto& c = constants_;
    const double w = design::flake_width(d.pin_pitch_cm, c);
    const double flake_area = kSqrt3 / 2.0 * w * w;
    const double fuel = c.compacts_per_flake * kPi * d.compact_radius_cm * d.compact_radius_cm;
    const double rm = d.moderator_radius_cm;
    const double clad = rm + c.moderator_clad_thickness_cm;
    const double hp = c.heat_pipes_per_flake * kPi * c.heat_pipe_radius_cm * c.heat_pipe_radius_cm;
    const double graphite = flake_area - fuel - c.moderator_rods_per_flake * kPi * clad * clad - hp;
    const double moderator = c.moderator_rods_per_flake * kPi * rm * rm;
    return (moderator + config_.coefficients.graphite_moderation_weight * graphite) / fuel;
}

std::array<double, kAxialNodes> ReducedOrderModel::axial_shape(double fuel_height_cm, double h_ext) const {
    std::array<double, kAxialNodes> axial{};
    const double L = fuel_height_cm;
    const double th = kPi / h_ext;
    const double dz = L / kAxialNodes;
    for (std::size_t z = 0; z < kAxialNodes; ++z) {
        const double z0 = z * dz - L / 2.0;
        axial[z] = (std::sin(th * (z0 + dz)) - std::sin(th * z0)) / (th * dz);
    }
    return axial;
}

std::vector<double> ReducedOrderModel::radial_shape(const design::DesignPoint& d, double r_ext) const {
    const double w = design::flake_width(d.pin_pitch_cm, constants_);
    const double p = d.pin_pitch_cm;
    std::vector<double> radial;
    radial.reserve(flake_offsets_.size() * fuel_offsets_.size());
    for (const auto& fl : flake_offsets_)
        for (const auto& pin : fuel_offsets_) {
            const double x = w * fl[0] + p * pin[0];
            const double y = w * fl[1] + p * pin[1];
            radial.push_back(boost::math::cyl_bessel_j(0, kBesselZero * std::sqrt(x * x + y * y) / r_ext));
        }
    return radial;
}

RomState ReducedOrderModel::state(const design::ValidatedDesign& vd) const {
    const auto& d = vd.point();
    const auto& k = config_.coefficients;
    const auto& c = constants_;
    RomState s{};
    s.moderation_index = moderation_index(d);
    const double S = s.moderation_index / cal_.nominal_moderation;

    const double mis = std::log(S / k.optimum_moderation_ratio);
    s.k_inf = cal_.k0 * std::pow(d.enrichment / 0.197, k.enrichment_exponent) *
              (1.0 - k.moderation_curvature * mis * mis);

    const double w = design::flake_width(d.pin_pitch_cm, c);
    const double core_radius = std::sqrt((c.flakes + 1) * (kSqrt3 / 2.0 * w * w) / kPi);
    s.extrapolated_radius_cm = core_radius + cal_.radial_savings_cm * std::pow(S, k.radial_savings_exponent);
    const double t_ax = (c.total_height_cm - d.fuel_height_cm) / 2.0;
    s.extrapolated_height_cm =
        d.fuel_height_cm + 2.0 * cal_.axial_savings_cm * (1.0 - std::exp(-t_ax / k.axial_savings_length_cm));
    const double b2 = std::pow(kBesselZero / s.extrapolated_radius_cm, 2) + std::pow(kPi / s.extrapolated_height_cm, 2);
    s.nonleakage = 1.0 / (1.0 + k.migration_area_cm2 * b2);
    const double k_hzp = s.k_inf * s.nonleakage;

    const double leakage = 1.0 - s.nonleakage;
    const double absorb = (1.0 - std::exp(-k.absorber_opacity * d.b10_fraction * d.coating_angle_deg / (0.95 * 90.0))) /
                          (1.0 - std::exp(-k.absorber_opacity));
    s.drum_worth_pcm = cal_.drum_worth_pcm * absorb * std::pow(S, k.worth_moderation_exponent) *
                       std::pow(leakage / cal_.nominal_leakage, k.worth_leakage_exponent);

    const double aD = cal_.doppler_pcm_sqrt_k;
    const double q_lin = c.thermal_power_mw * 1e6 / (c.total_compacts() * d.fuel_height_cm);  // W/cm
    const double rise = cal_.fuel_rise_k_per_w_cm * q_lin;
    const double T0 = kReferenceTemperature;
    const double rho_hzp = reactivity_pcm(k_hzp);
    const double rho_hfp = rho_hzp - aD * (std::sqrt(T0 + rise) - std::sqrt(T0));
    const auto rho_iso = [&](double T) {
        return rho_hzp - aD * (std::sqrt(T) - std::sqrt(T0)) + k.moderator_temperature_coefficient * S * (T - T0);
    };

    s.states.k_hzp = k_hzp;
    s.states.k_hfp = k_from_rho(rho_hfp);
    s.states.k_all_in = k_from_rho(rho_hfp - s.drum_worth_pcm);
    s.states.k_one_in = k_from_rho(rho_hfp - s.drum_worth_pcm / c.drums);
    s.states.k_550 = k_from_rho(rho_iso(550.0));
    s.states.k_850 = k_from_rho(rho_iso(850.0));
    s.states.k_1150 = k_from_rho(rho_iso(1150.0));

    const double uranium = c.uranium_per_particle_volume_kg_cm3 * c.packing_fraction * c.total_compacts() * kPi *
                           d.compact_radius_cm * d.compact_radius_cm * d.fuel_height_cm;
    s.depletion_slope_per_y = cal_.depletion_alpha * c.thermal_power_mw / (d.enrichment * uranium);
    return s;
}

PowerField ReducedOrderModel::power_field(const design::ValidatedDesign& vd) const {
    const auto s = state(vd);
    const auto radial = radial_shape(vd.point(), s.extrapolated_radius_cm);
    const auto axial = axial_shape(vd.point().fuel_height_cm, s.extrapolated_height_cm);
    PowerField f(radial.size(), kAxialNodes);
    for (std::size_t c = 0; c < radial.size(); ++c)
        for (std::size_t z = 0; z < kAxialNodes; ++z) f.at(c, z) = radial[c] * axial[z];
    return f;
}

KeffTrace ReducedOrderModel::depletion_trace(const design::ValidatedDesign& vd) const {
    return trace_from(state(vd));
}

KeffTrace ReducedOrderModel::trace_from(const RomState& s) const {
    const auto& k = config_.coefficients;
    const double k_eq = s.states.k_hfp - k.xenon_reactivity;
    const double slope = s.depletion_slope_per_y;
    std::vector<std::pair<double, double>> pts;
    // Xenon still building during the first short step.
    const double t0 = k.quasi_equilibrium_step_y;
    pts.emplace_back(t0, s.states.k_hfp - 0.5 * k.xenon_reactivity - slope * t0);
    for (int i = 1; i <= k.max_burnup_steps; ++i) {
        const double t = i * k.burnup_step_y;
        const double kt = std::max(k_eq - slope * t, 1e-3);
        pts.emplace_back(t, kt);
        if (i >= 2 && kt < 1.0) break;
    }
    return KeffTrace(std::move(pts));
}

Evaluation ReducedOrderModel::evaluate(const design::ValidatedDesign& vd) const {
    const auto s = state(vd);
    // The field is separable, so its peaking factors factor into radial and axial parts.
    auto radial = radial_shape(vd.point(), s.extrapolated_radius_cm);
    const auto axial = axial_shape(vd.point().fuel_height_cm, s.extrapolated_height_cm);
    const std::size_t n = radial.size();
    const double fdh = f_delta_h(PowerField(n, 1, std::move(radial)));
    const double fz = f_q(PowerField(1, kAxialNodes, std::vector<double>(axial.begin(), axial.end())));

    Evaluation e;
    e.trace = trace_from(s);
    e.states = s.states;
    auto& q = e.qoi;
    q.lifetime_y = lifetime_from_trace(*e.trace);
    q.sdm_pcm = shutdown_margin(s.states);
    q.fdh = fdh;
    q.fq = fdh * fz;
    q.q_avg_mw_m2 = avg_heat_flux(vd, constants_);
    q.q_max_mw_m2 = peak_heat_flux(q.fq, q.q_avg_mw_m2);
    q.itc_low_pcm_k = itc(s.states.k_550, s.states.k_850, 550.0, 850.0);
    q.itc_high_pcm_k = itc(s.states.k_850, s.states.k_1150, 850.0, 1150.0);
    return e;
}

void ReducedOrderModel::calibrate() {
    const auto& k = config_.coefficients;
    const auto& a = config_.anchors;
    const auto nominal = design::validate(design::DesignPoint::nominal());
    const auto& d = nominal.point();

    cal_ = RomCalibration{};
    cal_.k0 = 1.0;
    cal_.depletion_alpha = 1.0;
    cal_.radial_savings_cm = 30.0;
    cal_.axial_savings_cm = 40.0;
    cal_.drum_worth_pcm = 1.0;
    cal_.nominal_moderation = moderation_index(d);
    cal_.nominal_leakage = 1.0;

    // Temperature terms are closed form.
    const double window = (std::sqrt(1150.0) - std::sqrt(850.0)) / 300.0;
    cal_.doppler_pcm_sqrt_k = (k.moderator_temperature_coefficient - a.itc_high_pcm_k) / window;
    if (!(cal_.doppler_pcm_sqrt_k > 0.0)) throw NumericalError("ROM calibration: Doppler coefficient not positive");
    const double T0 = kReferenceTemperature;
    const double root = std::sqrt(T0) - k.hfp_defect_pcm / cal_.doppler_pcm_sqrt_k;
    const double q_lin =
        constants_.thermal_power_mw * 1e6 / (constants_.total_compacts() * d.fuel_height_cm);
    cal_.fuel_rise_k_per_w_cm = (root * root - T0) / q_lin;

    // Axial shape: F_z = F_q / F_dh (independent of the radial savings).
    const double fz_target = a.fq / a.fdh;
    cal_.axial_savings_cm = solve(
        [&](double x) {
            cal_.axial_savings_cm = x;
            const auto f = power_field(nominal);
            return f_q(f) / f_delta_h(f) - fz_target;
        },
        0.5, 500.0, "axial savings");
    cal_.radial_savings_cm = solve(
        [&](double x) {
            cal_.radial_savings_cm = x;
            return f_delta_h(power_field(nominal)) - a.fdh;
        },
        10.0, 1000.0, "radial savings");
    cal_.nominal_leakage = 1.0 - state(nominal).nonleakage;

    cal_.k0 = solve(
        [&](double x) {
            cal_.k0 = x;
            return state(nominal).states.k_hfp - k.xenon_reactivity - 1.0 - k.excess_reactivity;
        },
        0.3, 5.0, "k0");
    const double slope = k.excess_reactivity / a.lifetime_y;
    cal_.depletion_alpha = 1.0;
    cal_.depletion_alpha = slope / state(nominal).depletion_slope_per_y;

    cal_.drum_worth_pcm = 1.0;
    const auto s = state(nominal);
    const double dk1 = reactivity_pcm(s.states.k_hfp) - reactivity_pcm(s.states.k_hzp);
    const double per_unit = 0.9 * s.drum_worth_pcm * (constants_.drums - 1) / constants_.drums;
    cal_.drum_worth_pcm = (dk1 - a.sdm_pcm) / per_unit;
    if (!(cal_.drum_worth_pcm > 0.0)) throw NumericalError("ROM calibration: drum worth not positive");
}

}  // namespace hpmr::physics
