#include "hpmr/physics.hpp"

#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace hpmr::physics {

bool QoIBundle::finite() const {
    for (double v : {lifetime_y, sdm_pcm, fq, fdh, q_avg_mw_m2, q_max_mw_m2, itc_low_pcm_k, itc_high_pcm_k})
        if (!std::isfinite(v)) return false;
    return true;
}

KeffTrace::KeffTrace(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (!(points_[i].second > 0.0)) throw DomainError("k_eff must be positive");
        if (i > 0 && !(points_[i].first > points_[i - 1].first))
            throw DomainError("trace times must be strictly increasing");
    }
}

void ReactivityStates::check() const {
    for (double k : {k_hzp, k_hfp, k_all_in, k_one_in, k_550, k_850, k_1150})
        if (!(k > 0.0)) throw DomainError("reactivity state with non-positive k");
}

PowerField::PowerField(std::size_t compacts, std::size_t nodes)
    : compacts_(compacts), nodes_(nodes), values_(compacts * nodes, 0.0) {}

PowerField::PowerField(std::size_t compacts, std::size_t nodes, std::vector<double> values)
    : compacts_(compacts), nodes_(nodes), values_(std::move(values)) {
    if (values_.size() != compacts * nodes) throw DomainError("power field size mismatch");
}

double reactivity_pcm(double k) {
    if (!(k > 0.0)) throw DomainError("reactivity of non-positive k");
    return (k - 1.0) / k * 1e5;
}

double avg_heat_flux(const design::ValidatedDesign& vd, const design::ReactorConstants& c) {
    const auto& d = vd.point();
    const double L = d.fuel_height_cm / 100.0;
    const double r = d.compact_radius_cm / 100.0;
    return c.thermal_power_mw / (c.flakes * c.compacts_per_flake * L * 2.0 * std::numbers::pi * r);
}

double peak_heat_flux(double fq, double q_avg) {
    if (fq < 1.0) throw DomainError("F_q below 1");
    return fq * q_avg;
}

namespace {
void check_field(const PowerField& f) {
    if (f.compacts() == 0 || f.nodes() == 0) throw DomainError("empty power field");
    bool positive = false;
    for (double v : f.values()) {
        if (v < 0.0 || !std::isfinite(v)) throw DomainError("power field entries must be finite and non-negative");
        positive = positive || v > 0.0;
    }
    if (!positive) throw DomainError("all-zero power field");
}
}  // namespace

double f_delta_h(const PowerField& f) {
    check_field(f);
    double best = 0.0;
    double sum = 0.0;
    for (std::size_t c = 0; c < f.compacts(); ++c) {
        double integral = 0.0;
        for (std::size_t z = 0; z < f.nodes(); ++z) integral += f.at(c, z);
        best = std::max(best, integral);
        sum += integral;
    }
    return best / (sum / static_cast<double>(f.compacts()));
}

double f_q(const PowerField& f) {
    check_field(f);
    const auto& v = f.values();
    const double peak = *std::max_element(v.begin(), v.end());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    return peak / mean;
}

double shutdown_margin(double dk1, double dk2, double dk3) { return dk1 + 0.9 * (dk2 - dk3); }

double shutdown_margin(const ReactivityStates& s) {
    s.check();
    const double hfp = reactivity_pcm(s.k_hfp);
    const double dk1 = hfp - reactivity_pcm(s.k_hzp);
    const double dk2 = reactivity_pcm(s.k_all_in) - hfp;
    const double dk3 = reactivity_pcm(s.k_one_in) - hfp;
    return shutdown_margin(dk1, dk2, dk3);
}

double itc(double k_t1, double k_t2, double t1, double t2) {
    if (t1 == t2) throw DomainError("ITC needs two distinct temperatures");
    if (!(k_t1 > 0.0) || !(k_t2 > 0.0)) throw DomainError("ITC of non-positive k");
    const double drho = (k_t1 - k_t2) / (k_t1 * k_t2) * 1e5;
    return drho / (t1 - t2);
}

double lifetime_from_trace(const KeffTrace& trace) {
    const auto& p = trace.points();
    if (p.size() < 3) throw DomainError("lifetime needs at least three trace points");
    for (std::size_t i = 1; i < p.size(); ++i) {
        const auto [t0, k0] = p[i - 1];
        const auto [t1, k1] = p[i];
        if (k0 >= 1.0 && k1 < 1.0) return t0 + (t1 - t0) * (k0 - 1.0) / (k0 - k1);
    }
    const bool subcritical = std::all_of(p.begin(), p.end(), [](auto& q) { return q.second < 1.0; });
    // Non-starter: extrapolate backward through the first two burnup steps.
    // Still critical at the end: extrapolate forward through the last two.
    const auto [ta, ka] = subcritical ? p[1] : p[p.size() - 2];
    const auto [tb, kb] = subcritical ? p[2] : p[p.size() - 1];
    const double slope = (kb - ka) / (tb - ta);
    if (slope == 0.0) throw DomainError("flat trace never reaches k = 1");
    return ta + (1.0 - ka) / slope;
}

}  // namespace hpmr::physics
