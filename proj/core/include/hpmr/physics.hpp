#pragma once

#include "hpmr/design.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hpmr::physics {

struct QoIBundle {
    double lifetime_y;
    double sdm_pcm;
    double fq;
    double fdh;
    double q_avg_mw_m2;
    double q_max_mw_m2;
    double itc_low_pcm_k;   // 550-850 K
    double itc_high_pcm_k;  // 850-1150 K

    bool finite() const;
    bool operator==(const QoIBundle&) const = default;
};

/// Depletion trace: (time in years, k_eff), first entry the short quasi-equilibrium step.
class KeffTrace {
public:
    KeffTrace() = default;
    explicit KeffTrace(std::vector<std::pair<double, double>> points);

    const std::vector<std::pair<double, double>>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    std::vector<std::pair<double, double>> points_;
};

struct ReactivityStates {
    double k_hzp;      // isothermal 800 K, drums out
    double k_hfp;
    double k_all_in;
    double k_one_in;   // single most effective drum in
    double k_550;
    double k_850;
    double k_1150;

    void check() const;
};

/// compacts x axial nodes of linear power.
class PowerField {
public:
    PowerField(std::size_t compacts, std::size_t nodes);
    PowerField(std::size_t compacts, std::size_t nodes, std::vector<double> values);

    std::size_t compacts() const noexcept { return compacts_; }
    std::size_t nodes() const noexcept { return nodes_; }
    double& at(std::size_t c, std::size_t z) { return values_[c * nodes_ + z]; }
    double at(std::size_t c, std::size_t z) const { return values_[c * nodes_ + z]; }
    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::size_t compacts_;
    std::size_t nodes_;
    std::vector<double> values_;
};

inline constexpr std::size_t kAxialNodes = 20;

double reactivity_pcm(double k);

/// Q / (N_flakes N_compact L 2 pi r), MW/m^2.
double avg_heat_flux(const design::ValidatedDesign& d, const design::ReactorConstants& c);
double peak_heat_flux(double fq, double q_avg);
double f_delta_h(const PowerField& field);
double f_q(const PowerField& field);

/// dk values in pcm.
double shutdown_margin(double dk1, double dk2, double dk3);
double shutdown_margin(const ReactivityStates& s);

/// pcm/K.
double itc(double k_t1, double k_t2, double t1, double t2);

double lifetime_from_trace(const KeffTrace& trace);

struct Evaluation {
    QoIBundle qoi;
    std::optional<KeffTrace> trace;
    std::optional<ReactivityStates> states;
};

/// Substitution point for any reactivity model. Implementations must be callable concurrently.
class PhysicsEvaluator {
public:
    virtual ~PhysicsEvaluator() = default;
    virtual Evaluation evaluate(const design::ValidatedDesign& d) const = 0;
    virtual std::string id() const = 0;
};

}  // namespace hpmr::physics
