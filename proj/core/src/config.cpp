#include "hpmr/config.hpp"

#include "hpmr/error.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

namespace hpmr::config {

namespace {

using nlohmann::json;

template <class E>
using EnumTable = std::vector<std::pair<const char*, E>>;

const EnumTable<Sampling> kSampling = {{"uniform", Sampling::uniform}, {"lhs", Sampling::latin_hypercube}};
const EnumTable<econ::ReflectorPricing> kMode = {{"be", econ::ReflectorPricing::beryllium},
                                                 {"graphite", econ::ReflectorPricing::graphite}};
const EnumTable<rl::Optimizer> kOptim = {{"adam", rl::Optimizer::adam}, {"sgd", rl::Optimizer::sgd}};
const EnumTable<surrogate::Activation> kAct = {{"tanh", surrogate::Activation::tanh},
                                               {"identity", surrogate::Activation::identity}};

// Serializes into a JSON object.
struct Writer {
    json* cur;

    template <class T>
    void field(const char* key, T& v) {
        (*cur)[key] = v;
    }
    void field(const char* key, econ::Money& m) { (*cur)[key] = m.amount; }
    template <class E>
    void enumeration(const char* key, E& v, const EnumTable<E>& table) {
        for (const auto& [name, e] : table)
            if (e == v) (*cur)[key] = name;
    }
    template <class Fn>
    void section(const char* key, Fn&& fn) {
        json* parent = cur;
        (*parent)[key] = json::object();
        cur = &(*parent)[key];
        fn();
        cur = parent;
    }
};

// Reads from a complete (defaults-merged) JSON object.
struct Reader {
    const json* cur;
    std::string path;

    template <class T>
    void field(const char* key, T& v) {
        try {
            v = cur->at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("bad value for " + path + key);
        }
    }
    void field(const char* key, econ::Money& m) { field(key, m.amount); }
    template <class E>
    void enumeration(const char* key, E& v, const EnumTable<E>& table) {
        std::string s;
        field(key, s);
        for (const auto& [name, e] : table)
            if (s == name) {
                v = e;
                return;
            }
        throw ConfigError("unknown value '" + s + "' for " + path + key);
    }
    template <class Fn>
    void section(const char* key, Fn&& fn) {
        const json* parent = cur;
        const std::string saved = path;
        cur = &parent->at(key);
        path += std::string(key) + ".";
        fn();
        cur = parent;
        path = saved;
    }
};

void constraint_fields(auto& v, rl::Constraint& c) {
    if (c.direction != rl::Direction::upper) v.field("lower", c.lower);
    if (c.direction != rl::Direction::lower) v.field("upper", c.upper);
    v.field("weight", c.weight);
}

template <class V>
void visit(V& v, RunConfig& c) {
    v.section("run", [&] {
        auto& r = c.run;
        v.field("scenario", r.scenario);
        v.field("seed", r.seed);
        v.field("workers", r.workers);
        v.field("threads", r.threads);
        v.field("sample_budget", r.sample_budget);
        v.enumeration("sampling", r.sampling, kSampling);
        v.field("optimize_budget", r.optimize_budget);
        v.field("epoch_samples", r.epoch_samples);
        v.field("top_k", r.top_k);
        v.field("folds", r.folds);
        v.field("oracle", r.oracle);
        v.field("out", r.out);
        v.field("lcoe_cap", c.lcoe_cap);
        v.field("max_failure_fraction", c.max_failure_fraction);
    });
    v.enumeration("mode", c.costs.reflector, kMode);
    v.section("reactor", [&] {
        auto& k = c.reactor;
        v.field("thermal_power_mw", k.thermal_power_mw);
        v.field("flakes", k.flakes);
        v.field("compacts_per_flake", k.compacts_per_flake);
        v.field("heat_pipes_per_flake", k.heat_pipes_per_flake);
        v.field("moderator_rods_per_flake", k.moderator_rods_per_flake);
        v.field("drums", k.drums);
        v.field("drum_coating_thickness_cm", k.drum_coating_thickness_cm);
        v.field("moderator_clad_thickness_cm", k.moderator_clad_thickness_cm);
        v.field("heat_pipe_radius_cm", k.heat_pipe_radius_cm);
        v.field("radial_reflector_width_cm", k.radial_reflector_width_cm);
        v.field("total_height_cm", k.total_height_cm);
        v.field("packing_fraction", k.packing_fraction);
        v.field("flake_margin_cm", k.flake_margin_cm);
        v.field("drum_clearance_cm", k.drum_clearance_cm);
        v.field("vessel_thickness_cm", k.vessel_thickness_cm);
        v.field("uranium_per_particle_volume_kg_cm3", k.uranium_per_particle_volume_kg_cm3);
        v.section("density_g_cm3", [&] {
            v.field("triso", k.density.triso);
            v.field("yhx", k.density.yhx);
            v.field("graphite", k.density.graphite);
            v.field("beryllium", k.density.beryllium);
            v.field("b4c", k.density.b4c);
            v.field("steel", k.density.steel);
        });
    });
    v.section("rom", [&] {
        v.section("coefficients", [&] {
            auto& k = c.rom.coefficients;
            v.field("enrichment_exponent", k.enrichment_exponent);
            v.field("moderation_curvature", k.moderation_curvature);
            v.field("optimum_moderation_ratio", k.optimum_moderation_ratio);
            v.field("graphite_moderation_weight", k.graphite_moderation_weight);
            v.field("radial_savings_exponent", k.radial_savings_exponent);
            v.field("axial_savings_length_cm", k.axial_savings_length_cm);
            v.field("migration_area_cm2", k.migration_area_cm2);
            v.field("xenon_reactivity", k.xenon_reactivity);
            v.field("excess_reactivity", k.excess_reactivity);
            v.field("absorber_opacity", k.absorber_opacity);
            v.field("worth_moderation_exponent", k.worth_moderation_exponent);
            v.field("worth_leakage_exponent", k.worth_leakage_exponent);
            v.field("moderator_temperature_coefficient", k.moderator_temperature_coefficient);
            v.field("hfp_defect_pcm", k.hfp_defect_pcm);
            v.field("burnup_step_y", k.burnup_step_y);
            v.field("quasi_equilibrium_step_y", k.quasi_equilibrium_step_y);
            v.field("max_burnup_steps", k.max_burnup_steps);
        });
        v.section("anchors", [&] {
            auto& a = c.rom.anchors;
            v.field("lifetime_y", a.lifetime_y);
            v.field("sdm_pcm", a.sdm_pcm);
            v.field("fq", a.fq);
            v.field("fdh", a.fdh);
            v.field("itc_high_pcm_k", a.itc_high_pcm_k);
        });
    });
    v.section("costs", [&] {
        auto& d = c.costs;
        v.field("natural_uranium_usd_kg", d.natural_uranium);
        v.field("conversion_usd_kg", d.conversion);
        v.field("swu_usd", d.swu);
        v.field("enrichment_premium", d.enrichment_premium);
        v.field("feed_assay", d.feed_assay);
        v.field("tails_assay", d.tails_assay);
        v.field("fabrication_usd_kg", d.fabrication);
        v.field("disposal_usd_mwh", d.disposal_per_mwh);
        v.field("decommissioning_usd_kwe", d.decommissioning_per_kwe);
        v.field("heat_pipe_usd", d.heat_pipe);
        v.field("beryllium_usd_kg", d.beryllium);
        v.field("b4c_enriched_usd_kg", d.b4c_enriched);
        v.field("b4c_natural_usd_kg", d.b4c_natural);
        v.field("triso_usd_kg", d.triso);
        v.field("yhx_usd_kg", d.yhx);
        v.field("graphite_usd_kg", d.graphite);
        v.field("drum_installation_usd", d.drum_installation);
        v.field("drum_fabrication_usd", d.drum_fabrication);
        v.field("labor_usd_fte", d.labor_per_fte);
        v.field("maintenance_fraction", d.maintenance_fraction);
        v.field("learning_rates", d.learning_rates);
    });
    v.section("finance", [&] {
        auto& f = c.finance;
        v.field("discount_rate", f.discount_rate);
        v.field("levelization_years", f.levelization_years);
        v.field("debt_to_equity", f.debt_to_equity);
        v.field("financing_factor", f.financing_factor);
        v.field("indirect_fraction", f.indirect_fraction);
        v.field("thermal_efficiency", f.thermal_efficiency);
        v.field("refueling_operators", f.refueling_operators);
        v.field("refueling_days", f.refueling_days);
        v.field("emergency_rate_per_y", f.emergency_rate_per_y);
        v.field("refuel_startup_days", f.refuel_startup_days);
        v.field("emergency_startup_days", f.emergency_startup_days);
        v.field("reactors_per_monitor", f.reactors_per_monitor);
        v.field("security_per_shift", f.security_per_shift);
        v.field("ftes_per_post", f.ftes_per_post);
        v.field("emergency_operator_fte", f.emergency_operator_fte);
        v.field("replacement_interval_y", f.replacement_interval_y);
        v.field("capacity_factor_cap_y", f.capacity_factor_cap_y);
        v.field("noak_units", f.noak_units);
        v.field("learning_saturation_units", f.learning_saturation_units);
        v.field("capital_plant_fraction", f.capital_plant_fraction);
        v.field("fixed_om_usd_y", f.fixed_om);
        v.field("decommissioning_at_start", f.decommissioning_at_start);
    });
    v.section("surrogate", [&] {
        auto& s = c.surrogate;
        v.field("max_features", s.max_features);
        v.section("gp", [&] {
            v.field("length_grid", s.gp.length_grid);
            v.field("noise_ratio_grid", s.gp.noise_ratio_grid);
            v.field("ard", s.gp.ard);
            v.field("ard_iterations", s.gp.ard_iterations);
            v.field("ard_step", s.gp.ard_step);
        });
        v.section("mlp", [&] {
            v.field("hidden", s.mlp.hidden);
            v.enumeration("activation", s.mlp.activation, kAct);
            v.field("learning_rate", s.mlp.learning_rate);
            v.field("epochs", s.mlp.epochs);
            v.field("batch_size", s.mlp.batch_size);
        });
        v.section("forest", [&] {
            v.field("trees", s.forest.trees);
            v.field("max_depth", s.forest.max_depth);
            v.field("min_samples_leaf", s.forest.min_samples_leaf);
            v.field("feature_fraction", s.forest.feature_fraction);
        });
    });
    v.section("ppo", [&] {
        auto& p = c.ppo;
        v.field("n_steps", p.n_steps);
        v.field("learning_rate", p.learning_rate);
        v.field("clip", p.clip);
        v.field("entropy_coef", p.entropy_coef);
        v.field("value_coef", p.value_coef);
        v.field("max_grad_norm", p.max_grad_norm);
        v.field("batch_fraction", p.batch_fraction);
        v.field("epochs", p.epochs);
        v.field("gamma", p.gamma);
        v.field("gae_lambda", p.gae_lambda);
        v.field("normalize_advantage", p.normalize_advantage);
        v.enumeration("optimizer", p.optimizer, kOptim);
        v.field("adam_eps", p.adam_eps);
        v.field("init_log_std", p.init_log_std);
    });
    v.section("constraints", [&] {
        v.field("lcoe_weight", c.constraints.lcoe_weight);
        for (auto& k : c.constraints.items) {
            const std::string key = surrogate::to_string(k.target);
            v.section(key.c_str(), [&] { constraint_fields(v, k); });
        }
    });
}

// Overlay src onto dst, refusing keys the defaults do not define.
void merge(json& dst, const json& src, const std::string& path) {
    if (!src.is_object()) throw ConfigError("section " + (path.empty() ? std::string("<root>") : path) + " must be an object");
    const bool open = path == "costs.learning_rates.";
    for (const auto& [key, value] : src.items()) {
        if (!dst.contains(key)) {
            if (!open) throw ConfigError("unknown config key " + path + key);
            dst[key] = value;
            continue;
        }
        json& slot = dst[key];
        if (slot.is_object() && !open) {
            merge(slot, value, path + key + ".");
        } else if (slot.is_number() && !value.is_number()) {
            throw ConfigError("config key " + path + key + " must be a number");
        } else if (slot.is_number_integer() && !(value.is_number_integer() || value.is_number_unsigned())) {
            throw ConfigError("config key " + path + key + " must be an integer");
        } else if (!slot.is_number() && slot.type() != value.type()) {
            throw ConfigError("config key " + path + key + " has the wrong type");
        } else {
            slot = value;
        }
    }
}

json to_document(const RunConfig& c) {
    RunConfig copy = c;
    json doc = json::object();
    Writer w{&doc};
    visit(w, copy);
    return doc;
}

void validate(const RunConfig& c) {
    try {
        c.reactor.check();
        c.costs.check();
        c.finance.check();
        c.ppo.check();
        c.constraints.check();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    if (c.run.workers < 1) throw ConfigError("run.workers must be at least 1");
    if (c.run.folds < 2) throw ConfigError("run.folds must be at least 2");
    if (c.run.epoch_samples < 1) throw ConfigError("run.epoch_samples must be positive");
    if (c.run.top_k < 1) throw ConfigError("run.top_k must be positive");
    if (c.lcoe_cap < 0.0) throw ConfigError("run.lcoe_cap must be non-negative");
}

}  // namespace

rl::TrainConfig RunConfig::train_config() const {
    rl::TrainConfig t;
    t.ppo = ppo;
    t.ppo.workers = run.workers;
    t.constraints = constraints;
    t.budget = run.optimize_budget;
    t.epoch_samples = run.epoch_samples;
    t.seed = run.seed;
    t.top_k = run.top_k;
    t.lcoe_cap = lcoe_cap;
    t.threads = run.threads;
    t.max_failure_fraction = max_failure_fraction;
    return t;
}

std::string defaults_json() { return to_document(RunConfig{}).dump(2) + "\n"; }

RunConfig parse_config(std::string_view text) {
    json user;
    try {
        user = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    json doc = to_document(RunConfig{});
    merge(doc, user, "");
    RunConfig c;
    Reader r{&doc, ""};
    visit(r, c);
    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string canonical_json(const RunConfig& c) { return to_document(c).dump(); }

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const RunConfig& c) {
    // Where outputs go and how many threads compute them do not change their content.
    json doc = to_document(c);
    doc["run"].erase("out");
    doc["run"].erase("threads");
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(fnv1a(doc.dump())));
    return buf.data();
}

}  // namespace hpmr::config
