#include "hpmr/pipeline.hpp"

#include "hpmr/error.hpp"
#include "hpmr/rom.hpp"
#include "hpmr/stats.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace hpmr::pipeline {

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

int threads_for(const config::RunConfig& cfg) {
    if (cfg.run.threads > 0) return cfg.run.threads;
    return std::min(cfg.run.workers, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));
}

physics::ReducedOrderModel make_oracle(const config::RunConfig& cfg) { return physics::ReducedOrderModel(cfg.reactor, cfg.rom); }

std::string hex(std::uint64_t h) {
    std::ostringstream s;
    s << std::hex;
    s.width(16);
    s.fill('0');
    s << h;
    return s.str();
}

std::string file_hash(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return hex(config::fnv1a(ss.str()));
}

void log_line(std::ostream* log, const std::string& s) {
    if (log) *log << s << '\n';
}

}  // namespace

std::vector<design::DesignPoint> sample_designs(std::size_t n, config::Sampling method, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::array<double, design::kNumParams>> unit(n);
    if (method == config::Sampling::uniform) {
        for (auto& x : unit)
            for (auto& v : x) v = u(rng);
    } else {
        std::vector<std::size_t> perm(n);
        for (std::size_t k = 0; k < design::kNumParams; ++k) {
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t i = 0; i < n; ++i)
                unit[i][k] = (static_cast<double>(perm[i]) + u(rng)) / static_cast<double>(n);
        }
    }
    std::vector<design::DesignPoint> out;
    out.reserve(n);
    for (const auto& x : unit) out.push_back(design::denormalize(x));
    return out;
}

EvaluatedSet evaluate_designs(const std::vector<design::DesignPoint>& designs, const physics::PhysicsEvaluator& oracle,
                              const rl::EconContext& econ, std::uint64_t seed, int threads, std::ostream* log) {
    struct Slot {
        std::optional<surrogate::Sample> sample;
        std::string error;
    };
    std::vector<Slot> slots(designs.size());
    const auto work = [&](std::size_t i) {
        try {
            const auto v = design::validate(designs[i]);
            surrogate::Sample s{designs[i], oracle.evaluate(v).qoi, NAN, NAN, seed, oracle.id()};
            if (s.qoi.lifetime_y > 0.0) {
                const auto L = econ::compute_ledger(v, s.qoi.lifetime_y, econ.constants, econ.costs, econ.finance);
                s.lcoe_foak = L.foak_lcoe;
                s.lcoe_noak = L.noak_lcoe;
            }
            slots[i].sample = std::move(s);
        } catch (const Error& e) {
            slots[i].error = e.what();
        }
    };
    const int n = std::max(1, threads);
    if (n == 1) {
        for (std::size_t i = 0; i < designs.size(); ++i) work(i);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t i = static_cast<std::size_t>(t); i < designs.size(); i += static_cast<std::size_t>(n)) work(i);
            });
    }
    EvaluatedSet out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].sample) {
            out.dataset.rows.push_back(std::move(*slots[i].sample));
        } else {
            ++out.failures;
            log_line(log, "row " + std::to_string(i) + " failed: " + slots[i].error);
        }
    }
    return out;
}

surrogate::Dataset build_dataset(const config::RunConfig& cfg, surrogate::FilterReport* report, std::size_t* failures,
                                 std::ostream* log) {
    const auto oracle = make_oracle(cfg);
    const auto designs = sample_designs(cfg.run.sample_budget, cfg.run.sampling, cfg.run.seed);
    auto set = evaluate_designs(designs, oracle, cfg.econ(), cfg.run.seed, threads_for(cfg), log);
    if (failures) *failures = set.failures;
    if (set.dataset.rows.empty()) {
        if (report) *report = {};
        return std::move(set.dataset);
    }
    return surrogate::filter_outliers(std::move(set.dataset), report);
}

csv::Meta run_meta(const config::RunConfig& cfg, const std::string& command) {
    return {{"command", command},
            {"config_hash", config::config_hash(cfg)},
            {"seed", std::to_string(cfg.run.seed)},
            {"mode", econ::to_string(cfg.costs.reflector)},
            {"scenario", cfg.run.scenario}};
}

SampleReport cmd_sample(const config::RunConfig& cfg, const fs::path& dir, std::ostream* log) {
    ensure_dir(dir);
    SampleReport rep;
    rep.requested = cfg.run.sample_budget;
    surrogate::Dataset d;
    if (cfg.run.sample_budget > 0) d = build_dataset(cfg, &rep.filter, &rep.failures, log);
    d.meta = run_meta(cfg, "sample");
    d.meta["oracle"] = make_oracle(cfg).id();
    d.meta["sampling"] = cfg.run.sampling == config::Sampling::uniform ? "uniform" : "lhs";
    d.meta["requested"] = std::to_string(rep.requested);
    d.meta["failures"] = std::to_string(rep.failures);
    d.meta["retained"] = std::to_string(d.size());
    d.meta["removed_negative_cost"] = std::to_string(rep.filter.negative_cost);
    d.meta["removed_non_finite"] = std::to_string(rep.filter.non_finite);
    rep.dataset = dir / "dataset.csv";
    {
        auto out = open_out(rep.dataset);
        surrogate::write_dataset(out, d);
    }
    std::vector<fs::path> files{rep.dataset};
    if (d.size() >= 3) {
        const auto corr_path = dir / "correlation.csv";
        auto out = open_out(corr_path);
        csv::write_meta(out, run_meta(cfg, "sample"));
        surrogate::write_correlation_csv(out, surrogate::correlation_matrix(d));
        files.push_back(corr_path);
    }
    log_line(log, "sampled " + std::to_string(rep.requested) + ", failures " + std::to_string(rep.failures) +
                      ", removed " + std::to_string(rep.filter.negative_cost + rep.filter.non_finite) + ", retained " +
                      std::to_string(d.size()));
    write_manifest(dir, "sample", cfg, files);
    return rep;
}

TrainReport cmd_train(const config::RunConfig& cfg, const fs::path& dataset, const fs::path& dir, std::ostream* log) {
    const auto d = surrogate::read_dataset(dataset);
    if (d.size() < 100) throw DomainError("training needs at least 100 rows, dataset has " + std::to_string(d.size()));
    ensure_dir(dir);
    auto pc = cfg.surrogate;
    pc.seed = cfg.run.seed;
    TrainReport rep;
    rep.cv = surrogate::kfold_r2(pc, d, cfg.run.folds);
    const auto model = surrogate::TwoStagePredictor::fit(d, pc);
    rep.model = dir / "model.json";
    {
        auto out = open_out(rep.model);
        model.save(out);
    }
    const auto cv_path = dir / "cv_report.csv";
    {
        auto out = open_out(cv_path);
        csv::write_meta(out, run_meta(cfg, "train"));
        out << "target,r2_mean";
        for (std::size_t f = 0; f < rep.cv.per_fold.size(); ++f) out << ",fold_" << f;
        out << '\n';
        for (std::size_t t = 0; t < surrogate::kNumTargets; ++t) {
            out << surrogate::to_string(static_cast<surrogate::Target>(t)) << ',' << csv::format(rep.cv.r2[t]);
            for (const auto& fold : rep.cv.per_fold) out << ',' << csv::format(fold[t]);
            out << '\n';
        }
    }
    for (std::size_t t = 0; t < surrogate::kNumTargets; ++t)
        log_line(log, "R2 " + surrogate::to_string(static_cast<surrogate::Target>(t)) + " " + csv::format(rep.cv.r2[t]));
    write_manifest(dir, "train", cfg, {rep.model, cv_path});
    return rep;
}

std::vector<ChampionRow> reevaluate(const std::vector<rl::Scored>& champions, const physics::PhysicsEvaluator& oracle,
                                    const rl::EconContext& econ, const rl::ConstraintSpec& spec) {
    const rl::OracleObjective full(oracle, econ);
    std::vector<design::DesignPoint> designs;
    for (const auto& c : champions) designs.push_back(c.design);
    const auto truth = full.evaluate(designs);
    std::vector<ChampionRow> rows;
    for (std::size_t i = 0; i < champions.size(); ++i) {
        const bool ok = !truth[i].failed && std::isfinite(truth[i].lcoe) && rl::feasible(truth[i].qoi, spec);
        rows.push_back({champions[i], truth[i], ok});
    }
    return rows;
}

void write_champions_csv(std::ostream& out, const std::vector<ChampionRow>& rows) {
    out << design::csv_header()
        << ",pred_lifetime_y,pred_sdm_pcm,pred_fdh,pred_qmax_mw_m2,pred_lcoe_foak,pred_reward,pred_feasible"
           ",true_lifetime_y,true_sdm_pcm,true_fdh,true_qmax_mw_m2,true_lcoe_foak,true_feasible\n";
    for (const auto& r : rows) {
        const auto& p = r.predicted;
        out << design::to_csv_row(p.design);
        for (double v : {p.outcome.qoi.lifetime_y, p.outcome.qoi.sdm_pcm, p.outcome.qoi.fdh, p.outcome.qoi.q_max_mw_m2,
                         p.outcome.lcoe, p.reward})
            out << ',' << csv::format(v);
        out << ',' << (p.feasible ? 1 : 0);
        const auto& t = r.truth;
        for (double v : {t.qoi.lifetime_y, t.qoi.sdm_pcm, t.qoi.fdh, t.qoi.q_max_mw_m2, t.lcoe})
            out << ',' << csv::format(t.failed ? NAN : v);
        out << ',' << (r.true_feasible ? 1 : 0) << '\n';
    }
}

OptimizeReport cmd_optimize(const config::RunConfig& cfg, const std::optional<fs::path>& model, const fs::path& dir,
                            std::ostream* log) {
    const auto oracle = make_oracle(cfg);
    const auto tc = cfg.train_config();
    OptimizeReport rep;
    if (cfg.run.oracle) {
        const rl::OracleObjective objective(oracle, cfg.econ());
        rep.search = rl::train(objective, tc);
    } else {
        if (!model) throw ConfigError("optimize needs a model file or --oracle");
        std::ifstream in(*model);
        if (!in) throw Error("cannot open model " + model->string());
        const auto predictor = surrogate::TwoStagePredictor::load(in);
        const rl::SurrogateObjective objective(predictor, cfg.econ());
        rep.search = rl::train(objective, tc);
    }
    ensure_dir(dir);
    rep.champions = reevaluate(rep.search.champions, oracle, cfg.econ(), cfg.constraints);
    auto meta = run_meta(cfg, "optimize");
    meta["evaluation"] = cfg.run.oracle ? oracle.id() : "two-stage-surrogate";
    meta["samples"] = std::to_string(rep.search.samples);
    meta["lcoe_cap"] = csv::format(rep.search.lcoe_cap);
    meta["failures"] = std::to_string(rep.search.failures);
    if (rep.search.aborted) meta["aborted"] = rep.search.abort_reason;
    rep.trace = dir / "trace.csv";
    {
        auto out = open_out(rep.trace);
        csv::write_meta(out, meta);
        rl::write_trace_csv(out, rep.search.trace);
    }
    const auto champ_path = dir / "champions.csv";
    {
        auto out = open_out(champ_path);
        csv::write_meta(out, meta);
        write_champions_csv(out, rep.champions);
    }
    log_line(log, "samples " + std::to_string(rep.search.samples) + ", feasible " +
                      std::to_string(rep.search.feasible_count) + ", best feasible LCOE " +
                      (rep.search.trace.empty() ? std::string("nan") : csv::format(rep.search.trace.back().best_lcoe)));
    write_manifest(dir, "optimize", cfg, {rep.trace, champ_path});
    if (rep.search.aborted) throw NumericalError(rep.search.abort_reason + " (partial trace written)");
    return rep;
}

LedgerReport cmd_report(const config::RunConfig& cfg, const design::DesignPoint& d, const fs::path& dir) {
    const auto oracle = make_oracle(cfg);
    const auto v = design::validate(d);
    LedgerReport rep{oracle.evaluate(v).qoi, {}};
    if (!(rep.qoi.lifetime_y > 0.0))
        throw DomainError("non-starter design (lifetime " + csv::format(rep.qoi.lifetime_y) + " y): no ledger");
    rep.ledger = econ::compute_ledger(v, rep.qoi.lifetime_y, cfg.reactor, cfg.costs, cfg.finance);
    ensure_dir(dir);
    const auto meta = run_meta(cfg, "report");
    std::vector<fs::path> files;
    const auto emit = [&](const std::string& name, auto&& body) {
        const auto p = dir / name;
        auto out = open_out(p);
        body(out);
        files.push_back(p);
    };
    emit("ledger.csv", [&](std::ostream& o) {
        csv::write_meta(o, meta);
        econ::write_ledger_csv(o, rep.ledger);
    });
    emit("ledger.txt", [&](std::ostream& o) { econ::write_ledger_text(o, rep.ledger); });
    emit("ledger_groups.csv", [&](std::ostream& o) {
        csv::write_meta(o, meta);
        econ::write_group_csv(o, rep.ledger);
    });
    for (econ::Group g : {econ::Group::capital, econ::Group::om, econ::Group::fuel}) {
        emit("ledger_" + econ::to_string(g) + ".csv", [&](std::ostream& o) {
            csv::write_meta(o, meta);
            o << "account,lcoe_share_usd_per_mwh\n";
            for (const auto& l : rep.ledger.lines)
                if (l.group == g) o << l.account << ',' << csv::format(l.lcoe_share) << '\n';
        });
    }
    emit("qoi.csv", [&](std::ostream& o) {
        csv::write_meta(o, meta);
        o << design::csv_header() << ",lifetime_y,sdm_pcm,fq,fdh,qavg_mw_m2,qmax_mw_m2,itc_lo,itc_hi\n"
          << design::to_csv_row(d);
        const auto& q = rep.qoi;
        for (double x : {q.lifetime_y, q.sdm_pcm, q.fq, q.fdh, q.q_avg_mw_m2, q.q_max_mw_m2, q.itc_low_pcm_k,
                         q.itc_high_pcm_k})
            o << ',' << csv::format(x);
        o << '\n';
    });
    write_manifest(dir, "report", cfg, files);
    return rep;
}

rl::SearchResult cmd_baseline(const config::RunConfig& cfg, const fs::path& dir, std::ostream* log) {
    const auto oracle = make_oracle(cfg);
    const rl::OracleObjective objective(oracle, cfg.econ());
    auto res = rl::random_search_baseline(objective, cfg.train_config());
    ensure_dir(dir);
    auto meta = run_meta(cfg, "baseline");
    meta["samples"] = std::to_string(res.samples);
    meta["feasible"] = std::to_string(res.feasible_count);
    meta["feasible_mean_lcoe"] = csv::format(res.feasible_mean_lcoe);
    const auto trace = dir / "baseline_trace.csv";
    {
        auto out = open_out(trace);
        csv::write_meta(out, meta);
        rl::write_trace_csv(out, res.trace);
    }
    const auto champ = dir / "baseline_champions.csv";
    {
        auto out = open_out(champ);
        csv::write_meta(out, meta);
        write_champions_csv(out, reevaluate(res.champions, oracle, cfg.econ(), cfg.constraints));
    }
    log_line(log, "random search: " + std::to_string(res.samples) + " samples, " + std::to_string(res.feasible_count) +
                      " feasible, mean feasible LCOE " + csv::format(res.feasible_mean_lcoe));
    write_manifest(dir, "baseline", cfg, {trace, champ});
    return res;
}

void write_manifest(const fs::path& dir, const std::string& command, const config::RunConfig& cfg,
                    const std::vector<fs::path>& files) {
    const auto cfg_path = dir / "config.json";
    {
        auto out = open_out(cfg_path);
        out << nlohmann::json::parse(config::canonical_json(cfg)).dump(2) << '\n';
    }
    nlohmann::json m;
    m["command"] = command;
    m["config_hash"] = config::config_hash(cfg);
    m["seed"] = cfg.run.seed;
    m["mode"] = econ::to_string(cfg.costs.reflector);
    m["files"] = nlohmann::json::array();
    for (const auto& f : files) m["files"].push_back({{"name", f.filename().string()}, {"fnv1a", file_hash(f)}});
    auto out = open_out(dir / "manifest.json");
    out << m.dump(2) << '\n';
}

}  // namespace hpmr::pipeline
