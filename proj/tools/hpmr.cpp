// hpmr: sample, train, optimize, report and baseline commands over one JSON config.
#include "hpmr/config.hpp"
#include "hpmr/error.hpp"
#include "hpmr/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

using hpmr::config::RunConfig;
namespace fs = std::filesystem;

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::size_t> budget;
    std::optional<std::string> mode;
    bool oracle = false;
    std::string out;
    std::string dataset;
    std::string model;
    std::string design;
    std::string champions;
};

RunConfig resolve(const Flags& f, bool budget_is_sample) {
    RunConfig c = f.config.empty() ? hpmr::config::parse_config("{}") : hpmr::config::load_config(f.config);
    // Re-parse with overrides so validation and hashing see the effective document.
    nlohmann::json over = nlohmann::json::parse(hpmr::config::canonical_json(c));
    if (f.seed) over["run"]["seed"] = *f.seed;
    if (f.workers) over["run"]["workers"] = *f.workers;
    if (f.budget) over["run"][budget_is_sample ? "sample_budget" : "optimize_budget"] = *f.budget;
    if (f.mode) over["mode"] = *f.mode;
    if (f.oracle) over["run"]["oracle"] = true;
    if (!f.out.empty()) over["run"]["out"] = f.out;
    return hpmr::config::parse_config(over.dump());
}

fs::path run_dir(const Flags& f, const RunConfig& c, const std::string& command) {
    // An explicit --out names the run directory itself.
    if (!f.out.empty()) return f.out;
    return fs::path(c.run.out) / (command + "-" + c.run.scenario + "-" + hpmr::econ::to_string(c.costs.reflector) +
                                  "-s" + std::to_string(c.run.seed));
}

std::string kind(const std::exception& e) {
    if (dynamic_cast<const hpmr::ConfigError*>(&e)) return "config";
    if (dynamic_cast<const hpmr::SchemaError*>(&e)) return "schema";
    if (dynamic_cast<const hpmr::OutOfBoundsError*>(&e)) return "out_of_bounds";
    if (dynamic_cast<const hpmr::DomainError*>(&e)) return "domain";
    if (dynamic_cast<const hpmr::NumericalError*>(&e)) return "numerical";
    if (dynamic_cast<const hpmr::Error*>(&e)) return "runtime";
    return "internal";
}

int exit_code(const std::string& k) {
    if (k == "config") return 2;
    if (k == "schema") return 3;
    if (k == "domain" || k == "out_of_bounds") return 4;
    if (k == "numerical") return 5;
    return 1;
}

hpmr::design::DesignPoint pick_design(const Flags& f) {
    if (!f.design.empty()) return hpmr::design::from_csv_row(f.design);
    if (!f.champions.empty()) {
        const auto t = hpmr::csv::read(f.champions);
        if (t.rows.empty()) throw hpmr::SchemaError("champion file has no rows: " + f.champions);
        std::array<double, hpmr::design::kNumParams> x{};
        for (std::size_t k = 0; k < x.size(); ++k) x[k] = t.number(0, hpmr::design::kParamNames[k]);
        return hpmr::design::DesignPoint::from_array(x);
    }
    return {};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heat-pipe microreactor design and cost optimization"};
    app.require_subcommand(0, 1);
    Flags f;
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default config document and exit");

    const auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", f.seed, "Random seed");
        sub->add_option("--workers", f.workers, "Parallel workers");
        sub->add_option("--budget", f.budget, "Sample budget");
        sub->add_option("--mode", f.mode, "Reflector cost mode")->check(CLI::IsMember({"be", "graphite"}));
        sub->add_flag("--oracle", f.oracle, "Evaluate with the reduced-order model instead of the surrogate");
        sub->add_option("--out", f.out, "Run directory");
    };
    auto* sample = app.add_subcommand("sample", "Sample designs, evaluate, filter and write dataset.csv");
    auto* train = app.add_subcommand("train", "Fit the two-stage surrogate and report k-fold R^2");
    auto* optimize = app.add_subcommand("optimize", "Run PPO and re-evaluate champions");
    auto* report = app.add_subcommand("report", "Cost ledger for one design");
    auto* baseline = app.add_subcommand("baseline", "Random-search baseline");
    for (auto* s : {sample, train, optimize, report, baseline}) common(s);
    train->add_option("--dataset", f.dataset, "Dataset CSV")->required();
    optimize->add_option("--model", f.model, "Surrogate model file");
    report->add_option("--design", f.design, "Seven comma-separated design values");
    report->add_option("--champions", f.champions, "Take the first row of a champions CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << nlohmann::json{{"error", "usage"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    }

    try {
        if (print_defaults) {
            std::cout << hpmr::config::defaults_json();
            return 0;
        }
        std::ostream* log = &std::clog;
        if (sample->parsed()) {
            const auto c = resolve(f, true);
            const auto r = hpmr::pipeline::cmd_sample(c, run_dir(f, c, "sample"), log);
            std::cout << r.dataset.string() << '\n';
        } else if (train->parsed()) {
            const auto c = resolve(f, true);
            const auto r = hpmr::pipeline::cmd_train(c, f.dataset, run_dir(f, c, "train"), log);
            std::cout << r.model.string() << '\n';
        } else if (optimize->parsed()) {
            const auto c = resolve(f, false);
            const std::optional<fs::path> model = f.model.empty() ? std::nullopt : std::optional<fs::path>(f.model);
            const auto r = hpmr::pipeline::cmd_optimize(c, model, run_dir(f, c, "optimize"), log);
            std::cout << r.trace.string() << '\n';
        } else if (report->parsed()) {
            const auto c = resolve(f, false);
            const auto r = hpmr::pipeline::cmd_report(c, pick_design(f), run_dir(f, c, "report"));
            std::cout << "foak_lcoe=" << hpmr::csv::format(r.ledger.foak_lcoe)
                      << " noak_lcoe=" << hpmr::csv::format(r.ledger.noak_lcoe) << '\n';
        } else if (baseline->parsed()) {
            const auto c = resolve(f, false);
            const auto r = hpmr::pipeline::cmd_baseline(c, run_dir(f, c, "baseline"), log);
            std::cout << "feasible_mean_lcoe=" << hpmr::csv::format(r.feasible_mean_lcoe) << '\n';
        } else {
            std::cout << app.help();
        }
        return 0;
    } catch (const std::exception& e) {
        const auto k = kind(e);
        std::cerr << nlohmann::json{{"error", k}, {"message", e.what()}}.dump() << '\n';
        return exit_code(k);
    }
}
