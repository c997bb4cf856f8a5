#include "hpmr/econ.hpp"
#include "hpmr/gp.hpp"
#include "hpmr/rl.hpp"
#include "hpmr/rom.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace hpmr;

namespace {

void BM_RomEvaluate(benchmark::State& state) {
    const physics::ReducedOrderModel rom;
    const auto d = design::validate(design::DesignPoint::nominal());
    for (auto _ : state) benchmark::DoNotOptimize(rom.evaluate(d));
}
BENCHMARK(BM_RomEvaluate);

void BM_Ledger(benchmark::State& state) {
    const design::ReactorConstants c;
    const auto db = econ::CostDatabase::defaults();
    const econ::FinanceAssumptions fin;
    const auto d = design::validate(design::DesignPoint::nominal());
    for (auto _ : state) benchmark::DoNotOptimize(econ::compute_ledger(d, 6.99, c, db, fin));
}
BENCHMARK(BM_Ledger);

void BM_GpPredict(benchmark::State& state) {
    const auto n = state.range(0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd X(n, 7);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = u(rng);
    const Eigen::VectorXd y = X.col(0).array().sin() + X.col(1).array();
    surrogate::GpSearch s;
    s.fixed = surrogate::GpHyper{1.0, {1.0}, 1e-6};
    const auto gp = surrogate::GPModel::fit(X, y, s);
    const Eigen::VectorXd x = X.row(0).transpose();
    for (auto _ : state) benchmark::DoNotOptimize(gp.predict(x));
}
BENCHMARK(BM_GpPredict)->Arg(100)->Arg(720);

void BM_PpoUpdate(benchmark::State& state) {
    rl::PpoHyper h;
    std::mt19937_64 rng(3);
    const auto s = rl::sample_actions(rl::GaussianPolicy{}, 64, rng);
    std::normal_distribution<double> n(-600.0, 40.0);
    rl::RolloutBatch batch{s.raw, s.log_prob, Eigen::VectorXd(64), Eigen::VectorXd(64)};
    for (Eigen::Index i = 0; i < 64; ++i) {
        batch.returns(i) = n(rng);
        batch.advantages(i) = batch.returns(i) + 600.0;
    }
    for (auto _ : state) {
        auto ps = rl::PolicyState::initial(h);
        benchmark::DoNotOptimize(rl::ppo_update(ps, batch, h, rng));
    }
}
BENCHMARK(BM_PpoUpdate);

}  // namespace
BENCHMARK_MAIN();
