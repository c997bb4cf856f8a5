#include "hpmr/config.hpp"
#include "hpmr/error.hpp"
#include "hpmr/forest.hpp"
#include "hpmr/gp.hpp"
#include "hpmr/mlp.hpp"
#include "hpmr/pipeline.hpp"
#include "hpmr/predictor.hpp"
#include "hpmr/rom.hpp"
#include "hpmr/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

using namespace hpmr;
using namespace hpmr::surrogate;

namespace {

Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                               double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) X(i, j) = u(rng);
    return X;
}

GpSearch fixed(double sf2, double ls, double sn2) {
    GpSearch s;
    s.fixed = GpHyper{sf2, {ls}, sn2};
    return s;
}

// Dense log marginal likelihood of standardized targets.
double lml_oracle(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, double sf2, double ls, double sn2) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            K(i, j) = sf2 * std::exp(-0.5 * (X.row(i) - X.row(j)).squaredNorm() / (ls * ls)) + (i == j ? sn2 : 0.0);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    const double logdet = ldlt.vectorD().array().log().sum();
    return -0.5 * z.dot(ldlt.solve(z)) - 0.5 * logdet - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

const Dataset& rom_dataset() {
    static const Dataset d = [] {
        auto cfg = config::parse_config("{}");
        cfg.run.seed = 42;
        cfg.run.sample_budget = 900;
        return pipeline::build_dataset(cfg);
    }();
    return d;
}

Dataset holdout_dataset() {
    const physics::ReducedOrderModel rom;
    const auto designs = pipeline::sample_designs(100, config::Sampling::uniform, 4242);
    return pipeline::evaluate_designs(designs, rom, rl::EconContext{}, 4242, 0).dataset;
}

}  // namespace

TEST_CASE("GP interpolates noiseless training points") {
    std::mt19937_64 rng(1);
    const Eigen::MatrixXd X = uniform_matrix(rng, 25, 3);
    Eigen::VectorXd y(25);
    for (Eigen::Index i = 0; i < 25; ++i) y(i) = std::sin(2.0 * X(i, 0)) + X(i, 1) * X(i, 2);
    const auto gp = GPModel::fit(X, y, fixed(1.0, 0.8, 1e-12));
    for (Eigen::Index i = 0; i < 25; ++i) {
        const auto p = gp.predict(X.row(i).transpose());
        CHECK(std::abs(p.mean - y(i)) < 1e-6);
        CHECK(p.variance < 1e-6);
    }
}

TEST_CASE("GP log marginal likelihood matches a dense evaluation") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd X = uniform_matrix(rng, 30, 2);
    Eigen::VectorXd y = X.col(0).array().cos() + 0.3 * X.col(1).array();
    const auto gp = GPModel::fit(X, y, fixed(1.3, 0.7, 1e-3));
    const Eigen::VectorXd z = (y.array() - gp.y_mean()) / gp.y_scale();
    CHECK(gp.log_marginal_likelihood() == doctest::Approx(lml_oracle(X, z, 1.3, 0.7, 1e-3)).epsilon(1e-9));
}

TEST_CASE("GP with one point decays to the prior mean") {
    Eigen::MatrixXd X(1, 1);
    X << 0.0;
    Eigen::VectorXd y(1);
    y << 3.0;
    const auto gp = GPModel::from_parts(X, y, GpHyper{1.0, {1.0}, 1e-10}, 0.0, 1.0);
    CHECK(gp.predict(Eigen::VectorXd::Constant(1, 0.0)).mean == doctest::Approx(3.0).epsilon(1e-8));
    const auto far = gp.predict(Eigen::VectorXd::Constant(1, 40.0));
    CHECK(std::abs(far.mean) < 1e-12);
    CHECK(far.variance == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("GP recovers sin on thirty points") {
    Eigen::MatrixXd X(30, 1);
    Eigen::VectorXd y(30);
    for (int i = 0; i < 30; ++i) {
        X(i, 0) = 2.0 * std::numbers::pi * i / 29.0;
        y(i) = std::sin(X(i, 0));
    }
    const auto gp = GPModel::fit(X, y);
    double sse = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = 2.0 * std::numbers::pi * (i + 0.5) / 200.0;
        const double e = gp.predict(Eigen::VectorXd::Constant(1, x)).mean - std::sin(x);
        sse += e * e;
    }
    CHECK(std::sqrt(sse / 200.0) < 0.05);
}

TEST_CASE("GP mean is linear in the targets") {
    std::mt19937_64 rng(3);
    const Eigen::MatrixXd X = uniform_matrix(rng, 40, 4);
    const Eigen::VectorXd y = X.rowwise().squaredNorm() + X.col(0);
    const Eigen::MatrixXd Xt = uniform_matrix(rng, 15, 4);
    for (const GpSearch& s : {GpSearch{}, fixed(1.0, 1.2, 1e-6)}) {
        const auto a = GPModel::fit(X, y, s).predict_mean(Xt);
        const auto b = GPModel::fit(X, 2.0 * y, s).predict_mean(Xt);
        CHECK((b - 2.0 * a).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + a.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("GP survives duplicated inputs") {
    std::mt19937_64 rng(4);
    Eigen::MatrixXd X = uniform_matrix(rng, 12, 2);
    X.row(11) = X.row(10);
    Eigen::VectorXd y = X.col(0);
    const auto gp = GPModel::fit(X, y, fixed(1.0, 1.0, 1e-14));
    CHECK(std::isfinite(gp.predict(X.row(0).transpose()).mean));
    CHECK(std::isfinite(gp.log_marginal_likelihood()));
}

TEST_CASE("GP ARD refinement does not lower the likelihood") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd X = uniform_matrix(rng, 60, 3);
    const Eigen::VectorXd y = (3.0 * X.col(0)).array().sin() + 0.1 * X.col(1).array();
    GpSearch iso;
    GpSearch ard;
    ard.ard = true;
    const auto a = GPModel::fit(X, y, iso);
    const auto b = GPModel::fit(X, y, ard);
    CHECK(b.hyper().length_scales.size() == 3u);
    CHECK(b.log_marginal_likelihood() >= a.log_marginal_likelihood() - 1e-9);
}

TEST_CASE("MLP gradient matches central differences") {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd X = uniform_matrix(rng, 20, 5);
    const Eigen::VectorXd y = X.col(0).array().sin() + X.col(3).array();
    MLPModel net(5, {8, 6}, Activation::tanh, 9);
    std::normal_distribution<double> n(0.0, 0.5);
    double worst = 0.0;
    for (int point = 0; point < 10; ++point) {
        auto p = net.parameters();
        for (auto& w : p) w = n(rng);
        net.set_parameters(p);
        const auto g = net.gradient(X, y);
        REQUIRE(g.size() == p.size());
        constexpr double h = 1e-5;
        for (std::size_t k = 0; k < p.size(); ++k) {
            auto q = p;
            q[k] = p[k] + h;
            net.set_parameters(q);
            const double up = net.loss(X, y);
            q[k] = p[k] - h;
            net.set_parameters(q);
            const double down = net.loss(X, y);
            const double fd = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - g[k]) / std::max({std::abs(fd), std::abs(g[k]), 1e-6}));
        }
        net.set_parameters(p);
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("MLP without hidden layers is least squares") {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd X = uniform_matrix(rng, 200, 3);
    std::normal_distribution<double> noise(0.0, 0.05);
    Eigen::VectorXd y(200);
    for (Eigen::Index i = 0; i < 200; ++i) y(i) = 1.5 * X(i, 0) - 0.7 * X(i, 1) + 0.2 * X(i, 2) + 0.4 + noise(rng);

    Eigen::MatrixXd A(200, 4);
    A << X, Eigen::VectorXd::Ones(200);
    const Eigen::VectorXd beta = (A.transpose() * A).ldlt().solve(A.transpose() * y);

    MlpConfig cfg;
    cfg.hidden = {};
    cfg.batch_size = 200;
    cfg.learning_rate = 0.05;
    cfg.epochs = 3000;
    cfg.seed = 3;
    const auto net = MLPModel::fit(X, y, cfg);
    const auto p = net.parameters();
    REQUIRE(p.size() == 4u);
    for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(p[k] - beta(static_cast<Eigen::Index>(k))) < 1e-3);
}

TEST_CASE("MLP training loss never increases and is reproducible") {
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd X = uniform_matrix(rng, 120, 4);
    const Eigen::VectorXd y = (X.col(0).array() * X.col(1).array()).matrix() + X.col(2);
    MlpConfig cfg;
    cfg.hidden = {16, 16};
    cfg.epochs = 80;
    cfg.learning_rate = 0.05;
    cfg.seed = 5;
    const auto a = MLPModel::fit(X, y, cfg);
    const auto& h = a.loss_history();
    REQUIRE(h.size() >= 2u);
    for (std::size_t i = 1; i < h.size(); ++i) CHECK(h[i] <= h[i - 1]);
    const auto b = MLPModel::fit(X, y, cfg);
    CHECK(a.parameters() == b.parameters());
}

TEST_CASE("MLP learns a constant target") {
    std::mt19937_64 rng(9);
    const Eigen::MatrixXd X = uniform_matrix(rng, 64, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Constant(64, 0.75);
    MlpConfig cfg;
    cfg.hidden = {8};
    cfg.batch_size = 64;
    cfg.learning_rate = 0.02;
    cfg.epochs = 3000;
    const auto net = MLPModel::fit(X, y, cfg);
    const Eigen::VectorXd p = net.predict(X);
    CHECK((p.array() - 0.75).abs().maxCoeff() < 1e-2);
    CHECK_THROWS_AS(r_squared(std::vector<double>(4, 0.75), std::vector<double>(4, 0.75)), DomainError);
}

TEST_CASE("MLP rejects bad shapes") {
    CHECK_THROWS_AS(MLPModel(3, {0}, Activation::tanh, 1), DomainError);
    MLPModel net(3, {4}, Activation::tanh, 1);
    CHECK_THROWS_AS(net.predict(Eigen::VectorXd(Eigen::VectorXd::Zero(2))), DomainError);
    CHECK_THROWS_AS(net.set_parameters(std::vector<double>(3, 0.0)), DomainError);
}

TEST_CASE("forest ranks a planted signal first") {
    std::mt19937_64 rng(10);
    const Eigen::MatrixXd X = uniform_matrix(rng, 300, 7);
    std::normal_distribution<double> tiny(0.0, 1e-3);
    for (Eigen::Index j = 0; j < 7; ++j) {
        Eigen::VectorXd y = X.col(j);
        for (auto& v : y) v += tiny(rng);
        ForestConfig cfg;
        cfg.trees = 40;
        std::vector<double> imp;
        const auto rank = rf_feature_importance(X, y, cfg, &imp);
        CHECK(rank.front() == static_cast<std::size_t>(j));
        double sum = 0.0;
        for (double v : imp) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("forest importance on noise stays near the permutation null") {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd X = uniform_matrix(rng, 300, 7);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd y(300);
    for (auto& v : y) v = n(rng);
    ForestConfig cfg;
    cfg.trees = 40;
    std::vector<double> imp;
    rf_feature_importance(X, y, cfg, &imp);

    // Null level: mean importance per feature over forests fitted to permuted targets.
    std::vector<double> null(7, 0.0);
    std::vector<Eigen::Index> perm(300);
    std::iota(perm.begin(), perm.end(), 0);
    constexpr int kPerms = 20;
    for (int k = 0; k < kPerms; ++k) {
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::VectorXd yp(300);
        for (Eigen::Index i = 0; i < 300; ++i) yp(i) = y(perm[static_cast<std::size_t>(i)]);
        auto c = cfg;
        c.seed = 100 + static_cast<std::uint64_t>(k);
        std::vector<double> pi;
        rf_feature_importance(X, yp, c, &pi);
        for (std::size_t j = 0; j < 7; ++j) null[j] += pi[j] / kPerms;
    }
    for (std::size_t j = 0; j < 7; ++j) CHECK(imp[j] <= 3.0 * null[j]);
}

TEST_CASE("forest input validation") {
    std::mt19937_64 rng(12);
    const Eigen::MatrixXd X = uniform_matrix(rng, 40, 3);
    CHECK_THROWS_AS(rf_feature_importance(X, X.col(0), ForestConfig{}), DomainError);
    CHECK_THROWS_AS(RandomForest::fit(X.topRows(5), X.col(0).head(5)), DomainError);
    CHECK_THROWS_AS(RandomForest::fit(X, Eigen::VectorXd::Ones(40)), DomainError);
}

TEST_CASE("standardizer round trip") {
    std::mt19937_64 rng(13);
    Eigen::MatrixXd X = uniform_matrix(rng, 50, 7, -300.0, 900.0);
    const auto s = Standardizer::fit(X);
    const Eigen::MatrixXd Z = s.transform(X);
    CHECK(Z.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.inverse(Z) - X).cwiseAbs().maxCoeff() < 1e-12 * X.cwiseAbs().maxCoeff());
    X.col(2).setConstant(4.0);
    CHECK_THROWS_AS(Standardizer::fit(X), DomainError);
}

TEST_CASE("R squared") {
    const std::vector<double> t{1.0, 2.0, 4.0, 8.0, 3.0};
    const std::vector<double> p{1.1, 1.8, 4.3, 7.5, 3.2};
    const std::vector<double> mean(5, 3.6);
    CHECK(r_squared(t, t) == 1.0);
    CHECK(std::abs(r_squared(t, mean)) < 1e-15);
    std::vector<double> ta, pa;
    for (std::size_t i = 0; i < t.size(); ++i) {
        ta.push_back(-7.0 * t[i] + 100.0);
        pa.push_back(-7.0 * p[i] + 100.0);
    }
    CHECK(r_squared(ta, pa) == doctest::Approx(r_squared(t, p)).epsilon(1e-12));
}

TEST_CASE("Pearson correlation") {
    const std::vector<double> x{1.0, 2.0, 3.0, 5.0};
    std::vector<double> neg;
    for (double v : x) neg.push_back(-v);
    CHECK(pearson(x, x) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pearson(x, neg) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("fold assignment partitions the rows") {
    const auto f = fold_assignment(103, 5, 77);
    std::vector<int> counts(5, 0);
    for (int k : f) {
        REQUIRE(k >= 0);
        REQUIRE(k < 5);
        ++counts[static_cast<std::size_t>(k)];
    }
    for (int c : counts) CHECK((c == 20 || c == 21));
    CHECK(fold_assignment(103, 5, 77) == f);
    CHECK_THROWS_AS(fold_assignment(3, 5, 1), DomainError);
    CHECK_THROWS_AS(fold_assignment(30, 1, 1), DomainError);
}

TEST_CASE("outlier filter") {
    Dataset raw;
    for (int i = 0; i < 4; ++i) raw.rows.push_back({design::DesignPoint::nominal(), {6.9, -6700, 1.7, 1.4, 0.01, 0.018, -2, -2},
                                                     5000.0 + i, 1500.0, 1, "rom-v1"});
    FilterReport rep;
    auto clean = filter_outliers(raw, &rep);
    CHECK(clean.size() == 4u);
    CHECK(rep.retained == rep.raw);
    raw.rows[1].lcoe_foak = -5.0;
    raw.rows[2].qoi.fq = std::nan("");
    auto f = filter_outliers(raw, &rep);
    CHECK(f.size() == 2u);
    CHECK(rep.negative_cost == 1u);
    CHECK(rep.non_finite == 1u);
    CHECK(rep.retained <= rep.raw);
}

TEST_CASE("dataset csv round trip and schema errors") {
    const auto& d = rom_dataset();
    std::ostringstream out;
    write_dataset(out, d);
    std::istringstream in(out.str());
    const auto back = parse_dataset(csv::parse(in));
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.rows[i].design == d.rows[i].design);
        CHECK(back.rows[i].qoi == d.rows[i].qoi);
    }

    std::string text = out.str();
    const auto pos = text.find("sdm_pcm");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 7, "sdm_pcx");
    std::istringstream bad(text);
    try {
        parse_dataset(csv::parse(bad));
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("sdm_pcm") != std::string::npos);
    }
}

TEST_CASE("ROM correlations carry the expected signs") {
    const auto& d = rom_dataset();
    CHECK(d.size() <= 900u);
    for (const auto& r : d.rows) CHECK(!(r.lcoe_foak < 0.0));
    const auto m = correlation_matrix(d);
    const auto idx = [](const std::vector<std::string>& v, const std::string& s) {
        return static_cast<Eigen::Index>(std::find(v.begin(), v.end(), s) - v.begin());
    };
    const auto xmr = idx(m.rows, "x_mr");
    CHECK(m.values(xmr, idx(m.cols, "fdh")) < 0.0);
    CHECK(m.values(idx(m.rows, "x_e"), idx(m.cols, "lifetime_y")) > 0.0);
    CHECK(m.values(idx(m.rows, "x_fh"), idx(m.cols, "lifetime_y")) > 0.0);
    CHECK(m.values.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
}

TEST_CASE("two-stage predictor on ROM data") {
    const auto& d = rom_dataset();
    PredictorConfig cfg;
    const auto p = TwoStagePredictor::fit(d, cfg);
    CHECK(p.stage1_features().size() == 7u);
    CHECK(p.stage2_input_dim() == 10u);

    SUBCASE("agrees with the oracle on held-out designs") {
        const auto h = holdout_dataset();
        std::array<double, kNumTargets> err{};
        std::size_t n = 0;
        for (const auto& r : h.rows) {
            if (!(r.qoi.lifetime_y > 0.5)) continue;
            const auto q = p.predict(r.design);
            ++n;
            for (std::size_t t = 0; t < kNumTargets; ++t) {
                const double truth = value(r.qoi, static_cast<Target>(t));
                err[t] += std::abs(q.get(static_cast<Target>(t)) - truth) / std::abs(truth);
            }
        }
        REQUIRE(n > 30u);
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            INFO(to_string(static_cast<Target>(t)) << " mean relative error " << err[t] / n);
            CHECK(err[t] / static_cast<double>(n) < 0.15);
        }
    }

    SUBCASE("save and load reproduce predictions") {
        std::stringstream s;
        p.save(s);
        const auto q = TwoStagePredictor::load(s);
        const Eigen::MatrixXd X = design_matrix(d).topRows(20);
        CHECK((q.predict(X) - p.predict(X)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("two-stage predictor tolerates a constant stage-1 target") {
    Dataset d = rom_dataset();
    d.rows.resize(120);
    for (auto& r : d.rows) r.qoi.fdh = 1.469;
    PredictorConfig cfg;
    cfg.mlp.epochs = 30;
    const auto p = TwoStagePredictor::fit(d, cfg);
    const auto q = p.predict(design::DesignPoint::nominal());
    CHECK(std::isfinite(q.q_max_mw_m2));
    CHECK(q.fdh == doctest::Approx(1.469).epsilon(1e-9));
}

TEST_CASE("malformed model files are schema errors") {
    std::istringstream junk("{\"schema\":\"something\"}");
    CHECK_THROWS_AS(TwoStagePredictor::load(junk), SchemaError);
    std::istringstream broken("not json");
    CHECK_THROWS_AS(TwoStagePredictor::load(broken), SchemaError);
}

TEST_CASE("k-fold argument checks") {
    Dataset d = rom_dataset();
    d.rows.resize(20);
    CHECK_THROWS_AS(kfold_r2(PredictorConfig{}, d, 1), DomainError);
    d.rows.resize(3);
    CHECK_THROWS_AS(kfold_r2(PredictorConfig{}, d, 5), DomainError);
}
