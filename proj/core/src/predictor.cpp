#include "hpmr/predictor.hpp"

#include "hpmr/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

namespace hpmr::surrogate {

namespace {

using nlohmann::json;

constexpr std::array<Target, 3> kStage1 = {Target::lifetime, Target::sdm, Target::fdh};
constexpr const char* kSchema = "hpmr.two_stage/1";

// Column statistics that tolerate constant columns by leaving them unscaled.
Standardizer lenient_standardizer(const Eigen::MatrixXd& X) {
    Standardizer s;
    s.mean = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean(j)).square().mean();
        s.scale(j) = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Eigen::VectorXd target_vector(const Dataset& d, Target t) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) y(static_cast<Eigen::Index>(i)) = value(d.rows[i].qoi, t);
    return y;
}

bool constant(const Eigen::VectorXd& y) { return !((y.array() - y.mean()).square().sum() > 0.0); }

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json to_json(const Standardizer& s) { return {{"mean", to_json(s.mean)}, {"scale", to_json(s.scale)}}; }

Standardizer std_from(const json& j) { return {vec_from(j.at("mean")), vec_from(j.at("scale"))}; }

}  // namespace

double SurrogateQoI::get(Target t) const {
    switch (t) {
        case Target::lifetime: return lifetime_y;
        case Target::sdm: return sdm_pcm;
        case Target::fdh: return fdh;
        case Target::qmax: return q_max_mw_m2;
    }
    return NAN;
}

std::vector<std::size_t> rf_feature_importance(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                               const ForestConfig& cfg, std::vector<double>* importance) {
    if (X.rows() < 50) throw DomainError("feature importance needs at least 50 rows");
    const auto rf = RandomForest::fit(X, y, cfg);
    if (importance) *importance = rf.importance();
    return rf.ranking();
}

TwoStagePredictor TwoStagePredictor::fit(const Dataset& d, const PredictorConfig& cfg) {
    if (d.size() < 10) throw DomainError("two-stage predictor needs at least 10 rows");
    TwoStagePredictor p;
    const Eigen::MatrixXd X = design_matrix(d);
    p.design_std_ = Standardizer::fit(X);
    const Eigen::MatrixXd Z = p.design_std_.transform(X);
    const std::size_t keep = std::min<std::size_t>(cfg.max_features, static_cast<std::size_t>(Z.cols()));

    // Stage-1 selection pools importance over the three targets.
    std::vector<double> pooled(static_cast<std::size_t>(Z.cols()), 0.0);
    bool any = false;
    for (Target t : kStage1) {
        const Eigen::VectorXd y = target_vector(d, t);
        if (constant(y) || Z.rows() < 50) continue;
        std::vector<double> imp;
        auto fc = cfg.forest;
        fc.seed = cfg.seed + static_cast<std::uint64_t>(t);
        rf_feature_importance(Z, y, fc, &imp);
        for (std::size_t j = 0; j < imp.size(); ++j) pooled[j] += imp[j];
        any = true;
    }
    std::vector<std::size_t> order(static_cast<std::size_t>(Z.cols()));
    std::iota(order.begin(), order.end(), 0);
    if (any)
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a] > pooled[b]; });
    p.stage1_features_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));

    const Eigen::MatrixXd Z1 = p.select(Z, p.stage1_features_);
    for (Target t : kStage1) p.gps_.push_back(GPModel::fit(Z1, target_vector(d, t), cfg.gp));

    const Eigen::VectorXd q = target_vector(d, Target::qmax);
    std::iota(order.begin(), order.end(), 0);
    if (!constant(q) && Z.rows() >= 50) {
        auto fc = cfg.forest;
        fc.seed = cfg.seed + 3;
        order = rf_feature_importance(Z, q, fc);
    }
    p.stage2_features_.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep));

    Eigen::MatrixXd A(Z.rows(), static_cast<Eigen::Index>(keep + 3));
    A.leftCols(static_cast<Eigen::Index>(keep)) = p.select(Z, p.stage2_features_);
    for (std::size_t k = 0; k < kStage1.size(); ++k)
        A.col(static_cast<Eigen::Index>(keep + k)) = target_vector(d, kStage1[k]);
    p.stage2_std_ = lenient_standardizer(A);
    const Eigen::MatrixXd As = p.stage2_std_.transform(A);
    p.q_mean_ = q.mean();
    const double sd = std::sqrt((q.array() - p.q_mean_).square().mean());
    p.q_scale_ = sd > 0.0 ? sd : 1.0;
    auto mc = cfg.mlp;
    mc.seed = cfg.seed + 17;
    p.mlp_ = MLPModel::fit(As, ((q.array() - p.q_mean_) / p.q_scale_).matrix(), mc);
    return p;
}

Eigen::MatrixXd TwoStagePredictor::select(const Eigen::MatrixXd& Z, const std::vector<std::size_t>& cols) const {
    Eigen::MatrixXd out(Z.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = Z.col(static_cast<Eigen::Index>(cols[k]));
    return out;
}

const MLPModel& TwoStagePredictor::mlp() const {
    if (!mlp_) throw DomainError("predictor is not fitted");
    return *mlp_;
}

Eigen::MatrixXd TwoStagePredictor::predict(const Eigen::MatrixXd& designs) const {
    if (!mlp_ || gps_.size() != kStage1.size()) throw DomainError("predictor is not fitted");
    if (designs.cols() != static_cast<Eigen::Index>(design::kNumParams))
        throw DomainError("predictor expects seven design columns");
    const Eigen::MatrixXd Z = design_std_.transform(designs);
    const Eigen::MatrixXd Z1 = select(Z, stage1_features_);
    Eigen::MatrixXd out(designs.rows(), 4);
    for (std::size_t k = 0; k < gps_.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = gps_[k].predict_mean(Z1);
    const auto keep = static_cast<Eigen::Index>(stage2_features_.size());
    Eigen::MatrixXd A(designs.rows(), keep + 3);
    A.leftCols(keep) = select(Z, stage2_features_);
    A.rightCols(3) = out.leftCols(3);
    out.col(3) = (mlp_->predict(stage2_std_.transform(A)).array() * q_scale_ + q_mean_).matrix();
    return out;
}

SurrogateQoI TwoStagePredictor::predict(const design::DesignPoint& x) const {
    const auto a = x.to_array();
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(design::kNumParams));
    for (std::size_t k = 0; k < design::kNumParams; ++k) row(0, static_cast<Eigen::Index>(k)) = a[k];
    const Eigen::MatrixXd r = predict(row);
    return {r(0, 0), r(0, 1), r(0, 2), r(0, 3)};
}

void TwoStagePredictor::save(std::ostream& out) const {
    const auto& net = mlp();
    json doc;
    doc["schema"] = kSchema;
    doc["design_standardization"] = to_json(design_std_);
    json s1;
    s1["features"] = stage1_features_;
    for (std::size_t k = 0; k < gps_.size(); ++k) {
        const auto& g = gps_[k];
        json inputs = json::array();
        for (Eigen::Index r = 0; r < g.inputs().rows(); ++r)
            inputs.push_back(to_json(Eigen::VectorXd(g.inputs().row(r).transpose())));
        s1["gps"].push_back({{"target", to_string(kStage1[k])},
                             {"signal_variance", g.hyper().signal_variance},
                             {"length_scales", g.hyper().length_scales},
                             {"noise_variance", g.hyper().noise_variance},
                             {"y_mean", g.y_mean()},
                             {"y_scale", g.y_scale()},
                             {"inputs", std::move(inputs)},
                             {"targets", to_json(g.targets())}});
    }
    doc["stage1"] = std::move(s1);
    doc["stage2"] = {{"design_features", stage2_features_},
                     {"input_standardization", to_json(stage2_std_)},
                     {"target_mean", q_mean_},
                     {"target_scale", q_scale_},
                     {"mlp",
                      {{"inputs", net.inputs()},
                       {"hidden", net.hidden()},
                       {"activation", net.activation() == Activation::tanh ? "tanh" : "identity"},
                       {"parameters", net.parameters()}}}};
    out << doc.dump(1) << '\n';
}

TwoStagePredictor TwoStagePredictor::load(std::istream& in) {
    try {
        const json doc = json::parse(in);
        if (doc.at("schema").get<std::string>() != kSchema) throw SchemaError("unknown model schema");
        TwoStagePredictor p;
        p.design_std_ = std_from(doc.at("design_standardization"));
        const auto& s1 = doc.at("stage1");
        p.stage1_features_ = s1.at("features").get<std::vector<std::size_t>>();
        for (const auto& g : s1.at("gps")) {
            const auto rows = g.at("inputs");
            Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(p.stage1_features_.size()));
            for (std::size_t r = 0; r < rows.size(); ++r) X.row(static_cast<Eigen::Index>(r)) = vec_from(rows[r]).transpose();
            GpHyper h{g.at("signal_variance").get<double>(), g.at("length_scales").get<std::vector<double>>(),
                      g.at("noise_variance").get<double>()};
            p.gps_.push_back(GPModel::from_parts(std::move(X), vec_from(g.at("targets")), std::move(h),
                                                 g.at("y_mean").get<double>(), g.at("y_scale").get<double>()));
        }
        if (p.gps_.size() != kStage1.size()) throw SchemaError("model needs three stage-1 GPs");
        const auto& s2 = doc.at("stage2");
        p.stage2_features_ = s2.at("design_features").get<std::vector<std::size_t>>();
        p.stage2_std_ = std_from(s2.at("input_standardization"));
        p.q_mean_ = s2.at("target_mean").get<double>();
        p.q_scale_ = s2.at("target_scale").get<double>();
        const auto& m = s2.at("mlp");
        const auto act = m.at("activation").get<std::string>() == "tanh" ? Activation::tanh : Activation::identity;
        MLPModel net(m.at("inputs").get<int>(), m.at("hidden").get<std::vector<int>>(), act, 0);
        net.set_parameters(m.at("parameters").get<std::vector<double>>());
        p.mlp_ = std::move(net);
        return p;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    } catch (const DomainError& e) {
        throw SchemaError(std::string("inconsistent model file: ") + e.what());
    }
}

CvReport kfold_r2(const PredictorConfig& cfg, const Dataset& d, int k) {
    const auto fold = fold_assignment(d.size(), k, cfg.seed);
    CvReport rep;
    for (int f = 0; f < k; ++f) {
        Dataset train, test;
        for (std::size_t i = 0; i < d.size(); ++i) (fold[i] == f ? test : train).rows.push_back(d.rows[i]);
        const auto model = TwoStagePredictor::fit(train, cfg);
        const Eigen::MatrixXd pred = model.predict(design_matrix(test));
        std::array<double, kNumTargets> r2{};
        for (std::size_t t = 0; t < kNumTargets; ++t) {
            std::vector<double> truth, guess;
            for (std::size_t i = 0; i < test.size(); ++i) {
                truth.push_back(value(test.rows[i].qoi, static_cast<Target>(t)));
                guess.push_back(pred(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)));
            }
            r2[t] = r_squared(truth, guess);
        }
        rep.per_fold.push_back(r2);
        for (std::size_t t = 0; t < kNumTargets; ++t) rep.r2[t] += r2[t] / k;
    }
    return rep;
}

}  // namespace hpmr::surrogate
