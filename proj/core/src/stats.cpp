#include "hpmr/stats.hpp"

#include "hpmr/csv.hpp"
#include "hpmr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace hpmr::surrogate {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) throw DomainError("standardizer needs at least two rows");
    Standardizer s;
    s.mean = X.colwise().mean().transpose();
    s.scale.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean(j)).square().sum() / static_cast<double>(X.rows());
        if (!(var > 0.0)) throw DomainError("zero-variance column " + std::to_string(j));
        s.scale(j) = std::sqrt(var);
    }
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd Standardizer::inverse(const Eigen::MatrixXd& Z) const {
    return (Z.array().rowwise() * scale.transpose().array()).matrix().rowwise() + mean.transpose();
}

Eigen::VectorXd Standardizer::transform_row(const Eigen::VectorXd& x) const {
    return (x - mean).array() / scale.array();
}

double r_squared(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size() || truth.empty()) throw DomainError("R^2 needs matching non-empty vectors");
    const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(truth.size());
    double ss_tot = 0.0;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        ss_tot += (truth[i] - mean) * (truth[i] - mean);
        ss_res += (truth[i] - pred[i]) * (truth[i] - pred[i]);
    }
    if (!(ss_tot > 0.0)) throw DomainError("R^2 undefined for a constant target");
    return 1.0 - ss_res / ss_tot;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 3) throw DomainError("correlation needs at least three paired values");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("correlation with a zero-variance column");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix correlation_matrix(const Dataset& d) {
    CorrelationMatrix m;
    for (auto n : design::kParamNames) m.rows.emplace_back(n);
    m.cols = {"lifetime_y", "sdm_pcm", "fq", "fdh", "qavg_mw_m2", "qmax_mw_m2", "itc_lo", "itc_hi",
              "lcoe_foak_usd_mwh"};
    m.values.resize(static_cast<Eigen::Index>(m.rows.size()), static_cast<Eigen::Index>(m.cols.size()));
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
        for (std::size_t i = 0; i < m.rows.size(); ++i) {
            std::vector<double> x, y;
            for (const auto& s : d.rows) {
                const auto& q = s.qoi;
                const std::array<double, 9> qs = {q.lifetime_y,  q.sdm_pcm,       q.fq,
                                                  q.fdh,         q.q_avg_mw_m2,   q.q_max_mw_m2,
                                                  q.itc_low_pcm_k, q.itc_high_pcm_k, s.lcoe_foak};
                if (!std::isfinite(qs[j])) continue;
                x.push_back(s.design.to_array()[i]);
                y.push_back(qs[j]);
            }
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = pearson(x, y);
        }
    }
    return m;
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m) {
    out << "input";
    for (const auto& c : m.cols) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < m.rows.size(); ++i) {
        out << m.rows[i];
        for (std::size_t j = 0; j < m.cols.size(); ++j)
            out << ',' << csv::format(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        out << '\n';
    }
}

std::vector<int> fold_assignment(std::size_t rows, int k, std::uint64_t seed) {
    if (k < 2 || rows < static_cast<std::size_t>(k)) throw DomainError("k-fold needs k >= 2 and rows >= k");
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> fold(rows);
    for (std::size_t i = 0; i < rows; ++i) fold[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    return fold;
}

Eigen::MatrixXd design_matrix(const Dataset& d) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(design::kNumParams));
    for (std::size_t r = 0; r < d.size(); ++r) {
        const auto v = d.rows[r].design.to_array();
        for (std::size_t c = 0; c < design::kNumParams; ++c)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v[c];
    }
    return X;
}

}  // namespace hpmr::surrogate
