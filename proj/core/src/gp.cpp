#include "hpmr/gp.hpp"

#include "hpmr/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace hpmr::surrogate {

namespace {

constexpr std::array<double, 5> kJitterLadder = {1e-10, 1e-9, 1e-8, 1e-7, 1e-6};

// Lower Cholesky factor of K, adding diagonal jitter from the ladder when plain factorization fails.
Eigen::MatrixXd cholesky(Eigen::MatrixXd K, double& jitter) {
    jitter = 0.0;
    for (std::size_t attempt = 0; attempt <= kJitterLadder.size(); ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(K);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd L = llt.matrixL();
            if (L.diagonal().minCoeff() > 0.0 && L.allFinite()) return L;
        }
        if (attempt == kJitterLadder.size()) break;
        const double add = kJitterLadder[attempt] - jitter;
        K.diagonal().array() += add;
        jitter = kJitterLadder[attempt];
    }
    throw NumericalError("GP covariance is not positive definite after jitter 1e-6");
}

double log_det(const Eigen::MatrixXd& L) { return 2.0 * L.diagonal().array().log().sum(); }

void check_hyper(const GpHyper& h, Eigen::Index dims) {
    if (!(h.signal_variance > 0.0) || !(h.noise_variance >= 0.0))
        throw DomainError("GP variances must be positive");
    if (h.length_scales.size() != 1 && static_cast<Eigen::Index>(h.length_scales.size()) != dims)
        throw DomainError("GP needs one shared length scale or one per input");
    for (double l : h.length_scales)
        if (!(l > 0.0) || !std::isfinite(l)) throw DomainError("GP length scales must be positive");
}

struct GridResult {
    double lml = -std::numeric_limits<double>::infinity();
    GpHyper hyper;
};

GridResult grid_search(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, const GpSearch& s) {
    const double n = static_cast<double>(z.size());
    GridResult best;
    for (double ell : s.length_grid) {
        const Eigen::MatrixXd C = rbf_correlation(X, X, {ell});
        for (double g : s.noise_ratio_grid) {
            Eigen::MatrixXd K = C;
            K.diagonal().array() += g;
            double jitter = 0.0;
            Eigen::MatrixXd L;
            try {
                L = cholesky(K, jitter);
            } catch (const NumericalError&) {
                continue;
            }
            const Eigen::VectorXd alpha = L.transpose().triangularView<Eigen::Upper>().solve(
                L.triangularView<Eigen::Lower>().solve(z));
            const double sf2 = std::max(z.dot(alpha) / n, 1e-300);
            const double lml = -0.5 * n * std::log(sf2) - 0.5 * log_det(L) -
                               0.5 * n * (1.0 + std::log(2.0 * std::numbers::pi));
            if (lml > best.lml) best = {lml, GpHyper{sf2, {ell}, g * sf2}};
        }
    }
    if (!std::isfinite(best.lml)) throw NumericalError("no GP grid point could be factorized");
    return best;
}

// Exact LML and its gradient in theta = (log sf2, log l_1..l_d, log sn2).
double lml_and_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, const Eigen::VectorXd& theta,
                        Eigen::VectorXd& grad) {
    const Eigen::Index d = X.cols();
    const double sf2 = std::exp(theta(0));
    const double sn2 = std::exp(theta(d + 1));
    std::vector<double> ls(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) ls[static_cast<std::size_t>(k)] = std::exp(theta(k + 1));
    const Eigen::MatrixXd C = rbf_correlation(X, X, ls);
    Eigen::MatrixXd K = sf2 * C;
    K.diagonal().array() += sn2;
    double jitter = 0.0;
    const Eigen::MatrixXd L = cholesky(K, jitter);
    const Eigen::Index n = z.size();
    const auto Lt = L.triangularView<Eigen::Lower>();
    const Eigen::VectorXd alpha = L.transpose().triangularView<Eigen::Upper>().solve(Lt.solve(z));
    Eigen::MatrixXd Kinv = Lt.solve(Eigen::MatrixXd::Identity(n, n));
    Kinv = Kinv.transpose() * Kinv;
    const Eigen::MatrixXd W = alpha * alpha.transpose() - Kinv;
    const Eigen::MatrixXd WC = W.cwiseProduct(C) * sf2;
    grad.resize(d + 2);
    grad(0) = 0.5 * WC.sum();
    for (Eigen::Index k = 0; k < d; ++k) {
        const double lk = ls[static_cast<std::size_t>(k)];
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                const double diff = (X(i, k) - X(j, k)) / lk;
                acc += WC(i, j) * diff * diff;
            }
        grad(k + 1) = 0.5 * acc;
    }
    grad(d + 1) = 0.5 * sn2 * W.trace();
    return -0.5 * z.dot(alpha) - 0.5 * log_det(L) - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

GpHyper refine_ard(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, const GpHyper& start, const GpSearch& s) {
    const Eigen::Index d = X.cols();
    Eigen::VectorXd theta(d + 2);
    theta(0) = std::log(start.signal_variance);
    for (Eigen::Index k = 0; k < d; ++k) theta(k + 1) = std::log(start.length_scales.front());
    theta(d + 1) = std::log(std::max(start.noise_variance, 1e-10));
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d + 2), v = Eigen::VectorXd::Zero(d + 2), grad;
    Eigen::VectorXd best_theta = theta;
    double best = -std::numeric_limits<double>::infinity();
    constexpr double b1 = 0.9, b2 = 0.999;
    for (int it = 1; it <= s.ard_iterations; ++it) {
        double lml = 0.0;
        try {
            lml = lml_and_gradient(X, z, theta, grad);
        } catch (const NumericalError&) {
            break;
        }
        if (lml > best) {
            best = lml;
            best_theta = theta;
        }
        m = b1 * m + (1 - b1) * grad;
        v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
        const Eigen::VectorXd mh = m / (1 - std::pow(b1, it));
        const Eigen::VectorXd vh = v / (1 - std::pow(b2, it));
        theta += s.ard_step * mh.cwiseQuotient((vh.array().sqrt() + 1e-8).matrix());
        theta(d + 1) = std::max(theta(d + 1), std::log(1e-10));
    }
    GpHyper h;
    h.signal_variance = std::exp(best_theta(0));
    h.length_scales.resize(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k) h.length_scales[static_cast<std::size_t>(k)] = std::exp(best_theta(k + 1));
    h.noise_variance = std::exp(best_theta(d + 1));
    return h;
}

}  // namespace

Eigen::MatrixXd rbf_correlation(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const std::vector<double>& ls) {
    Eigen::MatrixXd As = A, Bs = B;
    if (ls.size() == 1) {
        As /= ls.front();
        Bs /= ls.front();
    } else {
        for (Eigen::Index k = 0; k < A.cols(); ++k) {
            As.col(k) /= ls[static_cast<std::size_t>(k)];
            Bs.col(k) /= ls[static_cast<std::size_t>(k)];
        }
    }
    const Eigen::VectorXd an = As.rowwise().squaredNorm();
    const Eigen::VectorXd bn = Bs.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * As * Bs.transpose();
    d2.colwise() += an;
    d2.rowwise() += bn.transpose();
    return (-0.5 * d2.array().max(0.0)).exp().matrix();
}

GPModel GPModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpSearch& search) {
    if (X.rows() != y.size() || X.rows() < 1) throw DomainError("GP needs matching non-empty inputs and targets");
    if (!X.allFinite() || !y.allFinite()) throw DomainError("GP training data must be finite");
    GPModel m;
    m.X_ = X;
    const double n = static_cast<double>(y.size());
    m.y_mean_ = y.mean();
    const double sd = y.size() > 1 ? std::sqrt((y.array() - m.y_mean_).square().sum() / n) : 0.0;
    m.y_scale_ = sd > 0.0 ? sd : 1.0;
    m.y_ = y;
    m.z_ = (y.array() - m.y_mean_) / m.y_scale_;
    if (search.fixed) {
        check_hyper(*search.fixed, X.cols());
        m.hyper_ = *search.fixed;
    } else {
        if (X.rows() < 2) throw DomainError("GP hyperparameter search needs at least two rows");
        m.hyper_ = grid_search(X, m.z_, search).hyper;
        if (search.ard && search.ard_iterations > 0) m.hyper_ = refine_ard(X, m.z_, m.hyper_, search);
    }
    m.factorize();
    return m;
}

GPModel GPModel::from_parts(Eigen::MatrixXd X, Eigen::VectorXd y, GpHyper hyper, double y_mean, double y_scale) {
    if (X.rows() != y.size() || X.rows() < 1) throw DomainError("GP needs matching non-empty inputs and targets");
    if (!(y_scale > 0.0)) throw DomainError("GP target scale must be positive");
    check_hyper(hyper, X.cols());
    GPModel m;
    m.X_ = std::move(X);
    m.y_mean_ = y_mean;
    m.y_scale_ = y_scale;
    m.z_ = (y.array() - y_mean) / y_scale;
    m.y_ = std::move(y);
    m.hyper_ = std::move(hyper);
    m.factorize();
    return m;
}

void GPModel::factorize() {
    Eigen::MatrixXd K = hyper_.signal_variance * rbf_correlation(X_, X_, hyper_.length_scales);
    K.diagonal().array() += hyper_.noise_variance;
    chol_ = cholesky(std::move(K), jitter_);
    const auto L = chol_.triangularView<Eigen::Lower>();
    alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(L.solve(z_));
    const double n = static_cast<double>(z_.size());
    lml_ = -0.5 * z_.dot(alpha_) - 0.5 * log_det(chol_) - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

GPModel::Prediction GPModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != X_.cols()) throw DomainError("GP input has the wrong dimension");
    const Eigen::VectorXd k =
        hyper_.signal_variance * rbf_correlation(x.transpose(), X_, hyper_.length_scales).transpose();
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    const double var = std::max(hyper_.signal_variance - v.squaredNorm(), 0.0);
    return {y_mean_ + y_scale_ * k.dot(alpha_), var * y_scale_ * y_scale_};
}

Eigen::VectorXd GPModel::predict_mean(const Eigen::MatrixXd& X) const {
    if (X.cols() != X_.cols()) throw DomainError("GP input has the wrong dimension");
    const Eigen::MatrixXd K = hyper_.signal_variance * rbf_correlation(X, X_, hyper_.length_scales);
    return ((K * alpha_).array() * y_scale_ + y_mean_).matrix();
}

Eigen::VectorXd GPModel::targets() const { return y_; }

}  // namespace hpmr::surrogate
