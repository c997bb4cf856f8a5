#pragma once

#include "hpmr/dataset.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hpmr::surrogate {

/// Per-column (x - mean) / sd.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;

    /// DomainError for a zero-variance column.
    static Standardizer fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
    Eigen::MatrixXd inverse(const Eigen::MatrixXd& Z) const;
    Eigen::VectorXd transform_row(const Eigen::VectorXd& x) const;
};

/// 1 - SS_res / SS_tot. DomainError when the truth has zero variance.
double r_squared(std::span<const double> truth, std::span<const double> pred);
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    Eigen::MatrixXd values;
};

/// Design inputs against QoIs and FOAK LCOE, pairwise over finite entries.
CorrelationMatrix correlation_matrix(const Dataset& d);
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& m);

/// Shuffled fold index per row.
std::vector<int> fold_assignment(std::size_t rows, int k, std::uint64_t seed);

Eigen::MatrixXd design_matrix(const Dataset& d);

}  // namespace hpmr::surrogate
