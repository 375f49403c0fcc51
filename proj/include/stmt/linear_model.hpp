#ifndef STMT_LINEAR_MODEL_HPP
#define STMT_LINEAR_MODEL_HPP

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace stmt {

class Dataset;

/// Affine model over a subset of the feature space:
///   f(x) = intercept + sum_j coefficients[j] * x[feature_indices[j]]
struct LinearModel {
  Eigen::VectorXd coefficients;
  double intercept = 0.0;
  std::vector<std::size_t> feature_indices;

  /// Throws std::out_of_range when x is too short for feature_indices.
  double predict(std::span<const double> x) const;
};

/// Relative singular-value cutoff used to decide numerical rank.
inline constexpr double kOlsRankTolerance = 1e-10;

/// Minimum-norm least squares with an unpenalized intercept.
///
/// The intercept is handled by centering: the slope vector is the
/// minimum-norm solution for the centered design, and the intercept is
/// mean(y) - mean(X) * slope. Rank-deficient designs (including n < q) are
/// solved, not rejected. feature_indices of the result are 0..q-1.
LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// fit_ols on the given rows and feature columns of `d`; the result's
/// feature_indices refer to columns of `d`.
LinearModel fit_ols(const Dataset& d, std::span<const std::size_t> rows,
                    std::span<const std::size_t> features);

}  // namespace stmt

#endif  // STMT_LINEAR_MODEL_HPP
