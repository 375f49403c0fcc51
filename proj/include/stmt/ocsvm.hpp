#ifndef STMT_OCSVM_HPP
#define STMT_OCSVM_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stmt {

/// One-class SVM with an RBF kernel, in the normalized dual (sum alpha = 1):
///   decision(x) = sum_i alphas[i] * exp(-gamma * |z(x) - sv_i|^2) - rho
/// where z() standardizes with the stored training statistics (identity
/// when `center` is empty).
struct OcsvmModel {
  Eigen::MatrixXd support_vectors;  // s x p, in standardized space
  Eigen::VectorXd alphas;
  double rho = 0.0;
  double gamma = 1.0;
  double nu = 0.05;
  std::size_t n_train = 0;
  Eigen::RowVectorXd center;
  Eigen::RowVectorXd scale;

  /// KKT violation of the returned dual solution: the gap
  /// max_{alpha<C}(-g) - min_{alpha>0}(-g) with g = K alpha.
  double kkt_residual = 0.0;
  std::size_t iterations = 0;

  std::size_t n_features() const { return static_cast<std::size_t>(support_vectors.cols()); }

  /// Throws std::invalid_argument on dimension mismatch.
  double decision_function(std::span<const double> x) const;

  /// Decision value on the scale of the unnormalized dual
  /// (0 <= alpha <= 1, sum alpha = nu * n), i.e. decision_function * nu * n.
  /// This is the scale of LIBSVM / scikit-learn decision values.
  double decision_function_libsvm(std::span<const double> x) const;

  Eigen::VectorXd decision_function(const Eigen::MatrixXd& x) const;
};

struct OcsvmOptions {
  double nu = 0.05;
  /// Kernel width; nullopt selects "scale": 1 / (p * mean feature variance)
  /// of the (standardized) training data.
  std::optional<double> gamma;
  bool standardize = true;
  /// KKT gap at which SMO stops. Tighter than the 1e-4 acceptance level so
  /// that points near the margin do not flip sign.
  double tolerance = 1e-8;
  std::size_t max_iterations = 1'000'000;
};

class OcsvmConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solves min 1/2 a'Ka s.t. sum a = 1, 0 <= a <= 1/(nu n) with SMO and
/// second-order working-set selection, until the KKT gap is <= tolerance.
/// rho averages the gradient over free support vectors.
/// Throws std::invalid_argument for bad parameters or identical rows and
/// OcsvmConvergenceError when the iteration cap is hit.
OcsvmModel fit_ocsvm(const Eigen::MatrixXd& x, const OcsvmOptions& options = {});

/// Half-open interval [lo, hi).
struct Interval {
  double lo;
  double hi;
  bool contains(double v) const { return v >= lo && v < hi; }
};

/// Decision-value regions. Construction rejects empty or overlapping
/// intervals.
class RegionBounds {
 public:
  RegionBounds() : RegionBounds({0.0, 10.0}, {-8.0, 0.0}, {-10.0, -8.0}) {}
  RegionBounds(Interval interpolation, Interval extrapolation, Interval outlier);

  const Interval& interpolation() const { return interp_; }
  const Interval& extrapolation() const { return extrap_; }
  const Interval& outlier() const { return outlier_; }

 private:
  Interval interp_;
  Interval extrap_;
  Interval outlier_;
};

struct RegionPartition {
  std::vector<std::size_t> interpolation;
  std::vector<std::size_t> extrapolation;
  std::vector<std::size_t> outlier;
  std::vector<std::size_t> out_of_range;
};

/// Assigns each index of `values` to the region containing it; values in no
/// region go to out_of_range.
RegionPartition partition_by_decision(std::span<const double> values, const RegionBounds& bounds);

}  // namespace stmt

#endif  // STMT_OCSVM_HPP
