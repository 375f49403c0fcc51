#include "stmt/linear_model.hpp"

#include <stdexcept>
#include <string>

#include "stmt/dataset.hpp"

namespace stmt {

double LinearModel::predict(std::span<const double> x) const {
  double value = intercept;
  for (std::size_t j = 0; j < feature_indices.size(); ++j) {
    const std::size_t f = feature_indices[j];
    if (f >= x.size()) {
      throw std::out_of_range("LinearModel::predict: feature index " + std::to_string(f) +
                              " outside input of dimension " + std::to_string(x.size()));
    }
    value += coefficients(static_cast<Eigen::Index>(j)) * x[f];
  }
  return value;
}

LinearModel fit_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < 1 || x.cols() < 1) throw std::invalid_argument("fit_ols: empty design");
  if (x.rows() != y.size()) throw std::invalid_argument("fit_ols: row count mismatch");

  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  LinearModel model;
  model.feature_indices.resize(static_cast<std::size_t>(x.cols()));
  for (std::size_t j = 0; j < model.feature_indices.size(); ++j) model.feature_indices[j] = j;

  // Column-pivoted complete orthogonal decomposition yields the
  // minimum-norm solution; an all-zero centered design has rank 0 and
  // gets a zero slope.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kOlsRankTolerance);
  cod.compute(xc);
  if (cod.rank() == 0) {
    model.coefficients = Eigen::VectorXd::Zero(x.cols());
  } else {
    model.coefficients = cod.solve(yc);
  }
  model.intercept = y_mean - x_mean.dot(model.coefficients);
  return model;
}

LinearModel fit_ols(const Dataset& d, std::span<const std::size_t> rows,
                    std::span<const std::size_t> features) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(features.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < features.size(); ++j) {
      x(r, static_cast<Eigen::Index>(j)) = d.x(rows[i], features[j]);
    }
    y(r) = d.y(rows[i]);
  }
  LinearModel model = fit_ols(x, y);
  model.feature_indices.assign(features.begin(), features.end());
  return model;
}

}  // namespace stmt
