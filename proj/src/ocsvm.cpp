#include "stmt/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace stmt {

namespace {

Eigen::RowVectorXd standardized(const OcsvmModel& m, std::span<const double> x) {
  if (x.size() != m.n_features()) {
    throw std::invalid_argument("OcsvmModel: expected " + std::to_string(m.n_features()) +
                                " features, got " + std::to_string(x.size()));
  }
  Eigen::RowVectorXd z =
      Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (m.center.size() > 0) z = (z - m.center).cwiseQuotient(m.scale);
  return z;
}

}  // namespace

double OcsvmModel::decision_function(std::span<const double> x) const {
  const Eigen::RowVectorXd z = standardized(*this, x);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
    sum += alphas(i) * std::exp(-gamma * (support_vectors.row(i) - z).squaredNorm());
  }
  return sum - rho;
}

double OcsvmModel::decision_function_libsvm(std::span<const double> x) const {
  return decision_function(x) * nu * static_cast<double>(n_train);
}

Eigen::VectorXd OcsvmModel::decision_function(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::RowVectorXd row = x.row(r);
    out(r) = decision_function(std::span<const double>(row.data(), row.size()));
  }
  return out;
}

OcsvmModel fit_ocsvm(const Eigen::MatrixXd& x, const OcsvmOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 2 || p < 1) throw std::invalid_argument("fit_ocsvm: need at least 2 rows and 1 column");
  if (!(options.nu > 0.0 && options.nu <= 1.0)) {
    throw std::invalid_argument("fit_ocsvm: nu must lie in (0, 1]");
  }
  if (options.gamma && !(*options.gamma > 0.0)) {
    throw std::invalid_argument("fit_ocsvm: gamma must be > 0");
  }
  if (!x.allFinite()) throw std::invalid_argument("fit_ocsvm: non-finite input");
  if (((x.rowwise() - x.row(0)).array() == 0.0).all()) {
    throw std::invalid_argument("fit_ocsvm: all training rows are identical");
  }

  OcsvmModel model;
  model.nu = options.nu;
  model.n_train = static_cast<std::size_t>(n);

  Eigen::MatrixXd z = x;
  if (options.standardize) {
    model.center = x.colwise().mean();
    model.scale = ((x.rowwise() - model.center).array().square().colwise().sum() /
                   static_cast<double>(n))
                      .sqrt()
                      .matrix();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (model.scale(j) == 0.0) model.scale(j) = 1.0;
    }
    z = (x.rowwise() - model.center).array().rowwise() / model.scale.array();
  }

  if (options.gamma) {
    model.gamma = *options.gamma;
  } else {
    const Eigen::RowVectorXd mean = z.colwise().mean();
    const double mean_var = (z.rowwise() - mean).array().square().sum() /
                            static_cast<double>(n) / static_cast<double>(p);
    model.gamma = 1.0 / (static_cast<double>(p) * mean_var);
  }

  // Full kernel matrix; intended for n up to a few thousand rows.
  const Eigen::VectorXd sq = z.rowwise().squaredNorm();
  Eigen::MatrixXd k = (z * z.transpose() * 2.0).colwise() - sq;
  k.rowwise() -= sq.transpose();
  k = (k.array() * model.gamma).exp().matrix();
  k.diagonal().setOnes();

  const double c = 1.0 / (options.nu * static_cast<double>(n));
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  {
    const auto n_full = std::min<Eigen::Index>(
        n, static_cast<Eigen::Index>(std::floor(options.nu * static_cast<double>(n))));
    for (Eigen::Index i = 0; i < n_full; ++i) alpha(i) = c;
    if (n_full < n) alpha(n_full) = std::max(0.0, 1.0 - static_cast<double>(n_full) * c);
  }
  Eigen::VectorXd grad = k * alpha;

  constexpr double kTau = 1e-12;
  auto below_upper = [&](Eigen::Index t) { return alpha(t) < c; };
  auto above_lower = [&](Eigen::Index t) { return alpha(t) > 0.0; };

  std::size_t iter = 0;
  double gap = 0.0;
  for (;; ++iter) {
    Eigen::Index i = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (below_upper(t) && -grad(t) > g_max) {
        g_max = -grad(t);
        i = t;
      }
      if (above_lower(t)) g_min = std::min(g_min, -grad(t));
    }
    gap = std::max(0.0, g_max - g_min);
    if (i < 0 || gap <= options.tolerance) break;
    if (iter >= options.max_iterations) {
      throw OcsvmConvergenceError("fit_ocsvm: no convergence after " + std::to_string(iter) +
                                  " iterations (KKT gap " + std::to_string(gap) +
                                  ", tolerance " + std::to_string(options.tolerance) + ")");
    }

    Eigen::Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!above_lower(t)) continue;
      const double b = g_max + grad(t);
      if (b <= 0.0) continue;
      double a = k(i, i) + k(t, t) - 2.0 * k(i, t);
      if (a <= 0.0) a = kTau;
      const double score = -(b * b) / a;
      if (score < best) {
        best = score;
        j = t;
      }
    }
    if (j < 0) break;

    double a = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (a <= 0.0) a = kTau;
    const double room_i = c - alpha(i);
    const double room_j = alpha(j);
    double delta = (grad(j) - grad(i)) / a;
    if (delta >= room_i || delta >= room_j) {
      if (room_i <= room_j) {
        delta = room_i;
        alpha(i) = c;
        alpha(j) = room_j == room_i ? 0.0 : alpha(j) - delta;
      } else {
        delta = room_j;
        alpha(j) = 0.0;
        alpha(i) += delta;
      }
    } else {
      alpha(i) += delta;
      alpha(j) -= delta;
    }
    grad += delta * (k.col(i) - k.col(j));
  }

  double free_sum = 0.0;
  std::size_t n_free = 0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) >= c) {
      lower = std::max(lower, grad(t));
    } else if (alpha(t) <= 0.0) {
      upper = std::min(upper, grad(t));
    } else {
      free_sum += grad(t);
      ++n_free;
    }
  }
  model.rho = n_free > 0 ? free_sum / static_cast<double>(n_free) : (lower + upper) / 2.0;
  model.kkt_residual = gap;
  model.iterations = iter;

  std::vector<Eigen::Index> support;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha(t) > 0.0) support.push_back(t);
  }
  model.support_vectors.resize(static_cast<Eigen::Index>(support.size()), p);
  model.alphas.resize(static_cast<Eigen::Index>(support.size()));
  for (std::size_t s = 0; s < support.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = z.row(support[s]);
    model.alphas(static_cast<Eigen::Index>(s)) = alpha(support[s]);
  }
  return model;
}

RegionBounds::RegionBounds(Interval interpolation, Interval extrapolation, Interval outlier)
    : interp_(interpolation), extrap_(extrapolation), outlier_(outlier) {
  const Interval all[] = {interp_, extrap_, outlier_};
  for (std::size_t a = 0; a < 3; ++a) {
    if (!(all[a].lo < all[a].hi)) throw std::invalid_argument("RegionBounds: empty interval");
    for (std::size_t b = a + 1; b < 3; ++b) {
      if (all[a].lo < all[b].hi && all[b].lo < all[a].hi) {
        throw std::invalid_argument("RegionBounds: overlapping intervals");
      }
    }
  }
}

RegionPartition partition_by_decision(std::span<const double> values, const RegionBounds& bounds) {
  RegionPartition out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (bounds.interpolation().contains(v)) {
      out.interpolation.push_back(i);
    } else if (bounds.extrapolation().contains(v)) {
      out.extrapolation.push_back(i);
    } else if (bounds.outlier().contains(v)) {
      out.outlier.push_back(i);
    } else {
      out.out_of_range.push_back(i);
    }
  }
  return out;
}

}  // namespace stmt
