#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "stmt/experiments.hpp"

namespace stmt {

std::string to_string(Method method) {
  switch (method) {
    case Method::MLR:
      return "MLR";
    case Method::RF:
      return "RF";
    case Method::ET:
      return "ET";
    case Method::MT:
      return "MT";
    case Method::STMT:
      return "STMT";
  }
  throw std::logic_error("unknown Method");
}

Method method_from_string(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : all_methods()) {
    if (to_string(m) == upper) return m;
  }
  throw std::invalid_argument("unknown method '" + name + "' (expected MLR, RF, ET, MT or STMT)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::MLR, Method::RF, Method::ET, Method::MT,
                                           Method::STMT};
  return methods;
}

EnsembleConfig method_config(Method method, const MethodSettings& settings) {
  EnsembleConfig cfg;
  switch (method) {
    case Method::RF:
      cfg = EnsembleConfig::random_forest();
      break;
    case Method::ET:
      cfg = EnsembleConfig::extra_trees();
      break;
    case Method::MT:
      cfg = EnsembleConfig::model_tree();
      break;
    case Method::STMT:
      cfg = EnsembleConfig::stmt(settings.k);
      break;
    case Method::MLR:
      throw std::invalid_argument("MLR is not a tree method");
  }
  if (method != Method::MT) cfg.n_estimators = settings.n_estimators;
  if (settings.min_leaf) cfg.min_leaf = *settings.min_leaf;
  cfg.master_seed = settings.seed;
  return cfg;
}

Eigen::VectorXd Regressor::predict(const Eigen::MatrixXd& x, unsigned n_threads) const {
  if (const auto* lm = std::get_if<LinearModel>(&model_)) {
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Eigen::RowVectorXd row = x.row(r);
      out(r) = lm->predict(std::span<const double>(row.data(), row.size()));
    }
    return out;
  }
  return std::get<Ensemble>(model_).predict(x, n_threads);
}

Regressor fit_method(Method method, const Dataset& train, const MethodSettings& settings) {
  if (method == Method::MLR) return Regressor(fit_ols(train.x(), train.y()));
  return Regressor(fit_ensemble(train, method_config(method, settings), settings.n_threads));
}

}  // namespace stmt
