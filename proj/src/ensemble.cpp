#include "stmt/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

#include "stmt/dataset.hpp"

namespace stmt {

std::size_t resolve_min_leaf(const MinLeafPolicy& policy, std::size_t n_samples,
                             std::size_t n_features) {
  const std::size_t resolved = std::visit(
      [&](const auto& p) -> std::size_t {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, min_leaf::Absolute>) {
          if (p.count == 0) throw std::invalid_argument("min_leaf: Absolute count must be >= 1");
          return p.count;
        } else if constexpr (std::is_same_v<P, min_leaf::FractionOfSamples>) {
          if (!(p.fraction > 0.0 && p.fraction <= 1.0)) {
            throw std::invalid_argument("min_leaf: fraction must lie in (0, 1]");
          }
          return std::max<std::size_t>(
              1, static_cast<std::size_t>(std::floor(p.fraction * static_cast<double>(n_samples))));
        } else {
          if (!(p.multiplier >= 1.0) || !std::isfinite(p.multiplier)) {
            throw std::invalid_argument("min_leaf: FeatureRelative multiplier must be >= 1");
          }
          return std::max<std::size_t>(
              1, static_cast<std::size_t>(std::ceil(p.multiplier * static_cast<double>(n_features))));
        }
      },
      policy);
  if (resolved > n_samples) {
    throw std::invalid_argument("min_leaf resolves to " + std::to_string(resolved) +
                                " but only " + std::to_string(n_samples) +
                                " training rows are available");
  }
  return resolved;
}

EnsembleConfig EnsembleConfig::random_forest() {
  EnsembleConfig cfg;
  cfg.splitter = Midpoint{};
  cfg.leaf_model = LeafModelKind::Mean;
  cfg.bootstrap = true;
  cfg.aggregation = Aggregation::Mean;
  return cfg;
}

EnsembleConfig EnsembleConfig::extra_trees() {
  EnsembleConfig cfg;
  cfg.splitter = UniformRandom{};
  cfg.leaf_model = LeafModelKind::Mean;
  cfg.bootstrap = false;
  cfg.aggregation = Aggregation::Mean;
  return cfg;
}

EnsembleConfig EnsembleConfig::model_tree() {
  EnsembleConfig cfg;
  cfg.n_estimators = 1;
  cfg.splitter = Midpoint{};
  cfg.leaf_model = LeafModelKind::LinearSelectedFeatures;
  cfg.min_leaf = min_leaf::FeatureRelative{1.0};
  cfg.bootstrap = false;
  cfg.aggregation = Aggregation::Mean;
  return cfg;
}

EnsembleConfig EnsembleConfig::stmt(double k) {
  EnsembleConfig cfg;
  cfg.splitter = StochasticNormal{k};
  stmt::validate(cfg.splitter);
  cfg.leaf_model = LeafModelKind::LinearSelectedFeatures;
  cfg.min_leaf = min_leaf::FeatureRelative{1.0};
  cfg.bootstrap = true;
  cfg.aggregation = Aggregation::Median;
  return cfg;
}

void validate(const EnsembleConfig& cfg) {
  if (cfg.n_estimators == 0) throw std::invalid_argument("n_estimators must be >= 1");
  validate(cfg.splitter);
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("bootstrap_sample: n must be >= 1");
  std::vector<std::size_t> sample(n);
  for (auto& s : sample) s = rng.index(n);
  return sample;
}

double aggregate(std::span<double> values, Aggregation aggregation) {
  if (values.empty()) throw std::invalid_argument("aggregate: no values");
  if (aggregation == Aggregation::Mean) {
    return std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  }
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return std::midpoint(lower, upper);
}

Ensemble::Ensemble(std::vector<Tree> trees, EnsembleConfig config,
                   std::vector<std::string> feature_names)
    : trees_(std::move(trees)), config_(std::move(config)), feature_names_(std::move(feature_names)) {
  if (trees_.size() != config_.n_estimators) {
    throw std::invalid_argument("Ensemble: tree count does not match n_estimators");
  }
  for (const auto& t : trees_) {
    if (t.n_features() != feature_names_.size()) {
      throw std::invalid_argument("Ensemble: tree feature count does not match feature names");
    }
  }
}

std::vector<double> Ensemble::tree_predictions(std::span<const double> x) const {
  if (x.size() != n_features()) {
    throw std::invalid_argument("Ensemble: expected " + std::to_string(n_features()) +
                                " features, got " + std::to_string(x.size()));
  }
  std::vector<double> out;
  out.reserve(trees_.size());
  for (const auto& t : trees_) out.push_back(t.predict(x));
  return out;
}

double Ensemble::predict(std::span<const double> x) const {
  auto values = tree_predictions(x);
  return aggregate(values, config_.aggregation);
}

namespace {

// Runs body(i) for i in [0, n) on up to n_threads workers. The first
// exception thrown by any worker is rethrown on the caller.
template <class Body>
void parallel_for(std::size_t n, unsigned n_threads, Body&& body) {
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

Eigen::VectorXd Ensemble::predict(const Eigen::MatrixXd& x, unsigned n_threads) const {
  if (static_cast<std::size_t>(x.cols()) != n_features()) {
    throw std::invalid_argument("Ensemble: expected " + std::to_string(n_features()) +
                                " features, got " + std::to_string(x.cols()));
  }
  Eigen::VectorXd out(x.rows());
  parallel_for(static_cast<std::size_t>(x.rows()), n_threads, [&](std::size_t i) {
    const Eigen::RowVectorXd row = x.row(static_cast<Eigen::Index>(i));
    out(static_cast<Eigen::Index>(i)) = predict(std::span<const double>(row.data(), row.size()));
  });
  return out;
}

Ensemble fit_ensemble(const Dataset& train, const EnsembleConfig& cfg, unsigned n_threads) {
  validate(cfg);
  if (train.empty()) throw std::invalid_argument("fit_ensemble: empty training set");
  const std::size_t n = train.n_rows();
  const std::size_t min_leaf = resolve_min_leaf(cfg.min_leaf, n, train.n_features());

  std::vector<Tree> trees(cfg.n_estimators);
  parallel_for(cfg.n_estimators, n_threads, [&](std::size_t i) {
    TreeConfig tree_cfg{cfg.splitter, cfg.leaf_model, min_leaf, cfg.max_features,
                        derive_seed(cfg.master_seed, i)};
    Rng rng(tree_cfg.rng_seed);
    std::vector<std::size_t> rows;
    if (cfg.bootstrap) {
      rows = bootstrap_sample(n, rng);
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    trees[i] = grow_tree(rows, train, tree_cfg, rng);
  });
  return Ensemble(std::move(trees), cfg, train.feature_names());
}

}  // namespace stmt
