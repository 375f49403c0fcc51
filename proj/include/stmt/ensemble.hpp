#ifndef STMT_ENSEMBLE_HPP
#define STMT_ENSEMBLE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stmt/random.hpp"
#include "stmt/tree.hpp"

namespace stmt {

class Dataset;

namespace min_leaf {
struct Absolute {
  std::size_t count = 1;
  friend bool operator==(const Absolute&, const Absolute&) = default;
};
struct FractionOfSamples {
  double fraction = 0.0;
  friend bool operator==(const FractionOfSamples&, const FractionOfSamples&) = default;
};
/// multiplier * (number of features available to the tree).
struct FeatureRelative {
  double multiplier = 1.0;
  friend bool operator==(const FeatureRelative&, const FeatureRelative&) = default;
};
}  // namespace min_leaf

using MinLeafPolicy =
    std::variant<min_leaf::Absolute, min_leaf::FractionOfSamples, min_leaf::FeatureRelative>;

/// Absolute(c) -> c; FractionOfSamples(f) -> max(1, floor(f n));
/// FeatureRelative(m) -> max(1, ceil(m p)). Throws std::invalid_argument when
/// the policy parameters are out of range or the result exceeds n.
std::size_t resolve_min_leaf(const MinLeafPolicy& policy, std::size_t n_samples,
                             std::size_t n_features);

enum class Aggregation { Mean, Median };

struct EnsembleConfig {
  std::size_t n_estimators = 100;
  Splitter splitter = Midpoint{};
  LeafModelKind leaf_model = LeafModelKind::Mean;
  MinLeafPolicy min_leaf = min_leaf::Absolute{1};
  MaxFeatures max_features = MaxFeatures::all();
  bool bootstrap = true;
  Aggregation aggregation = Aggregation::Mean;
  std::uint64_t master_seed = 0;

  /// Random forest: midpoint thresholds, mean leaves, bagging, mean.
  static EnsembleConfig random_forest();
  /// Extra-Trees style: uniform thresholds, mean leaves, no bagging, mean.
  static EnsembleConfig extra_trees();
  /// Single unbagged model tree: midpoint thresholds, linear leaves over
  /// path features.
  static EnsembleConfig model_tree();
  /// Stochastic threshold model trees: normal thresholds, linear leaves over
  /// path features, bagging, median.
  static EnsembleConfig stmt(double k = 5.0);

  friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

/// Throws std::invalid_argument on an invalid configuration.
void validate(const EnsembleConfig& cfg);

/// n uniform draws from [0, n) with replacement.
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

/// Mean, or median with the even-count midpoint convention. `values` is
/// reordered by the median path.
double aggregate(std::span<double> values, Aggregation aggregation);

class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(std::vector<Tree> trees, EnsembleConfig config,
           std::vector<std::string> feature_names);

  const std::vector<Tree>& trees() const { return trees_; }
  const EnsembleConfig& config() const { return config_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  std::size_t n_features() const { return feature_names_.size(); }

  /// One prediction per tree for a single input row.
  std::vector<double> tree_predictions(std::span<const double> x) const;

  double predict(std::span<const double> x) const;

  /// Row-wise predictions for an m x p matrix. Throws std::invalid_argument
  /// when p differs from the training feature count.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x, unsigned n_threads = 0) const;

 private:
  std::vector<Tree> trees_;
  EnsembleConfig config_;
  std::vector<std::string> feature_names_;
};

/// Fits cfg.n_estimators trees. Tree i draws from Rng(derive_seed(master_seed, i)):
/// first the bootstrap sample (when enabled), then the per-node feature and
/// threshold draws. Output is independent of n_threads (0 = hardware).
Ensemble fit_ensemble(const Dataset& train, const EnsembleConfig& cfg, unsigned n_threads = 0);

}  // namespace stmt

#endif  // STMT_ENSEMBLE_HPP
