#ifndef STMT_TREE_HPP
#define STMT_TREE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "stmt/linear_model.hpp"
#include "stmt/random.hpp"

namespace stmt {

class Dataset;

/// Threshold at the midpoint of two adjacent sample values (RF / CART).
struct Midpoint {
  friend bool operator==(const Midpoint&, const Midpoint&) = default;
};

/// Threshold drawn from N((lo + hi) / 2, ((hi - lo) / (2k))^2), so that
/// k standard deviations span the half-gap. Draws are not clamped.
struct StochasticNormal {
  double k = 5.0;
  friend bool operator==(const StochasticNormal&, const StochasticNormal&) = default;
};

/// One threshold per feature, uniform over the node-local [min, max]
/// (Extra-Trees style).
struct UniformRandom {
  friend bool operator==(const UniformRandom&, const UniformRandom&) = default;
};

using Splitter = std::variant<Midpoint, StochasticNormal, UniformRandom>;

/// Throws std::invalid_argument for StochasticNormal with k <= 0.
void validate(const Splitter& splitter);

enum class LeafModelKind {
  Mean,
  /// OLS over the distinct features split on along the root-to-leaf path.
  LinearSelectedFeatures,
  /// OLS over every feature.
  LinearAllFeatures,
};

/// Number of candidate features drawn per node.
class MaxFeatures {
 public:
  static MaxFeatures all() { return MaxFeatures(Kind::All, 0, 1.0); }
  static MaxFeatures count(std::size_t n);
  static MaxFeatures fraction(double f);

  /// Resolved count for p features, clamped to [1, p].
  std::size_t resolve(std::size_t p) const;

  bool is_all() const { return kind_ == Kind::All; }
  bool is_count() const { return kind_ == Kind::Count; }
  std::size_t count_value() const { return count_; }
  double fraction_value() const { return fraction_; }

  friend bool operator==(const MaxFeatures&, const MaxFeatures&) = default;

 private:
  enum class Kind { All, Count, Fraction };
  MaxFeatures(Kind kind, std::size_t count, double fraction)
      : kind_(kind), count_(count), fraction_(fraction) {}
  Kind kind_;
  std::size_t count_;
  double fraction_;
};

struct TreeConfig {
  Splitter splitter = Midpoint{};
  LeafModelKind leaf_model = LeafModelKind::Mean;
  /// Resolved minimum number of rows per child (duplicates count).
  std::size_t min_leaf = 1;
  MaxFeatures max_features = MaxFeatures::all();
  std::uint64_t rng_seed = 0;
};

/// Leaf payload: a constant or a linear model over full feature vectors.
using LeafModel = std::variant<double, LinearModel>;

struct SplitNode {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::size_t left = 0;
  std::size_t right = 0;
};

struct LeafNode {
  LeafModel model;
  std::size_t n_samples = 0;
};

using TreeNode = std::variant<SplitNode, LeafNode>;

/// Binary regression tree stored as a node arena; node 0 is the root.
/// Rows with x[feature] <= threshold go left.
class Tree {
 public:
  Tree() = default;
  Tree(std::vector<TreeNode> nodes, std::size_t n_features);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_leaves() const;
  std::size_t depth() const;

  /// Index of the leaf reached by x.
  std::size_t leaf_index(std::span<const double> x) const;

  /// Throws std::invalid_argument on dimension mismatch.
  double predict(std::span<const double> x) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

/// Threshold for the adjacent pair (x_lo, x_hi). For UniformRandom the pair
/// is the node-local range of the feature. Degenerate x_lo == x_hi returns
/// x_lo without consuming randomness.
double sample_threshold(double x_lo, double x_hi, const Splitter& splitter, Rng& rng);

/// Split SSEs within this fraction of the node's total sum of squares are
/// treated as ties.
inline constexpr double kSplitTieTolerance = 1e-12;

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  /// Summed within-child squared error about the child means.
  double sse = 0.0;
};

/// Best method-1 split of `rows` over `candidate_features`, or nullopt when
/// no candidate leaves both children with at least min_child rows. Ties on
/// SSE (see kSplitTieTolerance) go to the lower feature index, then the
/// lower threshold.
std::optional<SplitCandidate> best_split(std::span<const std::size_t> rows, const Dataset& d,
                                         std::span<const std::size_t> candidate_features,
                                         const Splitter& splitter, std::size_t min_child,
                                         Rng& rng);

/// Grows a tree on `rows` (a multiset; bootstrap duplicates allowed).
/// Growth stops at nodes that are too small to split, have a constant
/// target, or have no valid split.
Tree grow_tree(std::span<const std::size_t> rows, const Dataset& d, const TreeConfig& cfg,
               Rng& rng);

/// Convenience overload: all rows, stream seeded from cfg.rng_seed.
Tree grow_tree(const Dataset& d, const TreeConfig& cfg);

}  // namespace stmt

#endif  // STMT_TREE_HPP
