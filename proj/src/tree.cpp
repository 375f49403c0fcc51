#include "stmt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>

#include "stmt/dataset.hpp"

namespace stmt {

void validate(const Splitter& splitter) {
  if (const auto* s = std::get_if<StochasticNormal>(&splitter)) {
    if (!(s->k > 0.0) || !std::isfinite(s->k)) {
      throw std::invalid_argument("StochasticNormal: k must be a finite value > 0");
    }
  }
}

MaxFeatures MaxFeatures::count(std::size_t n) {
  if (n == 0) throw std::invalid_argument("MaxFeatures: count must be >= 1");
  return MaxFeatures(Kind::Count, n, 0.0);
}

MaxFeatures MaxFeatures::fraction(double f) {
  if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("MaxFeatures: fraction must lie in (0, 1]");
  return MaxFeatures(Kind::Fraction, 0, f);
}

std::size_t MaxFeatures::resolve(std::size_t p) const {
  std::size_t m = p;
  switch (kind_) {
    case Kind::All:
      break;
    case Kind::Count:
      m = count_;
      break;
    case Kind::Fraction:
      m = static_cast<std::size_t>(std::ceil(fraction_ * static_cast<double>(p)));
      break;
  }
  return std::clamp<std::size_t>(m, 1, std::max<std::size_t>(p, 1));
}

Tree::Tree(std::vector<TreeNode> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {
  if (nodes_.empty()) throw std::invalid_argument("Tree: no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (const auto* s = std::get_if<SplitNode>(&nodes_[i])) {
      if (s->left <= i || s->right <= i || s->left >= nodes_.size() ||
          s->right >= nodes_.size() || s->feature >= n_features_) {
        throw std::invalid_argument("Tree: malformed split node " + std::to_string(i));
      }
    }
  }
}

std::size_t Tree::n_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) {
    return std::holds_alternative<LeafNode>(n);
  }));
}

std::size_t Tree::depth() const {
  std::vector<std::size_t> depth(nodes_.size(), 0);
  std::size_t max_depth = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    max_depth = std::max(max_depth, depth[i]);
    if (const auto* s = std::get_if<SplitNode>(&nodes_[i])) {
      depth[s->left] = depth[i] + 1;
      depth[s->right] = depth[i] + 1;
    }
  }
  return max_depth;
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
  if (x.size() != n_features_) {
    throw std::invalid_argument("Tree: expected " + std::to_string(n_features_) +
                                " features, got " + std::to_string(x.size()));
  }
  std::size_t i = 0;
  while (const auto* s = std::get_if<SplitNode>(&nodes_[i])) {
    i = x[s->feature] <= s->threshold ? s->left : s->right;
  }
  return i;
}

double Tree::predict(std::span<const double> x) const {
  const auto& leaf = std::get<LeafNode>(nodes_[leaf_index(x)]);
  if (const auto* value = std::get_if<double>(&leaf.model)) return *value;
  return std::get<LinearModel>(leaf.model).predict(x);
}

double sample_threshold(double x_lo, double x_hi, const Splitter& splitter, Rng& rng) {
  if (x_lo == x_hi) return x_lo;
  return std::visit(
      [&](const auto& s) -> double {
        using S = std::decay_t<decltype(s)>;
        const double mid = x_lo + (x_hi - x_lo) / 2.0;
        if constexpr (std::is_same_v<S, Midpoint>) {
          return (x_lo + x_hi) / 2.0;
        } else if constexpr (std::is_same_v<S, StochasticNormal>) {
          return rng.normal(mid, (x_hi - x_lo) / (2.0 * s.k));
        } else {
          return rng.uniform(x_lo, x_hi);
        }
      },
      splitter);
}

namespace {

// Per-feature view of a node: values sorted ascending with prefix sums of
// the target shifted by a node-wide reference value. The shift keeps a
// constant target at exactly zero SSE.
class SortedFeature {
 public:
  SortedFeature(std::span<const std::size_t> rows, const Dataset& d, std::size_t feature,
                double y_ref) {
    std::vector<std::pair<double, double>> entries;
    entries.reserve(rows.size());
    for (std::size_t r : rows) entries.emplace_back(d.x(r, feature), d.y(r) - y_ref);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    sum_.assign(entries.size() + 1, 0.0);
    sum_sq_.assign(entries.size() + 1, 0.0);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const double v = entries[i].second;
      sum_[i + 1] = sum_[i] + v;
      sum_sq_[i + 1] = sum_sq_[i] + v * v;
      if (i == 0 || entries[i].first != entries[i - 1].first) {
        values_.push_back(entries[i].first);
        ends_.push_back(i + 1);
      } else {
        ends_.back() = i + 1;
      }
    }
  }

  const std::vector<double>& distinct_values() const { return values_; }
  std::size_t size() const { return sum_.size() - 1; }

  /// Number of rows with value <= t.
  std::size_t count_at_most(double t) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), t);
    if (it == values_.begin()) return 0;
    return ends_[static_cast<std::size_t>(it - values_.begin()) - 1];
  }

  /// Count of rows up to and including distinct value i.
  std::size_t end_of(std::size_t i) const { return ends_[i]; }

  double split_sse(std::size_t n_left) const {
    const std::size_t n = size();
    const std::size_t n_right = n - n_left;
    const double left_sum = sum_[n_left];
    const double right_sum = sum_[n] - left_sum;
    const double left = sum_sq_[n_left] - left_sum * left_sum / static_cast<double>(n_left);
    const double right =
        (sum_sq_[n] - sum_sq_[n_left]) - right_sum * right_sum / static_cast<double>(n_right);
    return left + right;
  }

 private:
  std::vector<double> values_;
  std::vector<std::size_t> ends_;
  std::vector<double> sum_;
  std::vector<double> sum_sq_;
};

// SSEs closer than `tie` are equal: the same partition reached through two
// features can differ in the last bits because summation order differs.
bool better(const SplitCandidate& a, const std::optional<SplitCandidate>& best, double tie) {
  if (!best) return true;
  if (std::abs(a.sse - best->sse) > tie) return a.sse < best->sse;
  if (a.feature != best->feature) return a.feature < best->feature;
  return a.threshold < best->threshold;
}

struct GrowContext {
  const Dataset& d;
  const TreeConfig& cfg;
  Rng& rng;
  std::size_t n_candidates;
  std::vector<TreeNode> nodes;
  std::vector<std::size_t> feature_pool;
};

LeafModel fit_leaf(std::span<const std::size_t> rows, const Dataset& d, LeafModelKind kind,
                   const std::set<std::size_t>& path_features) {
  auto mean = [&] {
    double sum = 0.0;
    for (std::size_t r : rows) sum += d.y(r);
    return sum / static_cast<double>(rows.size());
  };
  switch (kind) {
    case LeafModelKind::Mean:
      return mean();
    case LeafModelKind::LinearSelectedFeatures: {
      if (path_features.empty() || rows.size() < path_features.size() + 1) return mean();
      const std::vector<std::size_t> features(path_features.begin(), path_features.end());
      return fit_ols(d, rows, features);
    }
    case LeafModelKind::LinearAllFeatures: {
      std::vector<std::size_t> features(d.n_features());
      std::iota(features.begin(), features.end(), std::size_t{0});
      return fit_ols(d, rows, features);
    }
  }
  throw std::logic_error("unknown LeafModelKind");
}

std::vector<std::size_t> draw_candidates(GrowContext& ctx) {
  const std::size_t p = ctx.d.n_features();
  std::vector<std::size_t>& pool = ctx.feature_pool;
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  if (ctx.n_candidates >= p) return pool;
  for (std::size_t i = 0; i < ctx.n_candidates; ++i) {
    std::swap(pool[i], pool[i + ctx.rng.index(p - i)]);
  }
  std::vector<std::size_t> chosen(pool.begin(),
                                  pool.begin() + static_cast<std::ptrdiff_t>(ctx.n_candidates));
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Returns the index of the node created for `rows`.
std::size_t grow_node(GrowContext& ctx, std::vector<std::size_t> rows,
                      std::set<std::size_t>& path_features) {
  const std::size_t index = ctx.nodes.size();
  ctx.nodes.emplace_back(LeafNode{});

  const double y0 = ctx.d.y(rows.front());
  const bool constant_target =
      std::all_of(rows.begin(), rows.end(), [&](std::size_t r) { return ctx.d.y(r) == y0; });

  std::optional<SplitCandidate> split;
  if (!constant_target && rows.size() >= 2 * ctx.cfg.min_leaf) {
    const auto candidates = draw_candidates(ctx);
    split = best_split(rows, ctx.d, candidates, ctx.cfg.splitter, ctx.cfg.min_leaf, ctx.rng);
  }
  if (!split) {
    ctx.nodes[index] =
        LeafNode{fit_leaf(rows, ctx.d, ctx.cfg.leaf_model, path_features), rows.size()};
    return index;
  }

  std::vector<std::size_t> left_rows;
  std::vector<std::size_t> right_rows;
  for (std::size_t r : rows) {
    (ctx.d.x(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
  }
  rows.clear();
  rows.shrink_to_fit();

  const bool newly_used = path_features.insert(split->feature).second;
  const std::size_t left = grow_node(ctx, std::move(left_rows), path_features);
  const std::size_t right = grow_node(ctx, std::move(right_rows), path_features);
  if (newly_used) path_features.erase(split->feature);

  ctx.nodes[index] = SplitNode{split->feature, split->threshold, left, right};
  return index;
}

}  // namespace

std::optional<SplitCandidate> best_split(std::span<const std::size_t> rows, const Dataset& d,
                                         std::span<const std::size_t> candidate_features,
                                         const Splitter& splitter, std::size_t min_child,
                                         Rng& rng) {
  const std::size_t n = rows.size();
  const std::size_t min_rows = std::max<std::size_t>(min_child, 1);
  if (n < 2 * min_rows) return std::nullopt;
  const double y_ref = d.y(rows.front());
  double node_sum = 0.0;
  double node_sum_sq = 0.0;
  for (std::size_t r : rows) {
    const double v = d.y(r) - y_ref;
    node_sum += v;
    node_sum_sq += v * v;
  }
  const double tie =
      kSplitTieTolerance * std::max(0.0, node_sum_sq - node_sum * node_sum / static_cast<double>(n));
  const bool uniform = std::holds_alternative<UniformRandom>(splitter);

  std::optional<SplitCandidate> best;
  auto consider = [&](const SortedFeature& sf, std::size_t feature, double threshold) {
    const std::size_t n_left = sf.count_at_most(threshold);
    if (n_left < min_rows || n - n_left < min_rows) return;
    const SplitCandidate c{feature, threshold, sf.split_sse(n_left)};
    if (better(c, best, tie)) best = c;
  };

  for (std::size_t feature : candidate_features) {
    const SortedFeature sf(rows, d, feature, y_ref);
    const auto& values = sf.distinct_values();
    if (values.size() < 2) continue;
    if (uniform) {
      consider(sf, feature, sample_threshold(values.front(), values.back(), splitter, rng));
      continue;
    }
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = sample_threshold(values[i], values[i + 1], splitter, rng);
      if (t >= values[i] && t < values[i + 1]) {
        // Fast path: partition equals the one at this pair.
        const std::size_t n_left = sf.end_of(i);
        if (n_left < min_rows || n - n_left < min_rows) continue;
        const SplitCandidate c{feature, t, sf.split_sse(n_left)};
        if (better(c, best, tie)) best = c;
      } else {
        consider(sf, feature, t);
      }
    }
  }
  return best;
}

Tree grow_tree(std::span<const std::size_t> rows, const Dataset& d, const TreeConfig& cfg,
               Rng& rng) {
  if (rows.empty()) throw std::invalid_argument("grow_tree: no rows");
  if (d.n_features() == 0) throw std::invalid_argument("grow_tree: no features");
  validate(cfg.splitter);
  GrowContext ctx{d, cfg, rng, cfg.max_features.resolve(d.n_features()), {}, {}};
  ctx.feature_pool.resize(d.n_features());
  std::set<std::size_t> path_features;
  grow_node(ctx, std::vector<std::size_t>(rows.begin(), rows.end()), path_features);
  return Tree(std::move(ctx.nodes), d.n_features());
}

Tree grow_tree(const Dataset& d, const TreeConfig& cfg) {
  std::vector<std::size_t> rows(d.n_rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  Rng rng(cfg.rng_seed);
  return grow_tree(rows, d, cfg, rng);
}

}  // namespace stmt
