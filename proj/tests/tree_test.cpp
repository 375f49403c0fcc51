#include "stmt/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "stmt/dataset.hpp"

namespace stmt {
namespace {

Dataset one_feature(const std::vector<double>& x, const std::vector<double>& y) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), 1);
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    m(static_cast<Eigen::Index>(i), 0) = x[i];
    v(static_cast<Eigen::Index>(i)) = y[i];
  }
  return Dataset({"x"}, m, v);
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.n_rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

double predict1(const Tree& t, double x) {
  const double v[1] = {x};
  return t.predict(v);
}

// Exhaustive CART written without prefix sums: every feature, every adjacent
// distinct pair, midpoint threshold, two-pass SSE.
class BruteForceCart {
 public:
  BruteForceCart(const Dataset& d, std::size_t min_leaf) : d_(d), min_leaf_(min_leaf) {}

  double predict(const std::vector<std::size_t>& rows, std::span<const double> x) const {
    const auto split = best(rows);
    if (!split) {
      double sum = 0.0;
      for (auto r : rows) sum += d_.y(r);
      return sum / static_cast<double>(rows.size());
    }
    std::vector<std::size_t> side;
    const bool go_left = x[split->feature] <= split->threshold;
    for (auto r : rows) {
      if ((d_.x(r, split->feature) <= split->threshold) == go_left) side.push_back(r);
    }
    return predict(side, x);
  }

 private:
  struct Choice {
    std::size_t feature;
    double threshold;
    double sse;
  };

  static double sse_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double s = 0.0;
    for (double e : v) s += (e - mean) * (e - mean);
    return s;
  }

  std::optional<Choice> best(const std::vector<std::size_t>& rows) const {
    if (rows.size() < 2 * min_leaf_) return std::nullopt;
    std::vector<double> ys;
    for (auto r : rows) ys.push_back(d_.y(r));
    if (std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys.front(); })) {
      return std::nullopt;
    }
    const double tie = 1e-12 * sse_of(ys);
    std::optional<Choice> out;
    for (std::size_t f = 0; f < d_.n_features(); ++f) {
      std::vector<double> values;
      for (auto r : rows) values.push_back(d_.x(r, f));
      std::sort(values.begin(), values.end());
      values.erase(std::unique(values.begin(), values.end()), values.end());
      for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        const double t = (values[i] + values[i + 1]) / 2.0;
        std::vector<double> left;
        std::vector<double> right;
        for (auto r : rows) (d_.x(r, f) <= t ? left : right).push_back(d_.y(r));
        if (left.size() < min_leaf_ || right.size() < min_leaf_) continue;
        const Choice c{f, t, sse_of(left) + sse_of(right)};
        if (!out || c.sse < out->sse - tie) out = c;
      }
    }
    return out;
  }

  const Dataset& d_;
  std::size_t min_leaf_;
};

TEST(SampleThresholdTest, MidpointAndDegenerate) {
  Rng rng(0);
  EXPECT_DOUBLE_EQ(sample_threshold(1.0, 2.0, Midpoint{}, rng), 1.5);
  Rng a(5);
  Rng b(5);
  EXPECT_DOUBLE_EQ(sample_threshold(3.0, 3.0, StochasticNormal{5.0}, a), 3.0);
  EXPECT_EQ(a.next_u64(), b.next_u64()) << "degenerate pair must not consume randomness";
}

TEST(SampleThresholdTest, NormalMomentsMatchHalfGapOverK) {
  Rng rng(123);
  const int n = 100000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_threshold(0.0, 2.0, StochasticNormal{5.0}, rng);
    sum += t;
    sum_sq += t * t;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(sd, 0.2, 0.2 * 0.02);
}

TEST(SampleThresholdTest, DrawsAreNotClamped) {
  Rng rng(9);
  const int n = 100000;
  int outside = 0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_threshold(0.0, 2.0, StochasticNormal{1.0}, rng);
    if (t < 0.0 || t > 2.0) ++outside;
  }
  EXPECT_NEAR(static_cast<double>(outside) / n, std::erfc(1.0 / std::sqrt(2.0)), 0.01);
}

TEST(SampleThresholdTest, UniformStaysInRange) {
  Rng rng(4);
  for (int i = 0; i < 10000; ++i) {
    const double t = sample_threshold(-1.0, 3.0, UniformRandom{}, rng);
    ASSERT_GE(t, -1.0);
    ASSERT_LT(t, 3.0);
  }
}

TEST(ValidateSplitterTest, RejectsNonPositiveK) {
  EXPECT_THROW(validate(StochasticNormal{0.0}), std::invalid_argument);
  EXPECT_THROW(validate(StochasticNormal{-1.0}), std::invalid_argument);
  EXPECT_NO_THROW(validate(StochasticNormal{0.5}));
  EXPECT_NO_THROW(validate(Midpoint{}));
}

TEST(MaxFeaturesTest, Resolve) {
  EXPECT_EQ(MaxFeatures::all().resolve(7), 7u);
  EXPECT_EQ(MaxFeatures::count(3).resolve(7), 3u);
  EXPECT_EQ(MaxFeatures::count(30).resolve(7), 7u);
  EXPECT_EQ(MaxFeatures::fraction(1.0 / 3.0).resolve(7), 3u);
  EXPECT_EQ(MaxFeatures::fraction(0.01).resolve(7), 1u);
  EXPECT_THROW(MaxFeatures::count(0), std::invalid_argument);
  EXPECT_THROW(MaxFeatures::fraction(0.0), std::invalid_argument);
  EXPECT_THROW(MaxFeatures::fraction(1.5), std::invalid_argument);
}

TEST(BestSplitTest, StepFunction) {
  const Dataset d = one_feature({1, 2, 3, 4}, {0, 0, 10, 10});
  const auto rows = all_rows(d);
  const std::vector<std::size_t> features{0};
  Rng rng(0);
  const auto split = best_split(rows, d, features, Midpoint{}, 1, rng);
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
  EXPECT_DOUBLE_EQ(split->threshold, 2.5);
  EXPECT_DOUBLE_EQ(split->sse, 0.0);
}

TEST(BestSplitTest, ConstantTargetTakesLowestFeatureAndThreshold) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 10,  //
      2, 20,   //
      3, 30,   //
      4, 40;
  const Dataset d({"a", "b"}, x, Eigen::VectorXd::Constant(4, 3.0));
  const auto rows = all_rows(d);
  const std::vector<std::size_t> features{0, 1};
  Rng rng(0);
  const auto split = best_split(rows, d, features, Midpoint{}, 1, rng);
  ASSERT_TRUE(split.has_value());
  EXPECT_EQ(split->feature, 0u);
  EXPECT_DOUBLE_EQ(split->threshold, 1.5);
  EXPECT_EQ(split->sse, 0.0);
}

TEST(BestSplitTest, NoValidSplit) {
  const Dataset d = one_feature({1, 2}, {0, 1});
  const auto rows = all_rows(d);
  const std::vector<std::size_t> features{0};
  Rng rng(0);
  EXPECT_FALSE(best_split(rows, d, features, Midpoint{}, 2, rng).has_value());
  const Dataset same = one_feature({5, 5, 5}, {0, 1, 2});
  const auto same_rows = all_rows(same);
  EXPECT_FALSE(best_split(same_rows, same, features, Midpoint{}, 1, rng).has_value());
}

TEST(BestSplitTest, ThresholdOutsidePairStillScoresItsPartition) {
  // Small k puts many draws outside their pair; the partition actually
  // routed by the drawn threshold must be the one scored.
  const Dataset d = one_feature({0, 1, 2, 3, 4, 5}, {0, 0, 0, 9, 9, 9});
  const auto rows = all_rows(d);
  const std::vector<std::size_t> features{0};
  int scored = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const auto split = best_split(rows, d, features, StochasticNormal{0.2}, 1, rng);
    if (!split) continue;
    ++scored;
    std::vector<double> left;
    std::vector<double> right;
    for (auto r : rows) (d.x(r, 0) <= split->threshold ? left : right).push_back(d.y(r));
    ASSERT_FALSE(left.empty());
    ASSERT_FALSE(right.empty());
    auto sse = [](const std::vector<double>& v) {
      const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      double s = 0.0;
      for (double e : v) s += (e - m) * (e - m);
      return s;
    };
    EXPECT_NEAR(split->sse, sse(left) + sse(right), 1e-9);
  }
  EXPECT_GT(scored, 100);
}

TEST(GrowTreeTest, SingleRowIsOneLeaf) {
  const Dataset d = one_feature({3.0}, {7.0});
  const Tree t = grow_tree(d, TreeConfig{});
  EXPECT_EQ(t.nodes().size(), 1u);
  EXPECT_DOUBLE_EQ(predict1(t, -100.0), 7.0);
}

TEST(GrowTreeTest, StepTreePredictsRightLeaf) {
  const Dataset d = one_feature({1, 2, 3, 4}, {0, 0, 10, 10});
  const Tree t = grow_tree(d, TreeConfig{});
  EXPECT_EQ(t.n_leaves(), 2u);
  EXPECT_EQ(t.depth(), 1u);
  EXPECT_DOUBLE_EQ(predict1(t, 2.7), 10.0);
  EXPECT_DOUBLE_EQ(predict1(t, 2.5), 0.0);
}

TEST(GrowTreeTest, LinearLeavesExtrapolateALine) {
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.0 * i + 1.0);
  }
  const Dataset d = one_feature(x, y);
  TreeConfig cfg;
  cfg.leaf_model = LeafModelKind::LinearSelectedFeatures;
  cfg.min_leaf = 2;
  const Tree t = grow_tree(d, cfg);
  ASSERT_GT(t.n_leaves(), 1u);
  for (const auto& node : t.nodes()) {
    if (const auto* leaf = std::get_if<LeafNode>(&node)) {
      const auto& m = std::get<LinearModel>(leaf->model);
      EXPECT_NEAR(m.coefficients(0), 2.0, 1e-8);
      EXPECT_NEAR(m.intercept, 1.0, 1e-8);
    }
  }
  EXPECT_NEAR(predict1(t, 100.0), 201.0, 1e-6);
  EXPECT_NEAR(predict1(t, -50.0), -99.0, 1e-6);
}

TEST(GrowTreeTest, LinearLeafFallsBackToMeanWithoutPath) {
  // Constant target: root is a leaf, no path features, so the leaf is a mean.
  const Dataset d = one_feature({1, 2, 3}, {4, 4, 4});
  TreeConfig cfg;
  cfg.leaf_model = LeafModelKind::LinearSelectedFeatures;
  const Tree t = grow_tree(d, cfg);
  ASSERT_EQ(t.nodes().size(), 1u);
  EXPECT_TRUE(std::holds_alternative<double>(std::get<LeafNode>(t.nodes()[0]).model));
}

TEST(GrowTreeTest, MatchesBruteForceCart) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(11);
    const std::size_t p = 1 + rng.index(2);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      // Small integer grid so duplicate x values are common.
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = static_cast<double>(rng.index(5));
      y(i) = rng.normal();
    }
    std::vector<std::string> names{"a", "b"};
    names.resize(p);
    const Dataset d(names, x, y);
    const std::size_t min_leaf = 1 + rng.index(2);
    TreeConfig cfg;
    cfg.min_leaf = min_leaf;
    const Tree t = grow_tree(d, cfg);
    const BruteForceCart oracle(d, min_leaf);
    const auto rows = all_rows(d);
    for (int probe = 0; probe < 30; ++probe) {
      std::vector<double> q(p);
      for (auto& v : q) v = rng.uniform(-1.0, 5.0);
      EXPECT_NEAR(t.predict(q), oracle.predict(rows, q), 1e-12) << "seed " << seed;
    }
  }
}

TEST(GrowTreeTest, RoutingIsTotalAndLeafCountsSumToRows) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(40, 3);
    Eigen::VectorXd y(40);
    for (Eigen::Index i = 0; i < 40; ++i) {
      for (Eigen::Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
      y(i) = x(i, 0) * x(i, 1) + rng.normal(0.0, 0.1);
    }
    const Dataset d({"a", "b", "c"}, x, y);
    TreeConfig cfg;
    cfg.splitter = StochasticNormal{3.0};
    cfg.leaf_model = LeafModelKind::LinearSelectedFeatures;
    cfg.min_leaf = 3;
    cfg.rng_seed = seed;
    const Tree t = grow_tree(d, cfg);
    std::size_t total = 0;
    for (const auto& node : t.nodes()) {
      if (const auto* leaf = std::get_if<LeafNode>(&node)) {
        EXPECT_GE(leaf->n_samples, 3u);
        total += leaf->n_samples;
      }
    }
    EXPECT_EQ(total, 40u);
    for (int probe = 0; probe < 50; ++probe) {
      std::vector<double> q{rng.normal(0, 100), rng.normal(0, 100), rng.normal(0, 100)};
      const auto leaf = t.leaf_index(q);
      EXPECT_TRUE(std::holds_alternative<LeafNode>(t.nodes()[leaf]));
      EXPECT_TRUE(std::isfinite(t.predict(q)));
    }
  }
}

TEST(GrowTreeTest, DeterministicForFixedSeed) {
  Rng rng(1);
  Eigen::MatrixXd x(30, 2);
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
    y(i) = rng.normal();
  }
  const Dataset d({"a", "b"}, x, y);
  TreeConfig cfg;
  cfg.splitter = StochasticNormal{2.0};
  cfg.max_features = MaxFeatures::count(1);
  cfg.rng_seed = 77;
  const Tree a = grow_tree(d, cfg);
  const Tree b = grow_tree(d, cfg);
  ASSERT_EQ(a.nodes().size(), b.nodes().size());
  for (std::size_t i = 0; i < a.nodes().size(); ++i) {
    if (const auto* s = std::get_if<SplitNode>(&a.nodes()[i])) {
      const auto& o = std::get<SplitNode>(b.nodes()[i]);
      EXPECT_EQ(s->feature, o.feature);
      EXPECT_EQ(s->threshold, o.threshold);
    }
  }
  cfg.rng_seed = 78;
  const Tree c = grow_tree(d, cfg);
  bool differs = c.nodes().size() != a.nodes().size();
  for (std::size_t i = 0; !differs && i < a.nodes().size(); ++i) {
    const auto* s = std::get_if<SplitNode>(&a.nodes()[i]);
    const auto* o = std::get_if<SplitNode>(&c.nodes()[i]);
    differs = (s == nullptr) != (o == nullptr) || (s && s->threshold != o->threshold);
  }
  EXPECT_TRUE(differs);
}

TEST(GrowTreeTest, ZeroTrainingErrorWithUnitLeavesAndDistinctX) {
  Rng rng(2);
  std::vector<double> x;
  std::vector<double> y;
  for (int i = 0; i < 25; ++i) {
    x.push_back(i * 0.37);
    y.push_back(rng.normal());
  }
  const Dataset d = one_feature(x, y);
  for (const Splitter& s : {Splitter{Midpoint{}}, Splitter{StochasticNormal{5.0}}}) {
    TreeConfig cfg;
    cfg.splitter = s;
    const Tree t = grow_tree(d, cfg);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(predict1(t, x[i]), y[i]);
  }
}

TEST(GrowTreeTest, LargerKConcentratesRootThreshold) {
  // Two clusters: the root split falls in the gap (2, 8).
  std::vector<double> x{0, 1, 2, 8, 9, 10};
  std::vector<double> y{0, 0, 0, 5, 5, 5};
  const Dataset d = one_feature(x, y);
  auto spread = [&](double k) {
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 500;
    for (int i = 0; i < n; ++i) {
      TreeConfig cfg;
      cfg.splitter = StochasticNormal{k};
      cfg.rng_seed = static_cast<std::uint64_t>(i);
      const Tree t = grow_tree(d, cfg);
      const double thr = std::get<SplitNode>(t.nodes()[0]).threshold;
      sum += thr;
      sum_sq += thr * thr;
    }
    const double mean = sum / n;
    return std::sqrt(sum_sq / n - mean * mean);
  };
  const double s3 = spread(3.0);
  const double s7 = spread(7.0);
  EXPECT_GT(s3, s7);
  EXPECT_NEAR(s3, 1.0, 0.1);
  EXPECT_NEAR(s7, 6.0 / 14.0, 0.05);
}

TEST(TreeTest, RejectsMalformedNodesAndWrongDimension) {
  EXPECT_THROW(Tree({}, 1), std::invalid_argument);
  std::vector<TreeNode> cyclic{SplitNode{0, 0.0, 0, 1}, LeafNode{1.0, 1}};
  EXPECT_THROW(Tree(cyclic, 1), std::invalid_argument);
  std::vector<TreeNode> bad_feature{SplitNode{2, 0.0, 1, 2}, LeafNode{1.0, 1}, LeafNode{2.0, 1}};
  EXPECT_THROW(Tree(bad_feature, 1), std::invalid_argument);
  const Tree ok({SplitNode{0, 0.0, 1, 2}, LeafNode{1.0, 1}, LeafNode{2.0, 1}}, 1);
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(ok.predict(two), std::invalid_argument);
}

}  // namespace
}  // namespace stmt
