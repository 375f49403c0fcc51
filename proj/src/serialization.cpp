#include "stmt/serialization.hpp"

#include <fstream>
#include <stdexcept>

#include "stmt/report_io.hpp"

namespace stmt {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "stmt-ensemble";
constexpr int kFormatVersion = 1;

std::string leaf_kind_name(LeafModelKind kind) {
  switch (kind) {
    case LeafModelKind::Mean:
      return "mean";
    case LeafModelKind::LinearSelectedFeatures:
      return "linear_selected";
    case LeafModelKind::LinearAllFeatures:
      return "linear_all";
  }
  throw std::logic_error("unknown LeafModelKind");
}

LeafModelKind leaf_kind_from_name(const std::string& name) {
  if (name == "mean") return LeafModelKind::Mean;
  if (name == "linear_selected") return LeafModelKind::LinearSelectedFeatures;
  if (name == "linear_all") return LeafModelKind::LinearAllFeatures;
  throw std::invalid_argument("unknown leaf model '" + name + "'");
}

}  // namespace

std::string splitter_name(const Splitter& splitter) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Midpoint>) return "midpoint";
        if constexpr (std::is_same_v<S, StochasticNormal>) return "stochastic_normal";
        if constexpr (std::is_same_v<S, UniformRandom>) return "uniform_random";
      },
      splitter);
}

json to_json(const Tree& tree) {
  json nodes = json::array();
  for (const auto& node : tree.nodes()) {
    if (const auto* s = std::get_if<SplitNode>(&node)) {
      nodes.push_back({{"kind", "split"},
                       {"feature", s->feature},
                       {"threshold", s->threshold},
                       {"left", s->left},
                       {"right", s->right}});
      continue;
    }
    const auto& leaf = std::get<LeafNode>(node);
    json j = {{"kind", "leaf"}, {"n_samples", leaf.n_samples}};
    if (const auto* value = std::get_if<double>(&leaf.model)) {
      j["value"] = *value;
    } else {
      const auto& lm = std::get<LinearModel>(leaf.model);
      j["intercept"] = lm.intercept;
      j["features"] = lm.feature_indices;
      j["coefficients"] = std::vector<double>(lm.coefficients.data(),
                                              lm.coefficients.data() + lm.coefficients.size());
    }
    nodes.push_back(std::move(j));
  }
  return {{"n_features", tree.n_features()}, {"nodes", std::move(nodes)}};
}

Tree tree_from_json(const json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    const auto kind = n.at("kind").get<std::string>();
    if (kind == "split") {
      nodes.emplace_back(SplitNode{n.at("feature").get<std::size_t>(),
                                   n.at("threshold").get<double>(),
                                   n.at("left").get<std::size_t>(),
                                   n.at("right").get<std::size_t>()});
    } else if (kind == "leaf") {
      LeafNode leaf;
      leaf.n_samples = n.at("n_samples").get<std::size_t>();
      if (n.contains("value")) {
        leaf.model = n.at("value").get<double>();
      } else {
        LinearModel lm;
        lm.intercept = n.at("intercept").get<double>();
        lm.feature_indices = n.at("features").get<std::vector<std::size_t>>();
        const auto coef = n.at("coefficients").get<std::vector<double>>();
        if (coef.size() != lm.feature_indices.size()) {
          throw std::invalid_argument("tree JSON: coefficient count mismatch");
        }
        lm.coefficients = Eigen::Map<const Eigen::VectorXd>(coef.data(),
                                                            static_cast<Eigen::Index>(coef.size()));
        leaf.model = std::move(lm);
      }
      nodes.emplace_back(std::move(leaf));
    } else {
      throw std::invalid_argument("tree JSON: unknown node kind '" + kind + "'");
    }
  }
  return Tree(std::move(nodes), j.at("n_features").get<std::size_t>());
}

json to_json(const EnsembleConfig& cfg) {
  json splitter = {{"kind", splitter_name(cfg.splitter)}};
  if (const auto* s = std::get_if<StochasticNormal>(&cfg.splitter)) splitter["k"] = s->k;

  json min_leaf_json = std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, min_leaf::Absolute>) {
          return {{"kind", "absolute"}, {"count", p.count}};
        } else if constexpr (std::is_same_v<P, min_leaf::FractionOfSamples>) {
          return {{"kind", "fraction_of_samples"}, {"fraction", p.fraction}};
        } else {
          return {{"kind", "feature_relative"}, {"multiplier", p.multiplier}};
        }
      },
      cfg.min_leaf);

  json max_features;
  if (cfg.max_features.is_all()) {
    max_features = {{"kind", "all"}};
  } else if (cfg.max_features.is_count()) {
    max_features = {{"kind", "count"}, {"count", cfg.max_features.count_value()}};
  } else {
    max_features = {{"kind", "fraction"}, {"fraction", cfg.max_features.fraction_value()}};
  }

  return {{"n_estimators", cfg.n_estimators},
          {"splitter", std::move(splitter)},
          {"leaf_model", leaf_kind_name(cfg.leaf_model)},
          {"min_leaf", std::move(min_leaf_json)},
          {"max_features", std::move(max_features)},
          {"bootstrap", cfg.bootstrap},
          {"aggregation", cfg.aggregation == Aggregation::Mean ? "mean" : "median"},
          {"master_seed", cfg.master_seed}};
}

EnsembleConfig ensemble_config_from_json(const json& j) {
  EnsembleConfig cfg;
  cfg.n_estimators = j.at("n_estimators").get<std::size_t>();

  const auto& sp = j.at("splitter");
  const auto sk = sp.at("kind").get<std::string>();
  if (sk == "midpoint") {
    cfg.splitter = Midpoint{};
  } else if (sk == "stochastic_normal") {
    cfg.splitter = StochasticNormal{sp.at("k").get<double>()};
  } else if (sk == "uniform_random") {
    cfg.splitter = UniformRandom{};
  } else {
    throw std::invalid_argument("unknown splitter '" + sk + "'");
  }

  cfg.leaf_model = leaf_kind_from_name(j.at("leaf_model").get<std::string>());

  const auto& ml = j.at("min_leaf");
  const auto mk = ml.at("kind").get<std::string>();
  if (mk == "absolute") {
    cfg.min_leaf = min_leaf::Absolute{ml.at("count").get<std::size_t>()};
  } else if (mk == "fraction_of_samples") {
    cfg.min_leaf = min_leaf::FractionOfSamples{ml.at("fraction").get<double>()};
  } else if (mk == "feature_relative") {
    cfg.min_leaf = min_leaf::FeatureRelative{ml.at("multiplier").get<double>()};
  } else {
    throw std::invalid_argument("unknown min_leaf kind '" + mk + "'");
  }

  const auto& mf = j.at("max_features");
  const auto fk = mf.at("kind").get<std::string>();
  if (fk == "all") {
    cfg.max_features = MaxFeatures::all();
  } else if (fk == "count") {
    cfg.max_features = MaxFeatures::count(mf.at("count").get<std::size_t>());
  } else if (fk == "fraction") {
    cfg.max_features = MaxFeatures::fraction(mf.at("fraction").get<double>());
  } else {
    throw std::invalid_argument("unknown max_features kind '" + fk + "'");
  }

  cfg.bootstrap = j.at("bootstrap").get<bool>();
  const auto agg = j.at("aggregation").get<std::string>();
  if (agg == "mean") {
    cfg.aggregation = Aggregation::Mean;
  } else if (agg == "median") {
    cfg.aggregation = Aggregation::Median;
  } else {
    throw std::invalid_argument("unknown aggregation '" + agg + "'");
  }
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  validate(cfg);
  return cfg;
}

json to_json(const Ensemble& ensemble) {
  json trees = json::array();
  for (const auto& t : ensemble.trees()) trees.push_back(to_json(t));
  return {{"format", kFormat},
          {"version", kFormatVersion},
          {"config", to_json(ensemble.config())},
          {"feature_names", ensemble.feature_names()},
          {"trees", std::move(trees)}};
}

Ensemble ensemble_from_json(const json& j) {
  if (j.value("format", "") != kFormat) throw std::invalid_argument("not an stmt-ensemble document");
  if (j.at("version").get<int>() != kFormatVersion) {
    throw std::invalid_argument("unsupported stmt-ensemble version");
  }
  std::vector<Tree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(tree_from_json(t));
  return Ensemble(std::move(trees), ensemble_config_from_json(j.at("config")),
                  j.at("feature_names").get<std::vector<std::string>>());
}

void save_ensemble(const Ensemble& ensemble, const std::string& path) {
  write_file_atomic(path, to_json(ensemble).dump() + "\n");
}

Ensemble load_ensemble(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return ensemble_from_json(json::parse(in));
}

}  // namespace stmt
