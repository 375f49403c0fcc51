#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stmt/experiments.hpp"
#include "stmt/report_io.hpp"
#include "stmt/serialization.hpp"

namespace stmt {

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::string real_or_empty(double v) { return std::isnan(v) ? std::string() : format_real(v); }

Eigen::VectorXd decisions_for(const OcsvmModel& model, const Eigen::MatrixXd& x,
                              DecisionScale scale) {
  Eigen::VectorXd d = model.decision_function(x);
  if (scale == DecisionScale::Libsvm) d *= model.nu * static_cast<double>(model.n_train);
  return d;
}

std::string row_id(const Dataset& d, std::size_t r, std::size_t original_row) {
  return d.has_row_ids() ? d.row_ids()[r] : std::to_string(original_row);
}

}  // namespace

LogsRunResult run_logs_pipeline(const Dataset& data, const LogsRunConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("run_logs_pipeline: no seeds");
  if (cfg.methods.empty()) throw std::invalid_argument("run_logs_pipeline: no methods");

  LogsRunResult result;
  Dataset full = data;
  if (!cfg.preprocess_train_only) {
    auto [reduced, report] = preprocess(data, cfg.preprocess);
    full = std::move(reduced);
    result.preprocess_report = std::move(report);
    result.features = full.feature_names();
  }

  for (std::uint64_t seed : cfg.seeds) {
    TrainTestSplit split = split_random(full, cfg.train_fraction, seed);
    if (cfg.preprocess_train_only) {
      auto [train, report] = preprocess(split.train, cfg.preprocess);
      split.test = split.test.select_features(train.feature_names());
      split.train = std::move(train);
      if (result.features.empty()) {
        result.preprocess_report = std::move(report);
        result.features = split.train.feature_names();
      }
    }

    // Novelty detector sees training features only.
    const OcsvmModel detector = fit_ocsvm(split.train.x(), cfg.ocsvm);
    const Eigen::VectorXd decision = decisions_for(detector, split.test.x(), cfg.decision_scale);
    const RegionPartition parts = partition_by_decision(
        std::span<const double>(decision.data(), static_cast<std::size_t>(decision.size())),
        cfg.bounds);
    result.counts.push_back({seed, parts.interpolation.size(), parts.extrapolation.size(),
                             parts.outlier.size(), parts.out_of_range.size()});

    std::vector<std::string> region_of(split.test.n_rows());
    for (auto i : parts.interpolation) region_of[i] = "interpolation";
    for (auto i : parts.extrapolation) region_of[i] = "extrapolation";
    for (auto i : parts.outlier) region_of[i] = "outlier";
    for (auto i : parts.out_of_range) region_of[i] = "out_of_range";
    for (std::size_t i = 0; i < split.test.n_rows(); ++i) {
      result.decisions.push_back({seed, row_id(split.test, i, split.test_rows[i]),
                                  decision(static_cast<Eigen::Index>(i)), region_of[i]});
    }

    MethodSettings settings = cfg.settings;
    settings.seed = seed;
    for (Method method : cfg.methods) {
      const Regressor model = fit_method(method, split.train, settings);
      const Eigen::VectorXd pred = model.predict(split.test.x(), settings.n_threads);
      const std::string name = to_string(method);

      for (Region region : {Region::Interpolation, Region::Extrapolation}) {
        const auto& rows =
            region == Region::Interpolation ? parts.interpolation : parts.extrapolation;
        std::vector<double> truth;
        std::vector<double> predicted;
        for (auto i : rows) {
          truth.push_back(split.test.y(i));
          predicted.push_back(pred(static_cast<Eigen::Index>(i)));
        }
        SeedMetrics m{name, region, seed, rows.size(), std::nullopt, std::nullopt};
        if (!truth.empty()) m.mae = mae(truth, predicted);
        if (truth.size() >= 2) {
          try {
            m.r2 = r2(truth, predicted);
          } catch (const std::invalid_argument&) {
            // Constant target in this region: leave the cell missing.
          }
        }
        result.per_seed.push_back(std::move(m));
      }

      auto& scatter = result.scatter[name];
      for (auto i : parts.extrapolation) {
        scatter.push_back({seed, row_id(split.test, i, split.test_rows[i]), split.test.y(i),
                           pred(static_cast<Eigen::Index>(i)),
                           decision(static_cast<Eigen::Index>(i))});
      }
    }
  }

  for (Method method : cfg.methods) {
    const std::string name = to_string(method);
    for (Region region : {Region::Interpolation, Region::Extrapolation}) {
      std::vector<double> r2s;
      std::vector<double> maes;
      for (const auto& m : result.per_seed) {
        if (m.method != name || m.region != region) continue;
        if (m.r2) r2s.push_back(*m.r2);
        if (m.mae) maes.push_back(*m.mae);
      }
      result.summaries.push_back(summarize(name, region, std::move(r2s), std::move(maes)));
    }
  }
  return result;
}

void write_logs_reports(const LogsRunResult& result, const LogsRunConfig& cfg,
                        const std::string& out_dir) {
  {
    std::ostringstream out;
    out << "seed,n_interp,n_extrap,n_outlier,n_out_of_range\n";
    for (const auto& c : result.counts) {
      out << c.seed << ',' << c.interpolation << ',' << c.extrapolation << ',' << c.outlier
          << ',' << c.out_of_range << '\n';
    }
    write_file_atomic(out_dir + "/region_counts.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "method,region,n_seeds_r2,r2_mean,r2_ci95,n_seeds_mae,mae_mean,mae_ci95\n";
    for (const auto& s : result.summaries) {
      out << s.method << ',' << to_string(s.region) << ',' << s.r2_per_seed.size() << ','
          << real_or_empty(s.r2_mean) << ',' << real_or_empty(s.r2_ci_half) << ','
          << s.mae_per_seed.size() << ',' << real_or_empty(s.mae_mean) << ','
          << real_or_empty(s.mae_ci_half) << '\n';
    }
    write_file_atomic(out_dir + "/summary.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "method,region,seed,n,r2,mae\n";
    for (const auto& m : result.per_seed) {
      out << m.method << ',' << to_string(m.region) << ',' << m.seed << ',' << m.n << ','
          << cell(m.r2) << ',' << cell(m.mae) << '\n';
    }
    write_file_atomic(out_dir + "/per_seed.csv", out.str());
  }
  {
    std::ostringstream out;
    out << "seed\tid\tdecision\tregion\n";
    for (const auto& d : result.decisions) {
      out << d.seed << '\t' << d.id << '\t' << format_real(d.decision) << '\t' << d.region << '\n';
    }
    write_file_atomic(out_dir + "/decisions.tsv", out.str());
  }
  for (const auto& [method, points] : result.scatter) {
    std::ostringstream out;
    out << "seed\tid\ty_true\ty_pred\tdecision\n";
    for (const auto& p : points) {
      out << p.seed << '\t' << p.id << '\t' << format_real(p.y_true) << '\t'
          << format_real(p.y_pred) << '\t' << format_real(p.decision) << '\n';
    }
    write_file_atomic(out_dir + "/scatter_" + method + ".tsv", out.str());
  }

  nlohmann::json methods = nlohmann::json::array();
  for (Method m : cfg.methods) {
    if (m == Method::MLR) {
      methods.push_back({{"method", "MLR"}});
    } else {
      methods.push_back({{"method", to_string(m)}, {"config", to_json(method_config(m, cfg.settings))}});
    }
  }
  nlohmann::json correlated = nlohmann::json::array();
  for (const auto& c : result.preprocess_report.dropped_correlated) {
    correlated.push_back({{"kept", c.kept}, {"dropped", c.dropped}, {"abs_r", c.abs_r}});
  }
  nlohmann::json doc = {
      {"descriptor_csv", cfg.descriptor_csv},
      {"target_column", cfg.target_column},
      {"id_column", cfg.id_column},
      {"seeds", cfg.seeds},
      {"train_fraction", cfg.train_fraction},
      {"preprocess",
       {{"corr_threshold", cfg.preprocess.corr_threshold},
        {"name_patterns", cfg.preprocess.name_patterns},
        {"train_only", cfg.preprocess_train_only},
        {"dropped_by_pattern", result.preprocess_report.dropped_by_pattern},
        {"dropped_constant", result.preprocess_report.dropped_constant},
        {"dropped_correlated", std::move(correlated)},
        {"features", result.features}}},
      {"ocsvm",
       {{"nu", cfg.ocsvm.nu},
        {"gamma", cfg.ocsvm.gamma ? nlohmann::json(*cfg.ocsvm.gamma) : nlohmann::json("scale")},
        {"standardize", cfg.ocsvm.standardize},
        {"tolerance", cfg.ocsvm.tolerance},
        {"decision_scale", cfg.decision_scale == DecisionScale::Libsvm ? "libsvm" : "normalized"}}},
      {"region_bounds",
       {{"interpolation", {cfg.bounds.interpolation().lo, cfg.bounds.interpolation().hi}},
        {"extrapolation", {cfg.bounds.extrapolation().lo, cfg.bounds.extrapolation().hi}},
        {"outlier", {cfg.bounds.outlier().lo, cfg.bounds.outlier().hi}}}},
      {"methods", std::move(methods)},
      {"format_version", 1}};
  write_file_atomic(out_dir + "/run.json", doc.dump(2) + "\n");
}

LogsRunResult run_logs_pipeline(const LogsRunConfig& cfg, const std::string& out_dir) {
  const Dataset data = load_csv(cfg.descriptor_csv, cfg.target_column, cfg.id_column);
  LogsRunResult result = run_logs_pipeline(data, cfg);
  write_logs_reports(result, cfg, out_dir);
  return result;
}

}  // namespace stmt
