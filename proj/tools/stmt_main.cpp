// Command-line front end: model fitting/prediction and the benchmark runs.

#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stmt/dataset.hpp"
#include "stmt/ensemble.hpp"
#include "stmt/experiments.hpp"
#include "stmt/report_io.hpp"
#include "stmt/serialization.hpp"

namespace {

struct TreeFlags {
  std::string method = "STMT";
  double k = 5.0;
  std::size_t trees = 100;
  std::uint64_t seed = 0;
  std::size_t min_leaf = 0;
  double min_leaf_features = 0.0;
  std::size_t max_features = 0;
  unsigned threads = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--method", method, "MLR, RF, ET, MT or STMT")->capture_default_str();
    cmd->add_option("--k", k, "STMT threshold spread parameter")->capture_default_str();
    cmd->add_option("--trees", trees, "Number of trees")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("--min-leaf", min_leaf, "Absolute minimum rows per leaf");
    cmd->add_option("--min-leaf-features", min_leaf_features,
                    "Minimum rows per leaf as a multiple of the feature count");
    cmd->add_option("--max-features", max_features, "Candidate features per node (0 = all)");
    cmd->add_option("--threads", threads, "Worker threads (0 = hardware)");
  }

  stmt::MethodSettings settings() const {
    stmt::MethodSettings s;
    s.n_estimators = trees;
    s.k = k;
    s.seed = seed;
    s.n_threads = threads;
    if (min_leaf > 0 && min_leaf_features > 0.0) {
      throw CLI::ValidationError("--min-leaf and --min-leaf-features are mutually exclusive");
    }
    if (min_leaf > 0) s.min_leaf = stmt::min_leaf::Absolute{min_leaf};
    if (min_leaf_features > 0.0) s.min_leaf = stmt::min_leaf::FeatureRelative{min_leaf_features};
    return s;
  }
};

int run_gen_data(const std::string& name, std::size_t n, double noise, bool noise_set,
                 std::uint64_t seed, const std::string& out) {
  stmt::ArtificialSpec spec;
  spec.kind = stmt::artificial_kind_from_string(name);
  spec.n_train = n;
  spec.noise_sigma = noise_set ? noise : stmt::default_noise(spec.kind);
  spec.seed = seed;
  const auto data = stmt::gen_artificial(spec);
  stmt::write_csv(data.train, out + "/train.csv");
  stmt::write_csv(data.grid, out + "/grid.csv");
  std::ostringstream regions;
  regions << "row\tregion\n";
  for (std::size_t i = 0; i < data.grid_regions.size(); ++i) {
    regions << i << '\t' << stmt::to_string(data.grid_regions[i]) << '\n';
  }
  stmt::write_file_atomic(out + "/grid_regions.tsv", regions.str());
  std::cout << "wrote " << data.train.n_rows() << " training rows and " << data.grid.n_rows()
            << " grid rows to " << out << "\n";
  return 0;
}

int run_fit(const std::string& data_path, const std::string& target,
            const std::string& id_column, const TreeFlags& flags, const std::string& out) {
  const auto method = stmt::method_from_string(flags.method);
  if (method == stmt::Method::MLR) {
    throw std::invalid_argument("fit writes tree-ensemble models; choose RF, ET, MT or STMT");
  }
  const auto data = stmt::load_csv(
      data_path, target, id_column.empty() ? std::nullopt : std::optional<std::string>(id_column));
  auto cfg = stmt::method_config(method, flags.settings());
  if (flags.max_features > 0) cfg.max_features = stmt::MaxFeatures::count(flags.max_features);
  const auto ensemble = stmt::fit_ensemble(data, cfg, flags.threads);
  stmt::save_ensemble(ensemble, out);
  std::cout << "fitted " << ensemble.trees().size() << " tree(s) on " << data.n_rows()
            << " rows x " << data.n_features() << " features -> " << out << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& id_column, const std::string& target, unsigned threads,
                const std::string& out) {
  const auto ensemble = stmt::load_ensemble(model_path);
  const auto id = id_column.empty() ? std::nullopt : std::optional<std::string>(id_column);
  auto [x, ids] = stmt::load_feature_columns(data_path, ensemble.feature_names(), id);
  std::optional<Eigen::VectorXd> truth;
  if (!target.empty()) {
    auto [y, unused] = stmt::load_feature_columns(data_path, {target});
    truth = y.col(0);
  }
  const Eigen::VectorXd pred = ensemble.predict(x, threads);

  std::ostringstream tsv;
  tsv << "row\tid";
  for (const auto& name : ensemble.feature_names()) tsv << '\t' << name;
  if (truth) tsv << "\ty_true";
  tsv << "\ty_pred\n";
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    tsv << r << '\t' << (ids.empty() ? std::to_string(r) : ids[static_cast<std::size_t>(r)]);
    for (Eigen::Index j = 0; j < x.cols(); ++j) tsv << '\t' << stmt::format_real(x(r, j));
    if (truth) tsv << '\t' << stmt::format_real((*truth)(r));
    tsv << '\t' << stmt::format_real(pred(r)) << '\n';
  }
  if (out.empty() || out == "-") {
    std::cout << tsv.str();
  } else {
    stmt::write_file_atomic(out, tsv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic threshold model trees and baseline ensembles"};
  app.require_subcommand(1);

  // gen-data
  std::string gen_name = "linear1d";
  std::size_t gen_n = 20;
  double gen_noise = 0.0;
  std::uint64_t gen_seed = 0;
  std::string gen_out = ".";
  auto* gen = app.add_subcommand("gen-data", "Write an artificial dataset and its grid as CSV");
  gen->add_option("--name", gen_name, "linear1d, nonlinear1d, discontinuous1d, bivariate_quadratic")
      ->capture_default_str();
  gen->add_option("--n", gen_n, "Training rows")->capture_default_str();
  auto* gen_noise_opt = gen->add_option("--noise", gen_noise, "Noise standard deviation");
  gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // fit
  std::string fit_data;
  std::string fit_target = "y";
  std::string fit_id;
  std::string fit_out = "model.json";
  TreeFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "Fit a tree ensemble on a CSV and save it as JSON");
  fit->add_option("--data", fit_data, "Training CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--target", fit_target, "Target column")->capture_default_str();
  fit->add_option("--id-column", fit_id, "Identifier column excluded from features");
  fit->add_option("--out", fit_out, "Model JSON path")->capture_default_str();
  fit_flags.add_to(fit);

  // predict
  std::string pred_model;
  std::string pred_data;
  std::string pred_id;
  std::string pred_target;
  std::string pred_out = "-";
  unsigned pred_threads = 0;
  auto* predict = app.add_subcommand("predict", "Predict a CSV with a saved model");
  predict->add_option("--model", pred_model, "Model JSON")->required()->check(CLI::ExistingFile);
  predict->add_option("--data", pred_data, "Input CSV")->required()->check(CLI::ExistingFile);
  predict->add_option("--id-column", pred_id, "Identifier column to echo");
  predict->add_option("--target", pred_target, "Optional target column to echo");
  predict->add_option("--out", pred_out, "Output TSV ('-' for stdout)")->capture_default_str();
  predict->add_option("--threads", pred_threads, "Worker threads (0 = hardware)");

  // bench-artificial
  std::string ba_name = "linear1d";
  std::size_t ba_n = 20;
  double ba_noise = 0.0;
  std::vector<std::string> ba_methods{"MLR", "RF", "MT", "STMT"};
  std::vector<double> ba_k{5.0};
  std::string ba_out = "artificial_out";
  TreeFlags ba_flags;
  auto* ba = app.add_subcommand("bench-artificial", "Fit methods on artificial data, write curves");
  ba->add_option("--name", ba_name, "Dataset generator")->capture_default_str();
  ba->add_option("--n", ba_n, "Training rows")->capture_default_str();
  auto* ba_noise_opt = ba->add_option("--noise", ba_noise, "Noise standard deviation");
  ba->add_option("--method", ba_methods, "Methods (repeatable)")->capture_default_str();
  ba->add_option("--k", ba_k, "STMT k values (repeatable)")->capture_default_str();
  ba->add_option("--trees", ba_flags.trees, "Number of trees")->capture_default_str();
  ba->add_option("--seed", ba_flags.seed, "Seed for data and models")->capture_default_str();
  ba->add_option("--min-leaf", ba_flags.min_leaf, "Absolute minimum rows per leaf");
  ba->add_option("--threads", ba_flags.threads, "Worker threads (0 = hardware)");
  ba->add_option("--out", ba_out, "Output directory")->capture_default_str();

  // bench-logs
  stmt::LogsRunConfig logs;
  std::vector<std::string> bl_methods{"MLR", "RF", "ET", "MT", "STMT"};
  std::string bl_out = "logs_out";
  std::string bl_scale = "libsvm";
  double bl_gamma = 0.0;
  double bl_interp_hi = 10.0;
  double bl_extrap_lo = -8.0;
  double bl_outlier_lo = -10.0;
  auto* bl = app.add_subcommand("bench-logs", "Run the solubility interpolation/extrapolation protocol");
  bl->add_option("--data", logs.descriptor_csv, "Descriptor CSV")->required()->check(CLI::ExistingFile);
  bl->add_option("--target", logs.target_column, "Target column")->capture_default_str();
  bl->add_option("--id-column", logs.id_column, "Identifier column")->capture_default_str();
  bl->add_option("--seed", logs.seeds, "Split seeds (repeatable)")->capture_default_str();
  bl->add_option("--method", bl_methods, "Methods (repeatable)")->capture_default_str();
  bl->add_option("--k", logs.settings.k, "STMT k")->capture_default_str();
  bl->add_option("--trees", logs.settings.n_estimators, "Number of trees")->capture_default_str();
  bl->add_option("--threads", logs.settings.n_threads, "Worker threads (0 = hardware)");
  bl->add_option("--train-fraction", logs.train_fraction, "Training fraction")->capture_default_str();
  bl->add_option("--corr-threshold", logs.preprocess.corr_threshold, "Correlation cutoff")
      ->capture_default_str();
  bl->add_option("--drop-pattern", logs.preprocess.name_patterns,
                 "Case-insensitive column-name patterns to drop (repeatable)")
      ->capture_default_str();
  bl->add_flag("--train-only-preprocess", logs.preprocess_train_only,
               "Select preprocessing columns on each training split");
  bl->add_option("--nu", logs.ocsvm.nu, "OCSVM nu")->capture_default_str();
  auto* bl_gamma_opt = bl->add_option("--gamma", bl_gamma, "OCSVM RBF gamma (default: scale)");
  bl->add_option("--decision-scale", bl_scale, "libsvm or normalized")->capture_default_str();
  bl->add_option("--interp-hi", bl_interp_hi, "Upper bound of the interpolation region")
      ->capture_default_str();
  bl->add_option("--extrap-lo", bl_extrap_lo, "Extrapolation / outlier boundary")
      ->capture_default_str();
  bl->add_option("--outlier-lo", bl_outlier_lo, "Lower bound of the outlier region")
      ->capture_default_str();
  bl->add_option("--out", bl_out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return run_gen_data(gen_name, gen_n, gen_noise, gen_noise_opt->count() > 0, gen_seed, gen_out);
    if (*fit) return run_fit(fit_data, fit_target, fit_id, fit_flags, fit_out);
    if (*predict) {
      return run_predict(pred_model, pred_data, pred_id, pred_target, pred_threads, pred_out);
    }
    if (*ba) {
      stmt::ArtificialSpec spec;
      spec.kind = stmt::artificial_kind_from_string(ba_name);
      spec.n_train = ba_n;
      spec.noise_sigma = ba_noise_opt->count() > 0 ? ba_noise : stmt::default_noise(spec.kind);
      spec.seed = ba_flags.seed;
      stmt::ArtificialRunOptions options;
      options.methods.clear();
      for (const auto& m : ba_methods) options.methods.push_back(stmt::method_from_string(m));
      options.k_values = ba_k;
      options.settings = ba_flags.settings();
      const auto curves = stmt::run_artificial(spec, options, ba_out);
      for (const auto& c : curves) {
        std::cout << c.name;
        for (const auto& [region, value] : c.mae) std::cout << "\tmae_" << region << '=' << value;
        std::cout << '\n';
      }
      return 0;
    }
    if (*bl) {
      logs.methods.clear();
      for (const auto& m : bl_methods) logs.methods.push_back(stmt::method_from_string(m));
      if (bl_gamma_opt->count() > 0) logs.ocsvm.gamma = bl_gamma;
      if (bl_scale == "libsvm") {
        logs.decision_scale = stmt::DecisionScale::Libsvm;
      } else if (bl_scale == "normalized") {
        logs.decision_scale = stmt::DecisionScale::Normalized;
      } else {
        throw std::invalid_argument("--decision-scale must be libsvm or normalized");
      }
      logs.bounds = stmt::RegionBounds({0.0, bl_interp_hi}, {bl_extrap_lo, 0.0},
                                       {bl_outlier_lo, bl_extrap_lo});
      const auto result = stmt::run_logs_pipeline(logs, bl_out);
      for (const auto& s : result.summaries) {
        std::cout << s.method << '\t' << stmt::to_string(s.region) << "\tR2 " << s.r2_mean
                  << " +/- " << s.r2_ci_half << "\tMAE " << s.mae_mean << " +/- "
                  << s.mae_ci_half << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
