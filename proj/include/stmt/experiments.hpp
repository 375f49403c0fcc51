#ifndef STMT_EXPERIMENTS_HPP
#define STMT_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "stmt/dataset.hpp"
#include "stmt/ensemble.hpp"
#include "stmt/linear_model.hpp"
#include "stmt/metrics.hpp"
#include "stmt/ocsvm.hpp"

namespace stmt {

// ---------------------------------------------------------------------------
// Methods

enum class Method { MLR, RF, ET, MT, STMT };

std::string to_string(Method method);
/// Case-insensitive. Throws std::invalid_argument for unknown names.
Method method_from_string(const std::string& name);
const std::vector<Method>& all_methods();

struct MethodSettings {
  std::size_t n_estimators = 100;
  double k = 5.0;
  /// Overrides the preset's minimum leaf policy when set.
  std::optional<MinLeafPolicy> min_leaf;
  std::uint64_t seed = 0;
  unsigned n_threads = 0;
};

/// Preset configuration for a tree method (not MLR).
EnsembleConfig method_config(Method method, const MethodSettings& settings);

/// A fitted MLR model or tree ensemble behind one predict().
class Regressor {
 public:
  explicit Regressor(LinearModel model) : model_(std::move(model)) {}
  explicit Regressor(Ensemble model) : model_(std::move(model)) {}

  Eigen::VectorXd predict(const Eigen::MatrixXd& x, unsigned n_threads = 0) const;
  const std::variant<LinearModel, Ensemble>& model() const { return model_; }

 private:
  std::variant<LinearModel, Ensemble> model_;
};

Regressor fit_method(Method method, const Dataset& train, const MethodSettings& settings);

// ---------------------------------------------------------------------------
// Artificial data
//
// Generators:
//   linear1d             y = 2x + 1 on [0, 10]
//   nonlinear1d          y = sin(x) + 0.5x on [0, 4 pi]
//   discontinuous1d      y = 2x + 1 on [0, 10], no training x in the middle third
//   bivariate_quadratic  y = x1^2 + x2^2 on [-3, 3]^2
// Training inputs are uniform over the domain; Gaussian noise is added to
// training targets only. The grid spans the domain widened by half its width
// on each side (500 points in 1-D, a 60 x 60 lattice in 2-D) and carries
// noiseless targets.

enum class ArtificialKind { Linear1d, Nonlinear1d, Discontinuous1d, BivariateQuadratic };

std::string to_string(ArtificialKind kind);
ArtificialKind artificial_kind_from_string(const std::string& name);

struct ArtificialSpec {
  ArtificialKind kind = ArtificialKind::Linear1d;
  std::size_t n_train = 20;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// Default noise level for a generator (0.3 for bivariate_quadratic, else 0).
double default_noise(ArtificialKind kind);

enum class GridRegion { Interpolation, Gap, Extrapolation };

std::string to_string(GridRegion region);

struct ArtificialData {
  Dataset train;
  Dataset grid;
  std::vector<GridRegion> grid_regions;
  /// Grid rows outside the training domain in every coordinate (2-D corners;
  /// equal to the extrapolation rows in 1-D).
  std::vector<bool> grid_corner;
};

double artificial_truth(ArtificialKind kind, std::span<const double> x);

ArtificialData gen_artificial(const ArtificialSpec& spec);

struct CurveSummary {
  std::string name;  // e.g. "RF", "STMT_k5"
  Method method = Method::RF;
  std::optional<double> k;
  /// MAE (and R2 where defined) over the grid rows of each region.
  std::map<std::string, double> mae;
  std::map<std::string, double> r2;
  std::string curve_file;
};

struct ArtificialRunOptions {
  std::vector<Method> methods{Method::MLR, Method::RF, Method::MT, Method::STMT};
  std::vector<double> k_values{5.0};
  MethodSettings settings;
  /// Minimum leaf used for tree methods when settings.min_leaf is unset:
  /// 2 rows for one input, 3 for two.
  bool dimension_min_leaf = true;
};

/// Fits every method (STMT once per k) on the generated data, writes
/// train.tsv, one curve_<name>.tsv per fit and summary.json to out_dir.
std::vector<CurveSummary> run_artificial(const ArtificialSpec& spec,
                                         const ArtificialRunOptions& options,
                                         const std::string& out_dir);

// ---------------------------------------------------------------------------
// log S pipeline

enum class DecisionScale {
  /// Normalized dual: sum alpha = 1.
  Normalized,
  /// LIBSVM / scikit-learn scale: normalized value times nu * n_train.
  Libsvm,
};

struct LogsRunConfig {
  std::string descriptor_csv;
  std::string target_column = "logS";
  std::string id_column = "id";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double train_fraction = 0.7;
  PreprocessOptions preprocess;
  /// Select preprocessing columns on each training split instead of the
  /// full dataset.
  bool preprocess_train_only = false;
  RegionBounds bounds;
  OcsvmOptions ocsvm;
  DecisionScale decision_scale = DecisionScale::Libsvm;
  std::vector<Method> methods{Method::MLR, Method::RF, Method::ET, Method::MT, Method::STMT};
  MethodSettings settings;
};

struct RegionCounts {
  std::uint64_t seed = 0;
  std::size_t interpolation = 0;
  std::size_t extrapolation = 0;
  std::size_t outlier = 0;
  std::size_t out_of_range = 0;
};

struct SeedMetrics {
  std::string method;
  Region region = Region::Interpolation;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  /// Missing when the region has too few rows (or a constant target).
  std::optional<double> r2;
  std::optional<double> mae;
};

struct ScatterPoint {
  std::uint64_t seed = 0;
  std::string id;
  double y_true = 0.0;
  double y_pred = 0.0;
  double decision = 0.0;
};

struct DecisionRecord {
  std::uint64_t seed = 0;
  std::string id;
  double decision = 0.0;
  std::string region;
};

struct LogsRunResult {
  PreprocessReport preprocess_report;
  std::vector<std::string> features;
  std::vector<RegionCounts> counts;
  std::vector<SeedMetrics> per_seed;
  std::vector<TrialSummary> summaries;
  /// Extrapolation-region predictions per method name.
  std::map<std::string, std::vector<ScatterPoint>> scatter;
  std::vector<DecisionRecord> decisions;
};

/// Runs the protocol on an in-memory dataset. Neither preprocessing column
/// selection nor the novelty detector reads test targets.
LogsRunResult run_logs_pipeline(const Dataset& data, const LogsRunConfig& cfg);

/// Loads cfg.descriptor_csv, runs the protocol and writes region_counts.csv,
/// summary.csv, per_seed.csv, decisions.tsv, scatter_<method>.tsv and
/// run.json into out_dir.
LogsRunResult run_logs_pipeline(const LogsRunConfig& cfg, const std::string& out_dir);

void write_logs_reports(const LogsRunResult& result, const LogsRunConfig& cfg,
                        const std::string& out_dir);

}  // namespace stmt

#endif  // STMT_EXPERIMENTS_HPP
