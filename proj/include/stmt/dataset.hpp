#ifndef STMT_DATASET_HPP
#define STMT_DATASET_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stmt {

/// Tabular regression data: named feature columns, a target vector and
/// optional row identifiers. Immutable once constructed; the constructor
/// enforces shape, name uniqueness and finiteness.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> feature_names, Eigen::MatrixXd x,
          Eigen::VectorXd y, std::vector<std::string> row_ids = {});

  std::size_t n_rows() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(x_.cols()); }
  bool empty() const { return n_rows() == 0; }

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  bool has_row_ids() const { return !row_ids_.empty(); }

  double x(std::size_t row, std::size_t col) const {
    return x_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
  double y(std::size_t row) const { return y_(static_cast<Eigen::Index>(row)); }

  /// Index of a feature column by name, or nullopt.
  std::optional<std::size_t> feature_index(const std::string& name) const;

  /// New dataset holding the given rows, in the given order.
  Dataset select_rows(std::span<const std::size_t> rows) const;

  /// New dataset keeping only the named feature columns, in the given order.
  /// Throws std::invalid_argument when a name is unknown.
  Dataset select_features(const std::vector<std::string>& names) const;

 private:
  std::vector<std::string> feature_names_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  std::vector<std::string> row_ids_;
};

/// Columns removed by preprocess(), by reason.
struct PreprocessReport {
  struct CorrelatedDrop {
    std::string kept;
    std::string dropped;
    double abs_r;
  };
  std::vector<std::string> dropped_by_pattern;
  std::vector<std::string> dropped_constant;
  std::vector<CorrelatedDrop> dropped_correlated;

  std::size_t total_dropped() const {
    return dropped_by_pattern.size() + dropped_constant.size() +
           dropped_correlated.size();
  }
};

struct PreprocessOptions {
  double corr_threshold = 0.95;
  std::vector<std::string> name_patterns{"logp"};
};

/// Reads a header-first CSV. All columns other than the target and the
/// optional id column must be numeric; they become features in file order.
/// Throws std::runtime_error on I/O or parse errors, naming the 1-based data
/// row and the column.
Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::optional<std::string>& id_column = std::nullopt);

/// Reads the named numeric columns (in the given order) and, when present,
/// the id column. Other columns are ignored.
std::pair<Eigen::MatrixXd, std::vector<std::string>> load_feature_columns(
    const std::string& path, const std::vector<std::string>& feature_names,
    const std::optional<std::string>& id_column = std::nullopt);

/// Writes `d` as CSV: optional id column first, features, then the target.
/// Reals use the shortest representation that reads back bit-identically.
void write_csv(const Dataset& d, const std::string& path,
               const std::string& target_column = "y",
               const std::string& id_column = "id");

/// Removes, in order: columns whose name contains any pattern
/// (case-insensitive), zero-variance columns, and the later column of every
/// pair with |Pearson r| >= corr_threshold (pairs scanned in column order).
/// Throws std::invalid_argument if no column would remain.
std::pair<Dataset, PreprocessReport> preprocess(const Dataset& d,
                                                const PreprocessOptions& options = {});

struct TrainTestSplit {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Seeded shuffle split. Train size is floor(n * train_fraction), guarded
/// against representation error in the product (1290 * 0.7 -> 903).
TrainTestSplit split_random(const Dataset& d, double train_fraction,
                            std::uint64_t seed);

}  // namespace stmt

#endif  // STMT_DATASET_HPP
