#include "stmt/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "stmt/report_io.hpp"
#include "stmt/random.hpp"

namespace stmt {

Dataset::Dataset(std::vector<std::string> feature_names, Eigen::MatrixXd x,
                 Eigen::VectorXd y, std::vector<std::string> row_ids)
    : feature_names_(std::move(feature_names)),
      x_(std::move(x)),
      y_(std::move(y)),
      row_ids_(std::move(row_ids)) {
  if (x_.rows() != y_.size()) {
    throw std::invalid_argument("Dataset: X has " + std::to_string(x_.rows()) +
                                " rows but y has " + std::to_string(y_.size()));
  }
  if (!row_ids_.empty() && row_ids_.size() != n_rows()) {
    throw std::invalid_argument("Dataset: row_ids length does not match row count");
  }
  if (feature_names_.size() != n_features()) {
    throw std::invalid_argument("Dataset: feature_names length does not match X columns");
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : feature_names_) {
    if (!seen.insert(name).second) {
      throw std::invalid_argument("Dataset: duplicate feature name '" + name + "'");
    }
  }
  if (!x_.allFinite() || !y_.allFinite()) {
    throw std::invalid_argument("Dataset: non-finite value");
  }
}

std::optional<std::size_t> Dataset::feature_index(const std::string& name) const {
  auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - feature_names_.begin());
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), x_.cols());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  std::vector<std::string> ids;
  if (has_row_ids()) ids.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_rows()) throw std::out_of_range("Dataset::select_rows: row index");
    const auto r = static_cast<Eigen::Index>(rows[i]);
    x.row(static_cast<Eigen::Index>(i)) = x_.row(r);
    y(static_cast<Eigen::Index>(i)) = y_(r);
    if (has_row_ids()) ids.push_back(row_ids_[rows[i]]);
  }
  return Dataset(feature_names_, std::move(x), std::move(y), std::move(ids));
}

Dataset Dataset::select_features(const std::vector<std::string>& names) const {
  Eigen::MatrixXd x(x_.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto idx = feature_index(names[j]);
    if (!idx) throw std::invalid_argument("unknown feature '" + names[j] + "'");
    x.col(static_cast<Eigen::Index>(j)) = x_.col(static_cast<Eigen::Index>(*idx));
  }
  return Dataset(names, std::move(x), y_, row_ids_);
}

namespace {

// RFC-4180 records: quoted fields may hold separators, doubled quotes and
// line breaks. Trailing CR is stripped from unquoted line ends.
std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw std::runtime_error("CSV: unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  return records;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double pearson_abs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double denom = std::sqrt((da * da).sum() * (db * db).sum());
  if (denom == 0.0) return 0.0;
  return std::min(1.0, std::abs((da * db).sum()) / denom);
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3);

  auto records = parse_csv_records(text);
  if (records.empty()) throw std::runtime_error("'" + path + "': missing header row");
  std::unordered_set<std::string> seen;
  for (const auto& name : records.front()) {
    if (!seen.insert(name).second) {
      throw std::runtime_error("'" + path + "': duplicate header name '" + name + "'");
    }
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != records.front().size()) {
      throw std::runtime_error("'" + path + "': row " + std::to_string(r) + " has " +
                               std::to_string(records[r].size()) + " fields, header has " +
                               std::to_string(records.front().size()));
    }
  }
  return records;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column,
                 const std::optional<std::string>& id_column) {
  const auto records = read_csv_file(path);
  const auto& header = records.front();
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto target_col = column_of(target_column);
  if (!target_col) {
    throw std::runtime_error("'" + path + "': target column '" + target_column +
                             "' not found in header");
  }
  std::optional<std::size_t> id_col;
  if (id_column) {
    id_col = column_of(*id_column);
    if (!id_col) {
      throw std::runtime_error("'" + path + "': id column '" + *id_column +
                               "' not found in header");
    }
  }

  std::vector<std::size_t> feature_cols;
  std::vector<std::string> feature_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == *target_col || (id_col && c == *id_col)) continue;
    feature_cols.push_back(c);
    feature_names.push_back(header[c]);
  }

  const std::size_t n = records.size() - 1;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n),
                    static_cast<Eigen::Index>(feature_cols.size()));
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  std::vector<std::string> ids;
  if (id_col) ids.reserve(n);

  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    const std::string row_label = "row " + std::to_string(r + 1);
    auto number = [&](std::size_t c) {
      auto v = parse_real(rec[c]);
      if (!v) {
        throw std::runtime_error("'" + path + "': non-numeric value '" + rec[c] +
                                 "' at " + row_label + ", column '" + header[c] + "'");
      }
      return *v;
    };
    y(static_cast<Eigen::Index>(r)) = number(*target_col);
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = number(feature_cols[j]);
    }
    if (id_col) ids.push_back(rec[*id_col]);
  }
  return Dataset(std::move(feature_names), std::move(x), std::move(y), std::move(ids));
}

std::pair<Eigen::MatrixXd, std::vector<std::string>> load_feature_columns(
    const std::string& path, const std::vector<std::string>& feature_names,
    const std::optional<std::string>& id_column) {
  const auto records = read_csv_file(path);
  const auto& header = records.front();
  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> cols;
  for (const auto& name : feature_names) {
    auto c = column_of(name);
    if (!c) throw std::runtime_error("'" + path + "': feature column '" + name + "' not found");
    cols.push_back(*c);
  }
  const auto id_col = id_column ? column_of(*id_column) : std::nullopt;

  const std::size_t n = records.size() - 1;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = records[r + 1];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      auto v = parse_real(rec[cols[j]]);
      if (!v) {
        throw std::runtime_error("'" + path + "': non-numeric value '" + rec[cols[j]] +
                                 "' at row " + std::to_string(r + 1) + ", column '" +
                                 header[cols[j]] + "'");
      }
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = *v;
    }
    if (id_col) ids.push_back(rec[*id_col]);
  }
  return {std::move(x), std::move(ids)};
}

void write_csv(const Dataset& d, const std::string& path, const std::string& target_column,
               const std::string& id_column) {
  std::ostringstream out;
  std::vector<std::string> header;
  if (d.has_row_ids()) header.push_back(id_column);
  header.insert(header.end(), d.feature_names().begin(), d.feature_names().end());
  header.push_back(target_column);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(header[i]);
  }
  out << '\n';
  for (std::size_t r = 0; r < d.n_rows(); ++r) {
    if (d.has_row_ids()) out << csv_escape(d.row_ids()[r]) << ',';
    for (std::size_t j = 0; j < d.n_features(); ++j) out << format_real(d.x(r, j)) << ',';
    out << format_real(d.y(r)) << '\n';
  }
  write_file_atomic(path, out.str());
}

std::pair<Dataset, PreprocessReport> preprocess(const Dataset& d,
                                                const PreprocessOptions& options) {
  if (d.empty()) throw std::invalid_argument("preprocess: empty dataset");
  if (!(options.corr_threshold > 0.0 && options.corr_threshold <= 1.0)) {
    throw std::invalid_argument("preprocess: corr_threshold must lie in (0, 1]");
  }
  PreprocessReport report;
  std::vector<std::size_t> kept;

  std::vector<std::string> patterns;
  for (const auto& p : options.name_patterns) patterns.push_back(lowercase(p));
  for (std::size_t j = 0; j < d.n_features(); ++j) {
    const std::string name = lowercase(d.feature_names()[j]);
    const bool matched = std::any_of(patterns.begin(), patterns.end(), [&](const auto& p) {
      return !p.empty() && name.find(p) != std::string::npos;
    });
    if (matched) {
      report.dropped_by_pattern.push_back(d.feature_names()[j]);
    } else {
      kept.push_back(j);
    }
  }

  std::vector<std::size_t> non_constant;
  for (std::size_t j : kept) {
    const auto col = d.x().col(static_cast<Eigen::Index>(j));
    if ((col.array() == col(0)).all()) {
      report.dropped_constant.push_back(d.feature_names()[j]);
    } else {
      non_constant.push_back(j);
    }
  }

  std::vector<bool> dropped(non_constant.size(), false);
  for (std::size_t a = 0; a < non_constant.size(); ++a) {
    if (dropped[a]) continue;
    const Eigen::VectorXd col_a = d.x().col(static_cast<Eigen::Index>(non_constant[a]));
    for (std::size_t b = a + 1; b < non_constant.size(); ++b) {
      if (dropped[b]) continue;
      const double r =
          pearson_abs(col_a, d.x().col(static_cast<Eigen::Index>(non_constant[b])));
      if (r >= options.corr_threshold) {
        dropped[b] = true;
        report.dropped_correlated.push_back(
            {d.feature_names()[non_constant[a]], d.feature_names()[non_constant[b]], r});
      }
    }
  }

  std::vector<std::string> names;
  for (std::size_t a = 0; a < non_constant.size(); ++a) {
    if (!dropped[a]) names.push_back(d.feature_names()[non_constant[a]]);
  }
  if (names.empty()) throw std::invalid_argument("preprocess: every feature column was removed");
  return {d.select_features(names), std::move(report)};
}

TrainTestSplit split_random(const Dataset& d, double train_fraction, std::uint64_t seed) {
  const std::size_t n = d.n_rows();
  if (n < 2) throw std::invalid_argument("split_random: need at least 2 rows");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_random: train_fraction must lie in (0, 1)");
  }
  const auto n_train = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * train_fraction * (1.0 + 1e-12)));
  if (n_train == 0 || n_train == n) {
    throw std::invalid_argument("split_random: split leaves one side empty");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.index(i + 1)]);

  TrainTestSplit split;
  split.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  split.train = d.select_rows(split.train_rows);
  split.test = d.select_rows(split.test_rows);
  return split;
}

}  // namespace stmt
