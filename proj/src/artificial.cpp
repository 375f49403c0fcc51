#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stmt/experiments.hpp"
#include "stmt/random.hpp"
#include "stmt/report_io.hpp"
#include "stmt/serialization.hpp"

namespace stmt {

namespace {

constexpr std::size_t kGrid1d = 500;
constexpr std::size_t kGrid2dSide = 60;

struct Domain {
  double lo;
  double hi;
  double width() const { return hi - lo; }
};

Domain domain_of(ArtificialKind kind) {
  switch (kind) {
    case ArtificialKind::Linear1d:
    case ArtificialKind::Discontinuous1d:
      return {0.0, 10.0};
    case ArtificialKind::Nonlinear1d:
      return {0.0, 4.0 * std::numbers::pi};
    case ArtificialKind::BivariateQuadratic:
      return {-3.0, 3.0};
  }
  throw std::logic_error("unknown ArtificialKind");
}

std::size_t dimension_of(ArtificialKind kind) {
  return kind == ArtificialKind::BivariateQuadratic ? 2 : 1;
}

bool in_gap(ArtificialKind kind, double x) {
  if (kind != ArtificialKind::Discontinuous1d) return false;
  const Domain d = domain_of(kind);
  return x > d.lo + d.width() / 3.0 && x < d.lo + 2.0 * d.width() / 3.0;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

}  // namespace

std::string to_string(ArtificialKind kind) {
  switch (kind) {
    case ArtificialKind::Linear1d:
      return "linear1d";
    case ArtificialKind::Nonlinear1d:
      return "nonlinear1d";
    case ArtificialKind::Discontinuous1d:
      return "discontinuous1d";
    case ArtificialKind::BivariateQuadratic:
      return "bivariate_quadratic";
  }
  throw std::logic_error("unknown ArtificialKind");
}

ArtificialKind artificial_kind_from_string(const std::string& name) {
  for (auto kind : {ArtificialKind::Linear1d, ArtificialKind::Nonlinear1d,
                    ArtificialKind::Discontinuous1d, ArtificialKind::BivariateQuadratic}) {
    if (to_string(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown artificial dataset '" + name +
                              "' (expected linear1d, nonlinear1d, discontinuous1d or "
                              "bivariate_quadratic)");
}

double default_noise(ArtificialKind kind) {
  return kind == ArtificialKind::BivariateQuadratic ? 0.3 : 0.0;
}

std::string to_string(GridRegion region) {
  switch (region) {
    case GridRegion::Interpolation:
      return "interpolation";
    case GridRegion::Gap:
      return "gap";
    case GridRegion::Extrapolation:
      return "extrapolation";
  }
  throw std::logic_error("unknown GridRegion");
}

double artificial_truth(ArtificialKind kind, std::span<const double> x) {
  switch (kind) {
    case ArtificialKind::Linear1d:
    case ArtificialKind::Discontinuous1d:
      return 2.0 * x[0] + 1.0;
    case ArtificialKind::Nonlinear1d:
      return std::sin(x[0]) + 0.5 * x[0];
    case ArtificialKind::BivariateQuadratic:
      return x[0] * x[0] + x[1] * x[1];
  }
  throw std::logic_error("unknown ArtificialKind");
}

ArtificialData gen_artificial(const ArtificialSpec& spec) {
  if (spec.n_train < 1) throw std::invalid_argument("gen_artificial: n_train must be >= 1");
  if (!(spec.noise_sigma >= 0.0)) throw std::invalid_argument("gen_artificial: noise_sigma < 0");
  const Domain dom = domain_of(spec.kind);
  const std::size_t dim = dimension_of(spec.kind);
  Rng rng(spec.seed);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.n_train), static_cast<Eigen::Index>(dim));
  if (dim == 1) {
    std::vector<double> xs(spec.n_train);
    for (auto& v : xs) {
      if (spec.kind == ArtificialKind::Discontinuous1d) {
        // Uniform over the outer two thirds.
        const double u = rng.uniform(0.0, 2.0 * dom.width() / 3.0);
        v = u < dom.width() / 3.0 ? dom.lo + u : dom.lo + u + dom.width() / 3.0;
      } else {
        v = rng.uniform(dom.lo, dom.hi);
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t i = 0; i < xs.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = xs[i];
  } else {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.uniform(dom.lo, dom.hi);
    }
  }
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd row = x.row(i);
    y(i) = artificial_truth(spec.kind, std::span<const double>(row.data(), row.size()));
    if (spec.noise_sigma > 0.0) y(i) += rng.normal(0.0, spec.noise_sigma);
  }

  const std::vector<std::string> names =
      dim == 1 ? std::vector<std::string>{"x"} : std::vector<std::string>{"x1", "x2"};
  ArtificialData out;
  out.train = Dataset(names, std::move(x), std::move(y));

  const auto axis = linspace(dom.lo - dom.width() / 2.0, dom.hi + dom.width() / 2.0,
                             dim == 1 ? kGrid1d : kGrid2dSide);
  const std::size_t n_grid = dim == 1 ? axis.size() : axis.size() * axis.size();
  Eigen::MatrixXd gx(static_cast<Eigen::Index>(n_grid), static_cast<Eigen::Index>(dim));
  Eigen::VectorXd gy(static_cast<Eigen::Index>(n_grid));
  auto inside = [&](double v) { return v >= dom.lo && v <= dom.hi; };
  for (std::size_t g = 0; g < n_grid; ++g) {
    const auto r = static_cast<Eigen::Index>(g);
    if (dim == 1) {
      gx(r, 0) = axis[g];
    } else {
      gx(r, 0) = axis[g / axis.size()];
      gx(r, 1) = axis[g % axis.size()];
    }
    const Eigen::RowVectorXd row = gx.row(r);
    const std::span<const double> point(row.data(), row.size());
    gy(r) = artificial_truth(spec.kind, point);

    bool all_inside = true;
    bool none_inside = true;
    for (double v : point) {
      all_inside = all_inside && inside(v);
      none_inside = none_inside && !inside(v);
    }
    if (!all_inside) {
      out.grid_regions.push_back(GridRegion::Extrapolation);
    } else if (in_gap(spec.kind, point[0])) {
      out.grid_regions.push_back(GridRegion::Gap);
    } else {
      out.grid_regions.push_back(GridRegion::Interpolation);
    }
    out.grid_corner.push_back(none_inside);
  }
  out.grid = Dataset(names, std::move(gx), std::move(gy));
  return out;
}

std::vector<CurveSummary> run_artificial(const ArtificialSpec& spec,
                                         const ArtificialRunOptions& options,
                                         const std::string& out_dir) {
  if (options.methods.empty()) throw std::invalid_argument("run_artificial: no methods");
  const ArtificialData data = gen_artificial(spec);
  const std::size_t dim = data.train.n_features();

  {
    std::ostringstream train;
    for (const auto& name : data.train.feature_names()) train << name << '\t';
    train << "y\n";
    for (std::size_t r = 0; r < data.train.n_rows(); ++r) {
      for (std::size_t j = 0; j < dim; ++j) train << format_real(data.train.x(r, j)) << '\t';
      train << format_real(data.train.y(r)) << '\n';
    }
    write_file_atomic(out_dir + "/train.tsv", train.str());
  }

  struct Job {
    Method method;
    std::optional<double> k;
  };
  std::vector<Job> jobs;
  for (Method m : options.methods) {
    if (m == Method::STMT) {
      if (options.k_values.empty()) throw std::invalid_argument("run_artificial: no k values");
      for (double k : options.k_values) jobs.push_back({m, k});
    } else {
      jobs.push_back({m, std::nullopt});
    }
  }

  std::vector<CurveSummary> summaries;
  nlohmann::json curves = nlohmann::json::array();
  for (const auto& job : jobs) {
    MethodSettings settings = options.settings;
    if (job.k) settings.k = *job.k;
    if (!settings.min_leaf && options.dimension_min_leaf) {
      settings.min_leaf = min_leaf::Absolute{dim + 1};
    }
    const Regressor model = fit_method(job.method, data.train, settings);
    const Eigen::VectorXd pred = model.predict(data.grid.x(), settings.n_threads);

    CurveSummary summary;
    summary.method = job.method;
    summary.k = job.k;
    summary.name = to_string(job.method);
    if (job.k) {
      std::ostringstream name;
      name << "STMT_k" << format_real(*job.k);
      summary.name = name.str();
    }
    summary.curve_file = "curve_" + summary.name + ".tsv";

    std::ostringstream curve;
    for (const auto& name : data.grid.feature_names()) curve << name << '\t';
    curve << "y_true\ty_pred\tregion\n";
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_region;
    for (std::size_t r = 0; r < data.grid.n_rows(); ++r) {
      for (std::size_t j = 0; j < dim; ++j) curve << format_real(data.grid.x(r, j)) << '\t';
      const double truth = data.grid.y(r);
      const double p = pred(static_cast<Eigen::Index>(r));
      const std::string region = to_string(data.grid_regions[r]);
      curve << format_real(truth) << '\t' << format_real(p) << '\t' << region << '\n';
      by_region[region].first.push_back(truth);
      by_region[region].second.push_back(p);
      if (dim > 1 && data.grid_corner[r]) {
        by_region["corner"].first.push_back(truth);
        by_region["corner"].second.push_back(p);
      }
    }
    write_file_atomic(out_dir + "/" + summary.curve_file, curve.str());

    nlohmann::json entry = {{"name", summary.name},
                            {"method", to_string(job.method)},
                            {"curve_file", summary.curve_file}};
    if (job.k) entry["k"] = *job.k;
    for (const auto& [region, values] : by_region) {
      summary.mae[region] = mae(values.first, values.second);
      entry["mae"][region] = summary.mae[region];
      if (values.first.size() >= 2) {
        try {
          summary.r2[region] = r2(values.first, values.second);
          entry["r2"][region] = summary.r2[region];
        } catch (const std::invalid_argument&) {
          // Constant truth over the region: R2 undefined.
        }
      }
    }
    curves.push_back(std::move(entry));
    summaries.push_back(std::move(summary));
  }

  nlohmann::json doc = {{"dataset", to_string(spec.kind)},
                        {"n_train", spec.n_train},
                        {"noise_sigma", spec.noise_sigma},
                        {"seed", spec.seed},
                        {"n_estimators", options.settings.n_estimators},
                        {"curves", std::move(curves)}};
  write_file_atomic(out_dir + "/summary.json", doc.dump(2) + "\n");
  return summaries;
}

}  // namespace stmt
