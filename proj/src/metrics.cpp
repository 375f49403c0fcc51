#include "stmt/metrics.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stmt {

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, std::size_t min_size) {
  if (a.size() != b.size()) throw std::invalid_argument("metrics: length mismatch");
  if (a.size() < min_size) throw std::invalid_argument("metrics: too few values");
}

// t(0.975, dof) for dof = 1..30.
constexpr std::array<double, 30> kT975 = {
    12.706204736, 4.302652730, 3.182446305, 2.776445105, 2.570581836, 2.446911851,
    2.364624252,  2.306004135, 2.262157163, 2.228138852, 2.200985160, 2.178812830,
    2.160368656,  2.144786688, 2.131449546, 2.119905299, 2.109815578, 2.100922040,
    2.093024054,  2.085963447, 2.079613845, 2.073873068, 2.068657610, 2.063898562,
    2.059538553,  2.055529439, 2.051830516, 2.048407142, 2.045229642, 2.042272456,
};

}  // namespace

double r2(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, 2);
  const double mean = std::accumulate(y_true.begin(), y_true.end(), 0.0) /
                      static_cast<double>(y_true.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ss_res += (y_true[i] - y_pred[i]) * (y_true[i] - y_pred[i]);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  if (ss_tot == 0.0) throw std::invalid_argument("r2: y_true is constant");
  return 1.0 - ss_res / ss_tot;
}

double mae(std::span<const double> y_true, std::span<const double> y_pred) {
  check_pair(y_true, y_pred, 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) sum += std::abs(y_true[i] - y_pred[i]);
  return sum / static_cast<double>(y_true.size());
}

double t_quantile_975(unsigned dof) {
  if (dof == 0) throw std::invalid_argument("t_quantile_975: dof must be >= 1");
  if (dof <= kT975.size()) return kT975[dof - 1];
  const double z = 1.959963984540054;
  const double v = static_cast<double>(dof);
  const double z3 = z * z * z;
  const double z5 = z3 * z * z;
  const double z7 = z5 * z * z;
  const double z9 = z7 * z * z;
  return z + (z3 + z) / (4.0 * v) + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * v * v) +
         (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * v * v * v) +
         (79.0 * z9 + 776.0 * z7 + 1482.0 * z5 - 1920.0 * z3 - 945.0 * z) /
             (92160.0 * v * v * v * v);
}

ConfidenceInterval ci95(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("ci95: need at least 2 values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  return {mean, t_quantile_975(static_cast<unsigned>(values.size() - 1)) * sd / std::sqrt(n)};
}

std::string to_string(Region region) {
  return region == Region::Interpolation ? "interpolation" : "extrapolation";
}

TrialSummary summarize(std::string method, Region region, std::vector<double> r2_per_seed,
                       std::vector<double> mae_per_seed) {
  TrialSummary s;
  s.method = std::move(method);
  s.region = region;
  s.r2_per_seed = std::move(r2_per_seed);
  s.mae_per_seed = std::move(mae_per_seed);
  auto fill = [](const std::vector<double>& v, double& mean, double& half) {
    if (v.empty()) {
      mean = std::nan("");
      half = std::nan("");
    } else if (v.size() == 1) {
      mean = v.front();
      half = 0.0;
    } else {
      const auto ci = ci95(v);
      mean = ci.mean;
      half = ci.half_width;
    }
  };
  fill(s.r2_per_seed, s.r2_mean, s.r2_ci_half);
  fill(s.mae_per_seed, s.mae_mean, s.mae_ci_half);
  return s;
}

}  // namespace stmt
