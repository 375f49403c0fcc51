#ifndef STMT_METRICS_HPP
#define STMT_METRICS_HPP

#include <span>
#include <string>
#include <vector>

namespace stmt {

/// Coefficient of determination 1 - SS_res / SS_tot. Throws
/// std::invalid_argument for mismatched lengths, fewer than 2 values or a
/// constant y_true.
double r2(std::span<const double> y_true, std::span<const double> y_pred);

/// Mean absolute error. Throws std::invalid_argument for mismatched or
/// empty inputs.
double mae(std::span<const double> y_true, std::span<const double> y_pred);

/// Two-sided 97.5% quantile of Student's t with `dof` degrees of freedom.
/// Tabulated for 1..30; larger dof use the Cornish-Fisher expansion about
/// the normal quantile.
double t_quantile_975(unsigned dof);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
};

/// Mean and 95% t half-width t(0.975, n-1) * s / sqrt(n), s with n-1
/// denominator. Throws std::invalid_argument for n < 2.
ConfidenceInterval ci95(std::span<const double> values);

enum class Region { Interpolation, Extrapolation };

std::string to_string(Region region);

/// Per-method, per-region summary over repeated trials.
struct TrialSummary {
  std::string method;
  Region region = Region::Interpolation;
  std::vector<double> r2_per_seed;
  std::vector<double> mae_per_seed;
  double r2_mean = 0.0;
  double r2_ci_half = 0.0;
  double mae_mean = 0.0;
  double mae_ci_half = 0.0;
};

/// Fills the mean / half-width fields from the per-seed lists. With a single
/// trial the half-widths are 0.
TrialSummary summarize(std::string method, Region region, std::vector<double> r2_per_seed,
                       std::vector<double> mae_per_seed);

}  // namespace stmt

#endif  // STMT_METRICS_HPP
