#pragma once

#include <span>
#include <vector>

#include "despeckle/raster.hpp"

namespace despeckle {

/// Standardized moments of a sample. Variance is the unbiased (n - 1)
/// estimator; skewness and excess kurtosis are the mean third and fourth
/// central moments normalized by that standard deviation.
struct MomentStats {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

/// Throws ParameterError for fewer than 4 samples and DegenerateInputError for zero variance.
MomentStats moments(std::span<const double> samples);

/// Gaussianity penalty skewness^2 + excess_kurtosis^2.
double gaussianity_objective(const MomentStats& m);

// ---- log stage ------------------------------------------------------------

/// Offset added before the logarithm: factor * max(img), or factor when the image is all zero.
double log_epsilon_for(const Raster& intensity, double factor = 1e-3);

/// out = ln(y + epsilon); marks the result as transformed.
Raster log_forward(const Raster& y, double epsilon);

/// out = exp(v) - epsilon; marks the result as intensity. Negative results are left as-is.
Raster log_inverse(const Raster& v, double epsilon);

// ---- Yeo-Johnson ------------------------------------------------------------

double yeo_johnson(double x, double lambda);

/// d/dx yeo_johnson(x, lambda); strictly positive for every x and lambda.
double yeo_johnson_derivative(double x, double lambda);

/// Exact algebraic inverse of yeo_johnson. Throws DomainError when `v`
/// is outside the range of the forward map for this lambda.
double yeo_johnson_inverse(double v, double lambda);

/// Open interval (lo, hi) of values attained by yeo_johnson(., lambda);
/// infinite ends are reported as +-infinity.
struct YeoJohnsonRange {
  double lo;
  double hi;
  bool contains(double v) const noexcept { return v > lo && v < hi; }
};
YeoJohnsonRange yeo_johnson_range(double lambda);

Raster yeo_johnson(const Raster& img, double lambda);
Raster yeo_johnson_inverse(const Raster& img, double lambda);

/// Evenly spaced candidate lambdas from `lo` to `hi` inclusive.
std::vector<double> lambda_grid(double lo, double hi, double step);

struct LambdaSelection {
  double lambda = 1.0;
  double objective = 0.0;
};

/// Exhaustive search for the lambda minimizing skewness^2 + excess_kurtosis^2
/// of the transformed samples. Ties go to the candidate closest to 1.
/// Requires at least 100 samples and a non-empty grid.
LambdaSelection select_lambda(std::span<const double> samples, std::span<const double> grid);

}  // namespace despeckle
