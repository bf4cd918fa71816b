#include "despeckle/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace despeckle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// (x + 1)^lambda - 1) / lambda for x >= 0, with the lambda -> 0 limit handled by expm1.
double power_branch(double x, double lambda) {
  const double l = std::log1p(x);
  if (lambda == 0.0) return l;
  return std::expm1(lambda * l) / lambda;
}

double power_branch_inverse(double v, double lambda) {
  if (lambda == 0.0) return std::expm1(v);
  return std::expm1(std::log1p(lambda * v) / lambda);
}

}  // namespace

MomentStats moments(std::span<const double> samples) {
  const std::size_t n = samples.size();
  if (n < 4) throw ParameterError("moments need at least 4 samples, got " + std::to_string(n));
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : samples) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  const double variance = m2 / static_cast<double>(n - 1);
  if (!(variance > 0.0)) throw DegenerateInputError("moments: sample has zero variance");
  const double sd = std::sqrt(variance);
  MomentStats out;
  out.mean = mean;
  out.variance = variance;
  out.skewness = (m3 / static_cast<double>(n)) / (variance * sd);
  out.excess_kurtosis = (m4 / static_cast<double>(n)) / (variance * variance) - 3.0;
  return out;
}

double gaussianity_objective(const MomentStats& m) {
  return m.skewness * m.skewness + m.excess_kurtosis * m.excess_kurtosis;
}

double log_epsilon_for(const Raster& intensity, double factor) {
  if (!(factor > 0.0)) throw ParameterError("log epsilon factor must be positive");
  const double peak = intensity.max_value();
  return peak > 0.0 ? factor * peak : factor;
}

Raster log_forward(const Raster& y, double epsilon) {
  if (y.kind() != RasterKind::kIntensity) throw DomainError("log_forward expects an intensity raster");
  if (!(epsilon > 0.0)) throw ParameterError("log_forward: epsilon must be positive");
  Raster out(y.width(), y.height(), RasterKind::kTransformed);
  auto src = y.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (src[i] < 0.0) throw DomainError("log_forward: negative intensity");
    dst[i] = std::log(src[i] + epsilon);
  }
  return out;
}

Raster log_inverse(const Raster& v, double epsilon) {
  Raster out(v.width(), v.height(), RasterKind::kIntensity);
  auto src = v.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::exp(src[i]) - epsilon;
  return out;
}

double yeo_johnson(double x, double lambda) {
  if (x >= 0.0) return power_branch(x, lambda);
  // Mirror of the positive branch with exponent 2 - lambda.
  return -power_branch(-x, 2.0 - lambda);
}

double yeo_johnson_derivative(double x, double lambda) {
  if (x >= 0.0) return std::pow(1.0 + x, lambda - 1.0);
  return std::pow(1.0 - x, 1.0 - lambda);
}

YeoJohnsonRange yeo_johnson_range(double lambda) {
  YeoJohnsonRange r{-kInf, kInf};
  if (lambda < 0.0) r.hi = -1.0 / lambda;
  if (lambda > 2.0) r.lo = -1.0 / (lambda - 2.0);
  return r;
}

double yeo_johnson_inverse(double v, double lambda) {
  const auto range = yeo_johnson_range(lambda);
  if (!(v > range.lo && v < range.hi)) {
    throw DomainError("yeo_johnson_inverse: value " + std::to_string(v) + " outside the range of the transform for lambda " +
                      std::to_string(lambda));
  }
  if (v >= 0.0) return power_branch_inverse(v, lambda);
  return -power_branch_inverse(-v, 2.0 - lambda);
}

Raster yeo_johnson(const Raster& img, double lambda) {
  Raster out(img.width(), img.height(), RasterKind::kTransformed);
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = yeo_johnson(src[i], lambda);
  return out;
}

Raster yeo_johnson_inverse(const Raster& img, double lambda) {
  Raster out(img.width(), img.height(), RasterKind::kTransformed);
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = yeo_johnson_inverse(src[i], lambda);
  return out;
}

std::vector<double> lambda_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ParameterError("lambda grid needs lo <= hi and step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + static_cast<double>(i) * step;
  return grid;
}

LambdaSelection select_lambda(std::span<const double> samples, std::span<const double> grid) {
  if (samples.size() < 100) {
    throw ParameterError("select_lambda needs at least 100 samples, got " + std::to_string(samples.size()));
  }
  if (grid.empty()) throw ParameterError("select_lambda: empty lambda grid");

  // Sorted copy: the objective then does not depend on input order, bit for bit.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == sorted.back()) throw DegenerateInputError("select_lambda: constant sample");

  std::vector<double> transformed(sorted.size());
  LambdaSelection best{0.0, kInf};
  bool found = false;
  for (double lambda : grid) {
    for (std::size_t i = 0; i < sorted.size(); ++i) transformed[i] = yeo_johnson(sorted[i], lambda);
    double j;
    try {
      j = gaussianity_objective(moments(transformed));
    } catch (const DegenerateInputError&) {
      continue;
    }
    if (!std::isfinite(j)) continue;
    const bool better = !found || j < best.objective ||
                        (j == best.objective && std::abs(lambda - 1.0) < std::abs(best.lambda - 1.0));
    if (better) {
      best = {lambda, j};
      found = true;
    }
  }
  if (!found) throw DegenerateInputError("select_lambda: no grid value gives finite moments");
  return best;
}

}  // namespace despeckle
