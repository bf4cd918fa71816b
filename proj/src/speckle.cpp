#include "despeckle/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "despeckle/rng.hpp"

namespace despeckle {

namespace {

// Marsaglia-Tsang squeeze/rejection for shape >= 1 with unit scale.
double gamma_unit_scale(Rng& rng, double shape) {
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with U^(1/shape).
    const double g = gamma_unit_scale(rng, shape + 1.0);
    return g * std::pow(rng.uniform_open(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double median_in_place(std::vector<double>& v) {
  const std::size_t n = v.size();
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

}  // namespace

Looks::Looks(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ParameterError("number of looks must be positive and finite, got " + std::to_string(value));
  }
}

std::vector<double> sample_gamma_noise(Looks looks, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ParameterError("sample_gamma_noise: n_samples must be >= 1");
  Rng rng(seed);
  const double shape = looks.value();
  const double scale = 1.0 / shape;
  std::vector<double> out(n_samples);
  for (auto& v : out) v = gamma_unit_scale(rng, shape) * scale;
  return out;
}

Raster apply_speckle(const Raster& clean, Looks looks, std::uint64_t seed) {
  if (clean.kind() != RasterKind::kIntensity) throw DomainError("apply_speckle expects an intensity raster");
  clean.check_intensity();
  const auto noise = sample_gamma_noise(looks, clean.size(), seed);
  Raster out(clean.width(), clean.height(), RasterKind::kIntensity);
  auto src = clean.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] * noise[i];
  return out;
}

std::vector<double> estimate_patch_sigma(const PatchGroup& group) {
  const auto k = static_cast<Eigen::Index>(group.stack_count());
  if (k < 2) {
    throw InsufficientGroupError("estimate_patch_sigma needs at least 2 patches, got " + std::to_string(k));
  }
  const Eigen::Index n = group.patches.rows();

  Eigen::VectorXd center(n);
  std::vector<double> scratch(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) scratch[static_cast<std::size_t>(j)] = group.patches(i, j);
    center(i) = median_in_place(scratch);
  }

  std::vector<double> sigmas(static_cast<std::size_t>(k));
  std::vector<double> residual(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) residual[static_cast<std::size_t>(i)] = group.patches(i, j) - center(i);
    const double med = median_in_place(residual);
    for (auto& r : residual) r = std::abs(r - med);
    const double mad = median_in_place(residual);
    sigmas[static_cast<std::size_t>(j)] = std::max(kMadToSigma * mad, kSigmaFloor);
  }
  return sigmas;
}

}  // namespace despeckle
