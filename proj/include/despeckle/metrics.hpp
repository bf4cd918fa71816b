#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "despeckle/raster.hpp"

namespace despeckle {

/// Rectangle in pixel units: top-left corner plus extent.
struct Rect {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Homogeneous (or edge) regions used by the no-reference metrics.
struct RegionSpec {
  std::vector<Rect> rectangles;
};

/// Parses `row col height width` lines; `#` starts a comment.
RegionSpec parse_region_spec(std::istream& in);
RegionSpec read_region_spec(const std::string& path);

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const Raster& ref, const Raster& test, double peak);

/// psnr() with +infinity replaced by the 99 dB reporting cap.
double psnr_capped(const Raster& ref, const Raster& test, double peak);

/// Mean SSIM over all valid 11x11 Gaussian windows (sigma 1.5, K1 0.01, K2 0.03).
double ssim(const Raster& ref, const Raster& test, double peak);

/// mean^2 / variance over the union of the region's pixels; +infinity for a flat region.
double enl(const Raster& img, const RegionSpec& region);

/// Ratio of summed absolute 3x3 Laplacian responses, test over noisy, borders excluded.
double epi(const Raster& test, const Raster& noisy);

enum class Direction { kHorizontal, kVertical };

/// Ratio-of-average edge preservation: sum |t(i)/t(i+1)| over sum |n(i)/n(i+1)|
/// along rows (horizontal) or columns (vertical), denominators floored at 1e-6.
double epd_roa(const Raster& test, const Raster& noisy, Direction direction);

/// Mean over 8x8 tiles of a regularized luminance/structure similarity between test and noisy.
double sqi(const Raster& test, const Raster& noisy, double peak);

double mean_intensity(const Raster& img);

/// Every field is optional; which ones are filled depends on the inputs available.
struct MetricReport {
  std::optional<double> psnr;
  std::optional<double> ssim;  // fraction in [-1, 1]; reports print it x100
  std::optional<double> enl;
  std::optional<double> epi;
  std::optional<double> epd_h;
  std::optional<double> epd_v;
  std::optional<double> sqi;
  std::optional<double> mean_intensity;
};

struct EvaluationInputs {
  const Raster* test = nullptr;
  const Raster* reference = nullptr;
  const Raster* noisy = nullptr;
  const RegionSpec* regions = nullptr;
  double peak = 255.0;
};

MetricReport evaluate(const EvaluationInputs& in);

}  // namespace despeckle
