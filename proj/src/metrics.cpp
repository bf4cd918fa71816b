#include "despeckle/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace despeckle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSsimRadius = 5;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr std::size_t kSqiTile = 8;
constexpr double kEpdFloor = 1e-6;

std::array<double, 2 * kSsimRadius + 1> gaussian_taps() {
  std::array<double, 2 * kSsimRadius + 1> taps{};
  double sum = 0.0;
  for (int i = -kSsimRadius; i <= kSsimRadius; ++i) {
    const double v = std::exp(-(i * i) / (2.0 * kSsimSigma * kSsimSigma));
    taps[static_cast<std::size_t>(i + kSsimRadius)] = v;
    sum += v;
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

// Valid-mode separable filtering: output is (h - 10) x (w - 10).
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t w, std::size_t h,
                                 const std::array<double, 2 * kSsimRadius + 1>& taps) {
  const std::size_t n = taps.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += taps[t] * src[r * w + c + t];
      rows[r * ow + c] = acc;
    }
  }
  std::vector<double> out(oh * ow);
  for (std::size_t r = 0; r < oh; ++r) {
    for (std::size_t c = 0; c < ow; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) acc += taps[t] * rows[(r + t) * ow + c];
      out[r * ow + c] = acc;
    }
  }
  return out;
}

void check_rect(const Raster& img, const Rect& rect) {
  if (rect.height == 0 || rect.width == 0 || rect.row + rect.height > img.height() ||
      rect.col + rect.width > img.width()) {
    throw SizeError("region (" + std::to_string(rect.row) + ", " + std::to_string(rect.col) + ", " +
                    std::to_string(rect.height) + ", " + std::to_string(rect.width) + ") is outside the image");
  }
}

}  // namespace

RegionSpec parse_region_spec(std::istream& in) {
  RegionSpec spec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long v[4];
    int got = 0;
    while (got < 4 && fields >> v[got]) ++got;
    if (got == 0 && fields.eof()) continue;
    std::string extra;
    if (got != 4 || (fields >> extra) || v[0] < 0 || v[1] < 0 || v[2] < 0 || v[3] < 0) {
      throw IoError("region spec line " + std::to_string(line_no) + ": expected `row col height width`");
    }
    spec.rectangles.push_back({static_cast<std::size_t>(v[0]), static_cast<std::size_t>(v[1]),
                               static_cast<std::size_t>(v[2]), static_cast<std::size_t>(v[3])});
  }
  return spec;
}

RegionSpec read_region_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open region spec " + path);
  return parse_region_spec(in);
}

double psnr(const Raster& ref, const Raster& test, double peak) {
  require_same_shape(ref, test, "psnr");
  if (!(peak > 0.0)) throw ParameterError("psnr: peak must be positive");
  auto a = ref.pixels();
  auto b = test.pixels();
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sse += d * d;
  }
  if (sse == 0.0) return kInf;
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double psnr_capped(const Raster& ref, const Raster& test, double peak) {
  return std::min(psnr(ref, test, peak), kPsnrCap);
}

double ssim(const Raster& ref, const Raster& test, double peak) {
  require_same_shape(ref, test, "ssim");
  if (!(peak > 0.0)) throw ParameterError("ssim: peak must be positive");
  const std::size_t w = ref.width();
  const std::size_t h = ref.height();
  constexpr std::size_t kWin = 2 * kSsimRadius + 1;
  if (w < kWin || h < kWin) throw SizeError("ssim needs images of at least 11x11 pixels");

  const auto taps = gaussian_taps();
  auto x = ref.pixels();
  auto y = test.pixels();
  std::vector<double> xs(x.begin(), x.end()), ys(y.begin(), y.end());
  std::vector<double> xx(w * h), yy(w * h), xy(w * h);
  for (std::size_t i = 0; i < w * h; ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(xs, w, h, taps);
  const auto mu_y = filter_valid(ys, w, h, taps);
  const auto e_xx = filter_valid(xx, w, h, taps);
  const auto e_yy = filter_valid(yy, w, h, taps);
  const auto e_xy = filter_valid(xy, w, h, taps);

  const double c1 = (kSsimK1 * peak) * (kSsimK1 * peak);
  const double c2 = (kSsimK2 * peak) * (kSsimK2 * peak);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cxy = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

double enl(const Raster& img, const RegionSpec& region) {
  if (region.rectangles.empty()) throw ParameterError("enl: empty region specification");
  std::vector<unsigned char> mask(img.size(), 0);
  for (const auto& rect : region.rectangles) {
    check_rect(img, rect);
    for (std::size_t r = rect.row; r < rect.row + rect.height; ++r) {
      for (std::size_t c = rect.col; c < rect.col + rect.width; ++c) mask[r * img.width() + c] = 1;
    }
  }
  auto px = img.pixels();
  std::size_t n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (mask[i]) {
      sum += px[i];
      ++n;
    }
  }
  if (n < 64) throw ParameterError("enl: region must cover at least 64 pixels, got " + std::to_string(n));
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < px.size(); ++i) {
    if (mask[i]) ss += (px[i] - mean) * (px[i] - mean);
  }
  const double variance = ss / static_cast<double>(n);
  if (variance == 0.0) return kInf;
  return mean * mean / variance;
}

double epi(const Raster& test, const Raster& noisy) {
  require_same_shape(test, noisy, "epi");
  const std::size_t w = test.width();
  const std::size_t h = test.height();
  if (w < 3 || h < 3) throw SizeError("epi needs images of at least 3x3 pixels");
  const auto laplacian_energy = [&](const Raster& img) {
    double total = 0.0;
    for (std::size_t r = 1; r + 1 < h; ++r) {
      for (std::size_t c = 1; c + 1 < w; ++c) {
        double neighbours = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr != 0 || dc != 0) neighbours += img(r + dr, c + dc);
          }
        }
        total += std::abs(8.0 * img(r, c) - neighbours);
      }
    }
    return total;
  };
  const double num = laplacian_energy(test);
  const double den = laplacian_energy(noisy);
  if (den == 0.0) return num == 0.0 ? 1.0 : kInf;
  return num / den;
}

double epd_roa(const Raster& test, const Raster& noisy, Direction direction) {
  require_same_shape(test, noisy, "epd_roa");
  const std::size_t w = test.width();
  const std::size_t h = test.height();
  const std::size_t dr = direction == Direction::kVertical ? 1 : 0;
  const std::size_t dc = direction == Direction::kHorizontal ? 1 : 0;
  const auto ratio_sum = [&](const Raster& img) {
    double total = 0.0;
    for (std::size_t r = 0; r + dr < h; ++r) {
      for (std::size_t c = 0; c + dc < w; ++c) {
        const double denom = std::max(std::abs(img(r + dr, c + dc)), kEpdFloor);
        total += std::abs(img(r, c) / denom);
      }
    }
    return total;
  };
  const double num = ratio_sum(test);
  const double den = ratio_sum(noisy);
  if (den == 0.0) return num == 0.0 ? 1.0 : kInf;
  return num / den;
}

double sqi(const Raster& test, const Raster& noisy, double peak) {
  require_same_shape(test, noisy, "sqi");
  if (!(peak > 0.0)) throw ParameterError("sqi: peak must be positive");
  const double eps = (0.01 * peak) * (0.01 * peak);
  const std::size_t w = test.width();
  const std::size_t h = test.height();
  double total = 0.0;
  std::size_t tiles = 0;
  for (std::size_t r0 = 0; r0 < h; r0 += kSqiTile) {
    for (std::size_t c0 = 0; c0 < w; c0 += kSqiTile) {
      const std::size_t r1 = std::min(h, r0 + kSqiTile);
      const std::size_t c1 = std::min(w, c0 + kSqiTile);
      const double n = static_cast<double>((r1 - r0) * (c1 - c0));
      double st = 0.0, sn = 0.0;
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
          st += test(r, c);
          sn += noisy(r, c);
        }
      }
      const double mt = st / n;
      const double mn = sn / n;
      double vt = 0.0, vn = 0.0, cov = 0.0;
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) {
          const double a = test(r, c) - mt;
          const double b = noisy(r, c) - mn;
          vt += a * a;
          vn += b * b;
          cov += a * b;
        }
      }
      vt /= n;
      vn /= n;
      cov /= n;
      total += ((2.0 * mt * mn + eps) * (2.0 * cov + eps)) / ((mt * mt + mn * mn + eps) * (vt + vn + eps));
      ++tiles;
    }
  }
  return total / static_cast<double>(tiles);
}

double mean_intensity(const Raster& img) {
  double sum = 0.0;
  for (double v : img.pixels()) sum += v;
  return sum / static_cast<double>(img.size());
}

MetricReport evaluate(const EvaluationInputs& in) {
  if (in.test == nullptr) throw ParameterError("evaluate: a test image is required");
  const Raster& test = *in.test;
  MetricReport report;
  if (in.reference != nullptr) {
    report.psnr = psnr_capped(*in.reference, test, in.peak);
    report.ssim = ssim(*in.reference, test, in.peak);
  }
  if (in.noisy != nullptr) {
    report.epi = epi(test, *in.noisy);
    report.epd_h = epd_roa(test, *in.noisy, Direction::kHorizontal);
    report.epd_v = epd_roa(test, *in.noisy, Direction::kVertical);
    report.sqi = sqi(test, *in.noisy, in.peak);
  }
  if (in.regions != nullptr) report.enl = enl(test, *in.regions);
  report.mean_intensity = mean_intensity(test);
  return report;
}

}  // namespace despeckle
