#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "despeckle/errors.hpp"

namespace despeckle {

enum class RasterKind { kIntensity, kTransformed };

/// Top-left pixel position of a patch or rectangle.
struct Coord {
  std::size_t row = 0;
  std::size_t col = 0;

  friend bool operator==(const Coord&, const Coord&) = default;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

/// Row-major 2-D real image. Intensity rasters hold non-negative values;
/// transformed rasters (log / Yeo-Johnson domain) may hold any finite value.
class Raster {
 public:
  Raster() = default;
  Raster(std::size_t width, std::size_t height, RasterKind kind = RasterKind::kIntensity, double fill = 0.0);
  Raster(std::size_t width, std::size_t height, std::vector<double> data,
         RasterKind kind = RasterKind::kIntensity);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  RasterKind kind() const noexcept { return kind_; }
  void set_kind(RasterKind kind) noexcept { kind_ = kind; }

  double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * width_ + col]; }
  double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col]; }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }

  double min_value() const;
  double max_value() const;

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Throws DomainError unless every value is a valid intensity (finite, >= 0).
  void check_intensity() const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> data_;
  RasterKind kind_ = RasterKind::kIntensity;
};

/// Throws SizeError unless both rasters have the same dimensions.
void require_same_shape(const Raster& a, const Raster& b, const char* what);

}  // namespace despeckle
