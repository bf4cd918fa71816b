#include "despeckle/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace despeckle {

Raster::Raster(std::size_t width, std::size_t height, RasterKind kind, double fill)
    : width_(width), height_(height), data_(width * height, fill), kind_(kind) {
  if (width == 0 || height == 0) throw SizeError("raster dimensions must be at least 1x1");
}

Raster::Raster(std::size_t width, std::size_t height, std::vector<double> data, RasterKind kind)
    : width_(width), height_(height), data_(std::move(data)), kind_(kind) {
  if (width == 0 || height == 0) throw SizeError("raster dimensions must be at least 1x1");
  if (data_.size() != width * height) {
    throw SizeError("raster data length " + std::to_string(data_.size()) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

double Raster::min_value() const {
  if (data_.empty()) throw SizeError("min of empty raster");
  return *std::min_element(data_.begin(), data_.end());
}

double Raster::max_value() const {
  if (data_.empty()) throw SizeError("max of empty raster");
  return *std::max_element(data_.begin(), data_.end());
}

void Raster::check_intensity() const {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    const double v = data_[i];
    if (!std::isfinite(v) || v < 0.0) {
      throw DomainError("intensity raster has invalid value " + std::to_string(v) + " at pixel (" +
                        std::to_string(i / width_) + ", " + std::to_string(i % width_) + ")");
    }
  }
}

void require_same_shape(const Raster& a, const Raster& b, const char* what) {
  if (!a.same_shape(b)) {
    throw SizeError(std::string(what) + ": dimension mismatch " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                    std::to_string(b.height()));
  }
}

}  // namespace despeckle
