#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "despeckle/raster.hpp"

namespace despeckle {

/// A stack of k similar p x p patches, stored as a p^2 x k matrix (one
/// row-major flattened patch per column). Column 0 is the reference patch.
struct PatchGroup {
  std::size_t patch_size = 0;
  Eigen::MatrixXd patches;
  std::vector<Coord> coords;
  std::vector<double> distances;  // squared Euclidean distance to the reference, per column
  std::vector<double> sigmas;     // per-patch noise scale; empty until estimated
  std::size_t padded = 0;         // trailing columns that repeat the reference

  std::size_t stack_count() const noexcept { return static_cast<std::size_t>(patches.cols()); }
  const Coord& reference() const { return coords.front(); }
};

/// Copies the p x p patch at `at` into a flattened row-major column vector.
Eigen::VectorXd read_patch(const Raster& img, Coord at, std::size_t patch_size);

}  // namespace despeckle
