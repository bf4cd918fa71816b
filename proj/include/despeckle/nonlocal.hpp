#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "despeckle/patch_group.hpp"
#include "despeckle/raster.hpp"

namespace despeckle {

/// Top-left corners of reference patches on a regular grid with step
/// `stride`. The last valid row and column are always included so every
/// pixel is covered by at least one reference patch.
std::vector<Coord> extract_references(const Raster& img, std::size_t patch_size, std::size_t stride);

/// Squared Euclidean distance between the patches at `a` and `b`.
double patch_distance(const Raster& img, Coord a, Coord b, std::size_t patch_size);

/// Candidate top-left corners whose patch lies inside the `window` x `window`
/// square centred on the reference patch (clipped to the image), in row-major order.
std::vector<Coord> search_candidates(const Raster& img, Coord ref, std::size_t patch_size, std::size_t window);

/// Groups the k candidates nearest to the reference patch. The reference
/// is always column 0; the rest follow by ascending distance, ties broken by
/// row-major candidate order. When the window holds fewer than k candidates
/// the group is padded with copies of the reference.
PatchGroup block_match(const Raster& img, Coord ref, std::size_t patch_size, std::size_t stack_count,
                       std::size_t window);

/// Denoised patches for one group, columns aligned with group.coords.
struct GroupEstimate {
  std::size_t patch_size = 0;
  std::vector<Coord> coords;
  Eigen::MatrixXd patches;
};

struct CoverageReport {
  std::size_t uncovered_pixels = 0;
  std::size_t contributions = 0;
};

struct Aggregation {
  Raster image;
  CoverageReport coverage;
};

/// Averages every patch contribution into the output with unit weight per
/// contribution. Pixels no patch covers are copied from `fallback`.
/// Contributions are summed in canonical (reference coordinate) order, so the
/// result does not depend on the order of `estimates`.
Aggregation aggregate(std::span<const GroupEstimate> estimates, const Raster& fallback);

}  // namespace despeckle
