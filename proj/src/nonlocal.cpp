#include "despeckle/nonlocal.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace despeckle {

namespace {

std::vector<std::size_t> grid_positions(std::size_t extent, std::size_t patch_size, std::size_t stride) {
  const std::size_t last = extent - patch_size;
  std::vector<std::size_t> pos;
  for (std::size_t v = 0; v <= last; v += stride) pos.push_back(v);
  if (pos.back() != last) pos.push_back(last);
  return pos;
}

void check_patch_fits(const Raster& img, Coord at, std::size_t patch_size) {
  if (at.row + patch_size > img.height() || at.col + patch_size > img.width()) {
    throw SizeError("patch at (" + std::to_string(at.row) + ", " + std::to_string(at.col) + ") of size " +
                    std::to_string(patch_size) + " exceeds the image bounds");
  }
}

}  // namespace

Eigen::VectorXd read_patch(const Raster& img, Coord at, std::size_t patch_size) {
  check_patch_fits(img, at, patch_size);
  Eigen::VectorXd v(static_cast<Eigen::Index>(patch_size * patch_size));
  Eigen::Index i = 0;
  for (std::size_t r = 0; r < patch_size; ++r) {
    for (std::size_t c = 0; c < patch_size; ++c) v(i++) = img(at.row + r, at.col + c);
  }
  return v;
}

std::vector<Coord> extract_references(const Raster& img, std::size_t patch_size, std::size_t stride) {
  if (patch_size == 0) throw ParameterError("patch size must be >= 1");
  if (stride == 0) throw ParameterError("stride must be >= 1");
  if (patch_size > img.width() || patch_size > img.height()) {
    throw SizeError("patch size " + std::to_string(patch_size) + " exceeds image dimensions " +
                    std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const auto rows = grid_positions(img.height(), patch_size, stride);
  const auto cols = grid_positions(img.width(), patch_size, stride);
  std::vector<Coord> refs;
  refs.reserve(rows.size() * cols.size());
  for (auto r : rows) {
    for (auto c : cols) refs.push_back({r, c});
  }
  return refs;
}

double patch_distance(const Raster& img, Coord a, Coord b, std::size_t patch_size) {
  double d = 0.0;
  for (std::size_t r = 0; r < patch_size; ++r) {
    const double* pa = img.pixels().data() + (a.row + r) * img.width() + a.col;
    const double* pb = img.pixels().data() + (b.row + r) * img.width() + b.col;
    for (std::size_t c = 0; c < patch_size; ++c) {
      const double diff = pa[c] - pb[c];
      d += diff * diff;
    }
  }
  return d;
}

std::vector<Coord> search_candidates(const Raster& img, Coord ref, std::size_t patch_size, std::size_t window) {
  if (window < patch_size) throw ParameterError("search window must be at least the patch size");
  check_patch_fits(img, ref, patch_size);
  const std::size_t half = (window - patch_size) / 2;
  const std::size_t r0 = ref.row > half ? ref.row - half : 0;
  const std::size_t c0 = ref.col > half ? ref.col - half : 0;
  const std::size_t r1 = std::min(img.height() - patch_size, ref.row + half);
  const std::size_t c1 = std::min(img.width() - patch_size, ref.col + half);
  std::vector<Coord> out;
  out.reserve((r1 - r0 + 1) * (c1 - c0 + 1));
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t c = c0; c <= c1; ++c) out.push_back({r, c});
  }
  return out;
}

PatchGroup block_match(const Raster& img, Coord ref, std::size_t patch_size, std::size_t stack_count,
                       std::size_t window) {
  if (stack_count == 0) throw ParameterError("stack count must be >= 1");
  const auto candidates = search_candidates(img, ref, patch_size, window);

  struct Ranked {
    double distance;
    std::size_t order;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i] == ref) continue;
    ranked.push_back({patch_distance(img, ref, candidates[i], patch_size), i});
  }
  const std::size_t take = std::min(stack_count - 1, ranked.size());
  const auto by_rank = [](const Ranked& a, const Ranked& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.order < b.order);
  };
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(take), ranked.end(), by_rank);

  PatchGroup group;
  group.patch_size = patch_size;
  group.patches.resize(static_cast<Eigen::Index>(patch_size * patch_size), static_cast<Eigen::Index>(stack_count));
  group.coords.reserve(stack_count);
  group.distances.reserve(stack_count);

  group.coords.push_back(ref);
  group.distances.push_back(0.0);
  for (std::size_t i = 0; i < take; ++i) {
    group.coords.push_back(candidates[ranked[i].order]);
    group.distances.push_back(ranked[i].distance);
  }
  while (group.coords.size() < stack_count) {
    group.coords.push_back(ref);
    group.distances.push_back(0.0);
    ++group.padded;
  }
  for (std::size_t j = 0; j < stack_count; ++j) {
    group.patches.col(static_cast<Eigen::Index>(j)) = read_patch(img, group.coords[j], patch_size);
  }
  return group;
}

Aggregation aggregate(std::span<const GroupEstimate> estimates, const Raster& fallback) {
  if (estimates.empty()) throw EmptyAggregationError("aggregate: no group estimates supplied");

  std::vector<std::size_t> order(estimates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto canonical = [&](std::size_t a, std::size_t b) {
    const auto& ea = estimates[a];
    const auto& eb = estimates[b];
    if (ea.coords != eb.coords) return ea.coords < eb.coords;
    if (ea.patches.size() != eb.patches.size()) return ea.patches.size() < eb.patches.size();
    return std::lexicographical_compare(ea.patches.data(), ea.patches.data() + ea.patches.size(), eb.patches.data(),
                                        eb.patches.data() + eb.patches.size());
  };
  std::stable_sort(order.begin(), order.end(), canonical);

  const std::size_t w = fallback.width();
  const std::size_t h = fallback.height();
  std::vector<double> sum(w * h, 0.0);
  std::vector<double> weight(w * h, 0.0);
  CoverageReport coverage;

  for (std::size_t idx : order) {
    const auto& e = estimates[idx];
    const std::size_t p = e.patch_size;
    if (e.patches.rows() != static_cast<Eigen::Index>(p * p) ||
        e.patches.cols() != static_cast<Eigen::Index>(e.coords.size())) {
      throw SizeError("aggregate: estimate shape does not match its coordinates");
    }
    for (std::size_t j = 0; j < e.coords.size(); ++j) {
      const Coord at = e.coords[j];
      check_patch_fits(fallback, at, p);
      const auto col = e.patches.col(static_cast<Eigen::Index>(j));
      Eigen::Index i = 0;
      for (std::size_t r = 0; r < p; ++r) {
        const std::size_t base = (at.row + r) * w + at.col;
        for (std::size_t c = 0; c < p; ++c) {
          sum[base + c] += col(i++);
          weight[base + c] += 1.0;
        }
      }
      ++coverage.contributions;
    }
  }

  Raster out(w, h, fallback.kind());
  auto dst = out.pixels();
  auto src = fallback.pixels();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    if (weight[i] > 0.0) {
      dst[i] = sum[i] / weight[i];
    } else {
      dst[i] = src[i];
      ++coverage.uncovered_pixels;
    }
  }
  return {std::move(out), coverage};
}

}  // namespace despeckle
