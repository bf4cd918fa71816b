#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <tuple>

#include "despeckle/errors.hpp"
#include "despeckle/nonlocal.hpp"
#include "test_support.hpp"

using namespace despeckle;

namespace {

// Exhaustive k-NN over every in-window top-left position, written without
// the library's candidate or distance helpers.
std::vector<Coord> brute_force_group(const Raster& img, Coord ref, std::size_t p, std::size_t k, std::size_t window) {
  const long half = static_cast<long>((window - p) / 2);
  std::vector<std::tuple<double, std::size_t, std::size_t>> all;
  for (long r = 0; r + static_cast<long>(p) <= static_cast<long>(img.height()); ++r) {
    for (long c = 0; c + static_cast<long>(p) <= static_cast<long>(img.width()); ++c) {
      if (std::abs(r - static_cast<long>(ref.row)) > half || std::abs(c - static_cast<long>(ref.col)) > half) continue;
      if (static_cast<std::size_t>(r) == ref.row && static_cast<std::size_t>(c) == ref.col) continue;
      double d = 0.0;
      for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) {
          const double diff = img(ref.row + i, ref.col + j) - img(r + i, c + j);
          d += diff * diff;
        }
      all.emplace_back(d, r, c);
    }
  }
  std::sort(all.begin(), all.end());
  std::vector<Coord> out{ref};
  for (std::size_t i = 0; i < all.size() && out.size() < k; ++i) out.push_back({std::get<1>(all[i]), std::get<2>(all[i])});
  while (out.size() < k) out.push_back(ref);
  return out;
}

GroupEstimate single(std::size_t p, Coord at, double value) {
  GroupEstimate e;
  e.patch_size = p;
  e.coords = {at};
  e.patches = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(p * p), 1, value);
  return e;
}

}  // namespace

TEST(ExtractReferences, TileArithmetic) {
  const auto one = extract_references(Raster(16, 16), 16, 4);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (Coord{0, 0}));
  EXPECT_EQ(extract_references(Raster(16, 16), 16, 7).size(), 1u);

  const auto four = extract_references(Raster(20, 20), 16, 4);
  const std::vector<Coord> expect{{0, 0}, {0, 4}, {4, 0}, {4, 4}};
  EXPECT_EQ(four, expect);

  EXPECT_EQ(extract_references(Raster(256, 256), 16, 4).size(), 3721u);
}

TEST(ExtractReferences, LastRowAndColumnAlwaysCovered) {
  const auto refs = extract_references(Raster(23, 19), 8, 5);
  // rows 0,5,10 then 11; cols 0,5,10,15 then none extra
  EXPECT_EQ(refs.size(), 4u * 4u);
  EXPECT_EQ(refs.back(), (Coord{11, 15}));
  EXPECT_THROW(extract_references(Raster(8, 8), 9, 1), SizeError);
  EXPECT_THROW(extract_references(Raster(8, 8), 4, 0), ParameterError);
}

TEST(SearchCandidates, ClippedToImage) {
  const Raster img(40, 30);
  const auto c = search_candidates(img, {0, 0}, 8, 16);
  // half = 4: rows 0..4, cols 0..4
  EXPECT_EQ(c.size(), 25u);
  EXPECT_EQ(c.front(), (Coord{0, 0}));
  EXPECT_EQ(c.back(), (Coord{4, 4}));
  EXPECT_THROW(search_candidates(img, {0, 0}, 8, 7), ParameterError);
}

TEST(BlockMatch, ConstantImageTakesRowMajorOrder) {
  const Raster flat(32, 32, RasterKind::kIntensity, 3.0);
  const auto g = block_match(flat, {0, 0}, 8, 5, 24);
  const std::vector<Coord> expect{{0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}};
  EXPECT_EQ(g.coords, expect);
  for (double d : g.distances) EXPECT_EQ(d, 0.0);
  EXPECT_EQ(g.padded, 0u);
  EXPECT_EQ(g.patches.rows(), 64);
  EXPECT_EQ(g.patches.cols(), 5);
}

TEST(BlockMatch, ExactDuplicateRanksFirst) {
  Raster img = support::random_raster(48, 48, 3);
  const Coord ref{20, 20}, copy{26, 13};
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) img(copy.row + r, copy.col + c) = img(ref.row + r, ref.col + c);
  const auto g = block_match(img, ref, 8, 4, 24);
  EXPECT_EQ(g.coords[0], ref);
  EXPECT_EQ(g.coords[1], copy);
  EXPECT_EQ(g.distances[1], 0.0);
}

TEST(BlockMatch, PadsWithReferenceWhenWindowIsSmall) {
  const Raster img = support::random_raster(8, 8, 4);
  const auto g = block_match(img, {0, 0}, 7, 10, 9);
  // candidates: rows 0..1, cols 0..1 -> three non-reference patches
  EXPECT_EQ(g.padded, 6u);
  for (std::size_t j = 4; j < 10; ++j) {
    EXPECT_EQ(g.coords[j], (Coord{0, 0}));
    EXPECT_EQ(g.patches.col(static_cast<Eigen::Index>(j)), g.patches.col(0));
  }
}

TEST(BlockMatch, MatchesBruteForceOnRandomImages) {
  std::mt19937_64 gen(2025);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = std::uniform_int_distribution<std::size_t>(16, 64)(gen);
    const std::size_t h = std::uniform_int_distribution<std::size_t>(16, 64)(gen);
    const std::size_t p = std::uniform_int_distribution<std::size_t>(2, 8)(gen);
    const std::size_t k = std::uniform_int_distribution<std::size_t>(1, 12)(gen);
    const std::size_t window = p + std::uniform_int_distribution<std::size_t>(0, 30)(gen);
    Raster img = support::random_raster(w, h, gen());
    if (trial % 5 == 0) {
      for (double& v : img.pixels()) v = std::round(v * 3.0);  // force distance ties
    }
    const Coord ref{std::uniform_int_distribution<std::size_t>(0, h - p)(gen),
                    std::uniform_int_distribution<std::size_t>(0, w - p)(gen)};
    const auto g = block_match(img, ref, p, k, window);
    EXPECT_EQ(g.coords, brute_force_group(img, ref, p, k, window)) << "trial " << trial;
    for (std::size_t j = 0; j < k; ++j) {
      EXPECT_EQ(g.patches.col(static_cast<Eigen::Index>(j)), read_patch(img, g.coords[j], p));
      EXPECT_DOUBLE_EQ(g.distances[j], patch_distance(img, ref, g.coords[j], p));
    }
  }
}

TEST(Aggregate, SinglePatchPastedVerbatim) {
  const Raster fallback(6, 6, RasterKind::kTransformed, -1.0);
  GroupEstimate e;
  e.patch_size = 2;
  e.coords = {{1, 2}};
  e.patches = Eigen::MatrixXd(4, 1);
  e.patches << 1.0, 2.0, 3.0, 4.0;
  const std::vector<GroupEstimate> all{e};
  const auto out = aggregate(all, fallback);
  EXPECT_EQ(out.image(1, 2), 1.0);
  EXPECT_EQ(out.image(1, 3), 2.0);
  EXPECT_EQ(out.image(2, 2), 3.0);
  EXPECT_EQ(out.image(2, 3), 4.0);
  EXPECT_EQ(out.image(0, 0), -1.0);
  EXPECT_EQ(out.image.kind(), RasterKind::kTransformed);
  EXPECT_EQ(out.coverage.uncovered_pixels, 32u);
  EXPECT_EQ(out.coverage.contributions, 1u);
}

TEST(Aggregate, AveragesOverlappingContributions) {
  const Raster fallback(4, 4);
  const std::vector<GroupEstimate> same{single(2, {0, 0}, 0.7), single(2, {0, 0}, 0.7)};
  EXPECT_DOUBLE_EQ(aggregate(same, fallback).image(1, 1), 0.7);

  // One contribution of 1.0 and three of 3.0 meet at pixel (1, 1).
  const std::vector<GroupEstimate> mixed{single(2, {0, 0}, 1.0), single(2, {1, 1}, 3.0), single(2, {0, 1}, 3.0),
                                         single(2, {1, 0}, 3.0)};
  EXPECT_DOUBLE_EQ(aggregate(mixed, fallback).image(1, 1), 2.5);
}

TEST(Aggregate, IndependentOfInputOrder) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n01;
  std::vector<GroupEstimate> est;
  for (int i = 0; i < 40; ++i) {
    GroupEstimate e;
    e.patch_size = 4;
    for (int j = 0; j < 3; ++j) e.coords.push_back({gen() % 13, gen() % 13});
    e.patches = Eigen::MatrixXd(16, 3);
    for (Eigen::Index t = 0; t < e.patches.size(); ++t) e.patches.data()[t] = n01(gen);
    est.push_back(e);
  }
  const Raster fallback(16, 16);
  const auto a = aggregate(est, fallback);
  std::shuffle(est.begin(), est.end(), gen);
  const auto b = aggregate(est, fallback);
  for (std::size_t i = 0; i < fallback.size(); ++i) EXPECT_EQ(a.image.pixels()[i], b.image.pixels()[i]);
}

TEST(Aggregate, Errors) {
  const Raster fallback(4, 4);
  EXPECT_THROW(aggregate(std::vector<GroupEstimate>{}, fallback), EmptyAggregationError);
  const std::vector<GroupEstimate> outside{single(2, {3, 3}, 1.0)};
  EXPECT_THROW(aggregate(outside, fallback), SizeError);
}
