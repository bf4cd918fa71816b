#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "despeckle/patch_group.hpp"
#include "despeckle/raster.hpp"

namespace despeckle {

/// Equivalent number of looks of a Gamma(L, L) speckle field.
class Looks {
 public:
  explicit Looks(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Draws from Gamma(shape = L, rate = L) (unit mean, variance 1/L).
/// Bit-identical for a given seed.
std::vector<double> sample_gamma_noise(Looks looks, std::size_t n_samples, std::uint64_t seed);

/// Multiplies each pixel of `clean` by an independent unit-mean gamma draw.
Raster apply_speckle(const Raster& clean, Looks looks, std::uint64_t seed);

inline constexpr double kMadToSigma = 1.4826;
inline constexpr double kSigmaFloor = 1e-6;

/// Robust per-patch noise scale: 1.4826 * MAD of each patch's residual
/// against the group's elementwise-median patch, floored at 1e-6.
std::vector<double> estimate_patch_sigma(const PatchGroup& group);

}  // namespace despeckle
