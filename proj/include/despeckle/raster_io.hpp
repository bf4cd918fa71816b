#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "despeckle/raster.hpp"

namespace despeckle {

// FR32 layout: "FR32", u32 LE width, u32 LE height, then width*height
// little-endian IEEE-754 binary32 values in row-major order.
inline constexpr std::size_t kFr32HeaderBytes = 12;

std::vector<std::uint8_t> encode_fr32(const Raster& img);
Raster decode_fr32(std::span<const std::uint8_t> bytes);

/// 8-bit binary PGM (P5). Values map linearly from [0, peak] to [0, 255],
/// rounding half up and clamping.
std::vector<std::uint8_t> encode_pgm(const Raster& img, double peak = 255.0);

/// Pixel values are the stored sample values (0..maxval).
Raster decode_pgm(std::span<const std::uint8_t> bytes);

enum class RasterFormat { kFr32, kPgm };

/// Picks the format from the file extension: `.pgm` means P5, anything else FR32.
RasterFormat format_for_path(const std::string& path);

/// Reads either format, detected from the magic bytes.
Raster read_raster(const std::string& path);
void write_raster(const Raster& img, const std::string& path, double pgm_peak = 255.0);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace despeckle
