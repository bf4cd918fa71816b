#include "despeckle/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace despeckle {

namespace {

void put_u32(std::uint8_t* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

RasterKind infer_kind(const std::vector<double>& data) {
  const bool intensity = std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v) && v >= 0.0; });
  return intensity ? RasterKind::kIntensity : RasterKind::kTransformed;
}

// Reads one PGM header token, skipping whitespace and `#` comments.
std::size_t read_pgm_number(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  for (;;) {
    if (pos >= bytes.size()) throw IoError("PGM header truncated", pos);
    const auto ch = bytes[pos];
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(ch)) {
      ++pos;
    } else {
      break;
    }
  }
  if (!std::isdigit(bytes[pos])) throw IoError("PGM header: expected a number", pos);
  std::size_t value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + static_cast<std::size_t>(bytes[pos] - '0');
    if (value > (1u << 30)) throw IoError("PGM header: number too large", pos);
    ++pos;
  }
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_fr32(const Raster& img) {
  std::vector<std::uint8_t> out(kFr32HeaderBytes + 4 * img.size());
  std::copy_n("FR32", 4, out.begin());
  put_u32(out.data() + 4, static_cast<std::uint32_t>(img.width()));
  put_u32(out.data() + 8, static_cast<std::uint32_t>(img.height()));
  std::uint8_t* dst = out.data() + kFr32HeaderBytes;
  for (double v : img.pixels()) {
    put_u32(dst, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    dst += 4;
  }
  return out;
}

Raster decode_fr32(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw IoError("FR32: file shorter than the magic", bytes.size());
  if (!std::equal(bytes.begin(), bytes.begin() + 4, "FR32")) throw IoError("FR32: bad magic", 0);
  if (bytes.size() < kFr32HeaderBytes) throw IoError("FR32: header truncated", bytes.size());
  const std::size_t w = get_u32(bytes, 4);
  const std::size_t h = get_u32(bytes, 8);
  if (w == 0 || h == 0) throw IoError("FR32: zero dimension", 4);
  const std::size_t expected = kFr32HeaderBytes + 4 * w * h;
  if (bytes.size() < expected) throw IoError("FR32: payload truncated", bytes.size());
  if (bytes.size() > expected) throw IoError("FR32: trailing bytes after payload", expected);
  std::vector<double> data(w * h);
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, kFr32HeaderBytes + 4 * i));
  }
  const auto kind = infer_kind(data);
  return Raster(w, h, std::move(data), kind);
}

std::vector<std::uint8_t> encode_pgm(const Raster& img, double peak) {
  if (!(peak > 0.0)) throw ParameterError("PGM export peak must be positive");
  const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) {
    const double scaled = std::floor(v / peak * 255.0 + 0.5);
    out.push_back(static_cast<std::uint8_t>(std::clamp(scaled, 0.0, 255.0)));
  }
  return out;
}

Raster decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw IoError("PGM: bad magic (expected P5)", 0);
  std::size_t pos = 2;
  const std::size_t w = read_pgm_number(bytes, pos);
  const std::size_t h = read_pgm_number(bytes, pos);
  const std::size_t maxval = read_pgm_number(bytes, pos);
  if (w == 0 || h == 0) throw IoError("PGM: zero dimension", pos);
  if (maxval == 0 || maxval > 255) throw IoError("PGM: only 8-bit maxval (1..255) is supported", pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw IoError("PGM: missing whitespace after maxval", pos);
  ++pos;
  if (bytes.size() - pos < w * h) throw IoError("PGM: payload truncated", bytes.size());
  std::vector<double> data(w * h);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(bytes[pos + i]);
  return Raster(w, h, std::move(data), RasterKind::kIntensity);
}

RasterFormat format_for_path(const std::string& path) {
  if (path.size() >= 4) {
    std::string ext = path.substr(path.size() - 4);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm") return RasterFormat::kPgm;
  }
  return RasterFormat::kFr32;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

Raster read_raster(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  try {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes);
    return decode_fr32(bytes);
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_raster(const Raster& img, const std::string& path, double pgm_peak) {
  const auto bytes = format_for_path(path) == RasterFormat::kPgm ? encode_pgm(img, pgm_peak) : encode_fr32(img);
  write_file_bytes(path, bytes);
}

}  // namespace despeckle
