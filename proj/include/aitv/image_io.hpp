#pragma once

#include <png.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "aitv/errors.hpp"
#include "aitv/image.hpp"

namespace aitv {

// ---------------------------------------------------------------------------
// Flat binary float format (".aitv"): 16-byte header
//   bytes 0-3   magic "AITV"
//   bytes 4-7   format version, u32 little-endian (currently 1)
//   bytes 8-11  rows M, u32 little-endian
//   bytes 12-15 cols N, u32 little-endian
// followed by M*N little-endian f32 intensities in row-major order.
// ---------------------------------------------------------------------------

namespace detail {

constexpr std::uint32_t kAitvFormatVersion = 1;

inline void put_u32_le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32_le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (!in.good() && !in.eof())
    throw IoError("failed reading " + path.string());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::string& bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace detail

inline void write_aitv(const std::filesystem::path& path, const Image& u) {
  std::string bytes;
  bytes.reserve(16 + u.size() * 4);
  bytes.append("AITV", 4);
  detail::put_u32_le(bytes, detail::kAitvFormatVersion);
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(u.rows()));
  detail::put_u32_le(bytes, static_cast<std::uint32_t>(u.cols()));
  for (std::size_t k = 0; k < u.size(); ++k) {
    const float f = static_cast<float>(u[k]);
    std::uint32_t raw;
    std::memcpy(&raw, &f, 4);
    detail::put_u32_le(bytes, raw);
  }
  detail::write_file_bytes(path, bytes);
}

inline Image read_aitv(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  if (bytes.size() < 16 || bytes.compare(0, 4, "AITV") != 0)
    throw IoError(path.string() + ": not a flat-float image file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = detail::get_u32_le(p + 4);
  if (version != detail::kAitvFormatVersion)
    throw IoError(path.string() + ": unsupported format version");
  const std::uint32_t rows = detail::get_u32_le(p + 8);
  const std::uint32_t cols = detail::get_u32_le(p + 12);
  if (rows == 0 || cols == 0 ||
      bytes.size() != 16 + std::size_t(rows) * cols * 4)
    throw IoError(path.string() + ": truncated or inconsistent header");
  Image u(static_cast<int>(rows), static_cast<int>(cols));
  for (std::size_t k = 0; k < u.size(); ++k) {
    const std::uint32_t raw = detail::get_u32_le(p + 16 + k * 4);
    float f;
    std::memcpy(&f, &raw, 4);
    u[k] = static_cast<double>(f);
  }
  return u;
}

// ---------------------------------------------------------------------------
// Binary PGM (P5), 8-bit or 16-bit big-endian samples per the Netpbm spec.
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t pgm_next_token(const std::string& bytes, std::size_t pos,
                                  std::string& token) {
  // Skip whitespace and '#' comments.
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  token.clear();
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])))
    token.push_back(bytes[pos++]);
  return pos;
}

inline int pgm_parse_int(const std::string& token, const char* what) {
  int value = 0;
  const auto res =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw IoError(std::string("invalid PGM ") + what);
  return value;
}

}  // namespace detail

inline Image read_pgm(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  std::string token;
  std::size_t pos = detail::pgm_next_token(bytes, 0, token);
  if (token != "P5")
    throw IoError(path.string() + ": only binary PGM (P5) is supported");
  pos = detail::pgm_next_token(bytes, pos, token);
  const int width = detail::pgm_parse_int(token, "width");
  pos = detail::pgm_next_token(bytes, pos, token);
  const int height = detail::pgm_parse_int(token, "height");
  pos = detail::pgm_next_token(bytes, pos, token);
  const int maxval = detail::pgm_parse_int(token, "maxval");
  if (width < 1 || height < 1 || maxval < 1 || maxval > 65535)
    throw IoError(path.string() + ": invalid PGM header");
  ++pos;  // single whitespace byte after maxval

  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t expected =
      std::size_t(width) * height * bytes_per_sample;
  if (bytes.size() < pos + expected)
    throw IoError(path.string() + ": truncated PGM data");

  Image u(height, width);
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + pos;
  if (bytes_per_sample == 1) {
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = p[k];
  } else {
    for (std::size_t k = 0; k < u.size(); ++k)
      u[k] = p[2 * k] * 256 + p[2 * k + 1];
  }
  return u;
}

/// Quantizing writer: rounds to nearest even and clamps to [0, maxval].
inline void write_pgm(const std::filesystem::path& path, const Image& u,
                      int maxval = 255) {
  if (maxval < 1 || maxval > 65535)
    throw InvalidConfig("PGM maxval must be in [1, 65535]");
  std::string bytes = "P5\n" + std::to_string(u.cols()) + " " +
                      std::to_string(u.rows()) + "\n" +
                      std::to_string(maxval) + "\n";
  for (std::size_t k = 0; k < u.size(); ++k) {
    long v = std::lrint(u[k]);
    v = std::clamp(v, 0L, static_cast<long>(maxval));
    if (maxval > 255) bytes.push_back(static_cast<char>((v >> 8) & 0xff));
    bytes.push_back(static_cast<char>(v & 0xff));
  }
  detail::write_file_bytes(path, bytes);
}

// ---------------------------------------------------------------------------
// PNG, 8/16-bit grayscale only. Color and palette inputs are rejected, not
// converted: a silent luma conversion would corrupt any later comparison.
// ---------------------------------------------------------------------------

namespace detail {

struct PngReadCtx {
  std::FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (file) std::fclose(file);
  }
};

struct PngWriteCtx {
  std::FILE* file = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (file) std::fclose(file);
  }
};

}  // namespace detail

inline Image read_png(const std::filesystem::path& path) {
  detail::PngReadCtx ctx;
  ctx.file = std::fopen(path.string().c_str(), "rb");
  if (!ctx.file) throw IoError("cannot open " + path.string());

  unsigned char sig[8];
  if (std::fread(sig, 1, 8, ctx.file) != 8 || png_sig_cmp(sig, 0, 8))
    throw IoError(path.string() + ": not a PNG file");

  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                   nullptr);
  if (!ctx.png) throw IoError("libpng initialization failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("libpng initialization failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw IoError(path.string() + ": PNG decode error");

  png_init_io(ctx.png, ctx.file);
  png_set_sig_bytes(ctx.png, 8);
  png_read_info(ctx.png, ctx.info);

  const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
  const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
  const int color_type = png_get_color_type(ctx.png, ctx.info);
  int bit_depth = png_get_bit_depth(ctx.png, ctx.info);

  if (color_type != PNG_COLOR_TYPE_GRAY)
    throw UnsupportedImage(path.string() +
                           ": only grayscale PNG images are accepted");
  if (bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(ctx.png);
    bit_depth = 8;
  }
  png_set_interlace_handling(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  const int bytes_per_sample = bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> raw(std::size_t(width) * height *
                                 bytes_per_sample);
  std::vector<png_bytep> row_ptrs(height);
  for (png_uint_32 i = 0; i < height; ++i)
    row_ptrs[i] = raw.data() + std::size_t(i) * width * bytes_per_sample;
  png_read_image(ctx.png, row_ptrs.data());
  png_read_end(ctx.png, nullptr);

  Image u(static_cast<int>(height), static_cast<int>(width));
  if (bytes_per_sample == 1) {
    for (std::size_t k = 0; k < u.size(); ++k) u[k] = raw[k];
  } else {
    // PNG stores 16-bit samples big-endian.
    for (std::size_t k = 0; k < u.size(); ++k)
      u[k] = raw[2 * k] * 256 + raw[2 * k + 1];
  }
  return u;
}

/// Quantizing writer: rounds to nearest even and clamps to the sample range.
inline void write_png_gray(const std::filesystem::path& path, const Image& u,
                           int bit_depth = 8) {
  if (bit_depth != 8 && bit_depth != 16)
    throw InvalidConfig("PNG writer supports bit depths 8 and 16");
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }

  const long maxval = bit_depth == 16 ? 65535L : 255L;
  const int bytes_per_sample = bit_depth == 16 ? 2 : 1;
  std::vector<unsigned char> raw(u.size() * bytes_per_sample);
  for (std::size_t k = 0; k < u.size(); ++k) {
    long v = std::clamp(std::lrint(u[k]), 0L, maxval);
    if (bit_depth == 16) {
      raw[2 * k] = static_cast<unsigned char>((v >> 8) & 0xff);
      raw[2 * k + 1] = static_cast<unsigned char>(v & 0xff);
    } else {
      raw[k] = static_cast<unsigned char>(v);
    }
  }

  detail::PngWriteCtx ctx;
  ctx.file = std::fopen(path.string().c_str(), "wb");
  if (!ctx.file) throw IoError("cannot open " + path.string() + " for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                    nullptr);
  if (!ctx.png) throw IoError("libpng initialization failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw IoError("libpng initialization failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw IoError(path.string() + ": PNG encode error");

  png_init_io(ctx.png, ctx.file);
  png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(u.cols()),
               static_cast<png_uint_32>(u.rows()), bit_depth,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);

  std::vector<png_bytep> row_ptrs(u.rows());
  for (int i = 0; i < u.rows(); ++i)
    row_ptrs[i] = raw.data() + std::size_t(i) * u.cols() * bytes_per_sample;
  png_write_image(ctx.png, row_ptrs.data());
  png_write_end(ctx.png, nullptr);
}

/// 8-bit preview: intensities scaled by 255 / dynamic_range, then
/// round-half-to-even and clamp.
inline void write_preview_png(const std::filesystem::path& path,
                              const Image& u, double dynamic_range) {
  if (!(dynamic_range > 0.0))
    throw InvalidConfig("preview requires dynamic_range > 0");
  Image scaled(u.rows(), u.cols());
  for (std::size_t k = 0; k < u.size(); ++k)
    scaled[k] = u[k] * (255.0 / dynamic_range);
  write_png_gray(path, scaled, 8);
}

// ---------------------------------------------------------------------------
// Format dispatch by file magic.
// ---------------------------------------------------------------------------

inline Image read_image(const std::filesystem::path& path) {
  std::array<unsigned char, 8> head{};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    in.read(reinterpret_cast<char*>(head.data()), head.size());
    if (in.gcount() < 4)
      throw IoError(path.string() + ": file too short to be an image");
  }
  if (png_sig_cmp(head.data(), 0, 8) == 0) return read_png(path);
  if (head[0] == 'P' && head[1] == '5') return read_pgm(path);
  if (std::memcmp(head.data(), "AITV", 4) == 0) return read_aitv(path);
  throw IoError(path.string() + ": unrecognized image format");
}

// ---------------------------------------------------------------------------
// Line-profile CSV: one value per line, '.' decimal separator, formatted
// with shortest round-trip precision so re-reading is exact.
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline void write_profile_csv(const std::filesystem::path& path,
                              const std::vector<double>& values) {
  std::string out;
  for (const double v : values) {
    out += format_double(v);
    out += '\n';
  }
  detail::write_file_bytes(path, out);
}

inline std::vector<double> read_profile_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), v);
    if (res.ec != std::errc())
      throw IoError(path.string() + ": malformed profile value '" + line + "'");
    values.push_back(v);
  }
  return values;
}

}  // namespace aitv
