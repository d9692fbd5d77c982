/* Copyright 2026 The BRAVO Evaluation Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

// Grayscale PNG codec for the submission wire format: 8-bit class maps and
// ground truth, 16-bit confidence maps. Only color type 0 (gray) is accepted;
// palette, alpha and RGB images are rejected, never converted. Samples are
// returned exactly as stored: no gamma, no 8<->16 bit promotion. Interlaced
// input is accepted; output is always non-interlaced.

#include <png.h>

#include <array>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "bravo/core.hpp"
#include "bravo/error.hpp"

namespace bravo {

struct ImageHeader {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int bit_depth = 0;
  int channels = 0;
  bool palette = false;
  bool interlaced = false;
};

namespace detail {

struct PngIoContext {
  std::span<const std::uint8_t> input;
  std::size_t offset = 0;
  std::vector<std::uint8_t>* output = nullptr;
  std::array<char, 256> message{};
};

extern "C" inline void bravo_png_error(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngIoContext*>(png_get_error_ptr(png));
  std::strncpy(ctx->message.data(), msg ? msg : "libpng error", ctx->message.size() - 1);
  png_longjmp(png, 1);
}

extern "C" inline void bravo_png_warning(png_structp, png_const_charp) {}

extern "C" inline void bravo_png_read(png_structp png, png_bytep out, png_size_t n) {
  auto* ctx = static_cast<PngIoContext*>(png_get_io_ptr(png));
  if (ctx->offset + n > ctx->input.size()) png_error(png, "unexpected end of file");
  std::memcpy(out, ctx->input.data() + ctx->offset, n);
  ctx->offset += n;
}

extern "C" inline void bravo_png_write(png_structp png, png_bytep data, png_size_t n) {
  auto* ctx = static_cast<PngIoContext*>(png_get_io_ptr(png));
  ctx->output->insert(ctx->output->end(), data, data + n);
}

extern "C" inline void bravo_png_flush(png_structp) {}

inline int channels_of(int color_type) {
  switch (color_type) {
    case PNG_COLOR_TYPE_GRAY: return 1;
    case PNG_COLOR_TYPE_GRAY_ALPHA: return 2;
    case PNG_COLOR_TYPE_RGB: return 3;
    case PNG_COLOR_TYPE_RGB_ALPHA: return 4;
    case PNG_COLOR_TYPE_PALETTE: return 1;
    default: return 0;
  }
}

struct DecodedGray {
  ImageHeader header;
  // Packed rows exactly as stored: 16-bit samples are big-endian byte pairs.
  std::vector<std::uint8_t> bytes;
};

// When `expected_depth` is nonzero the image must be single-channel gray at
// that depth; otherwise only the header is decoded.
inline DecodedGray decode_gray(std::span<const std::uint8_t> data, const std::string& name,
                               int expected_depth) {
  if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kNotPng, name + ": missing PNG signature");
  }
  PngIoContext ctx;
  ctx.input = data;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, bravo_png_error,
                                           bravo_png_warning);
  if (png == nullptr) throw Error(ErrorCode::kIoFailure, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error(ErrorCode::kIoFailure, "libpng initialisation failed");
  }

  // Everything with a destructor lives outside the setjmp/longjmp window.
  DecodedGray result;
  std::vector<png_bytep> rows;
  ErrorCode failure = ErrorCode::kCorruptFile;
  std::string failure_message;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kCorruptFile, name + ": " + ctx.message.data());
  }
  png_set_read_fn(png, &ctx, bravo_png_read);
  png_read_info(png, info);

  png_uint_32 width = 0, height = 0;
  int bit_depth = 0, color_type = 0, interlace = 0;
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, &interlace, nullptr,
               nullptr);
  result.header = {width, height, bit_depth, channels_of(color_type),
                   color_type == PNG_COLOR_TYPE_PALETTE, interlace != PNG_INTERLACE_NONE};

  bool decode_pixels = expected_depth != 0;
  if (decode_pixels && color_type != PNG_COLOR_TYPE_GRAY) {
    failure = ErrorCode::kWrongChannelCount;
    failure_message = color_type == PNG_COLOR_TYPE_PALETTE
                          ? "palette images are not accepted"
                          : std::to_string(result.header.channels) +
                                " channels, expected 1 (grayscale)";
    decode_pixels = false;
  } else if (decode_pixels && bit_depth != expected_depth) {
    failure = ErrorCode::kWrongBitDepth;
    failure_message = "bit depth " + std::to_string(bit_depth) + ", expected " +
                      std::to_string(expected_depth);
    decode_pixels = false;
  }

  if (decode_pixels) {
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    result.bytes.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = result.bytes.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (!failure_message.empty()) throw Error(failure, name + ": " + failure_message);
  return result;
}

inline std::vector<std::uint8_t> encode_gray(std::uint32_t width, std::uint32_t height,
                                             int bit_depth,
                                             std::span<const std::uint8_t> packed) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kEncodingFailure, "cannot encode an empty image");
  }
  const std::size_t row_bytes = static_cast<std::size_t>(width) * (bit_depth / 8);
  if (packed.size() != row_bytes * height) {
    throw Error(ErrorCode::kEncodingFailure, "sample buffer does not match dimensions");
  }
  std::vector<std::uint8_t> out;
  PngIoContext ctx;
  ctx.output = &out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, bravo_png_error,
                                            bravo_png_warning);
  if (png == nullptr) throw Error(ErrorCode::kEncodingFailure, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    throw Error(ErrorCode::kEncodingFailure, "libpng initialisation failed");
  }
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kEncodingFailure, ctx.message.data());
  }
  png_set_write_fn(png, &ctx, bravo_png_write, bravo_png_flush);
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  for (std::uint32_t y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(packed.data() + y * row_bytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoFailure, "read failed for " + path.string());
  return bytes;
}

inline void write_bytes(const std::filesystem::path& path,
                        std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

template <typename Map>
Map decode_8bit(std::span<const std::uint8_t> data, const std::string& name) {
  DecodedGray d = decode_gray(data, name, 8);
  return Map(d.header.width, d.header.height, std::move(d.bytes));
}

template <typename Map>
std::vector<std::uint8_t> encode_8bit(const Map& map) {
  return encode_gray(static_cast<std::uint32_t>(map.width()),
                     static_cast<std::uint32_t>(map.height()), 8, map.samples());
}

}  // namespace detail

// In-memory codecs. `name` only labels error messages.

inline ImageHeader decode_png_header(std::span<const std::uint8_t> data,
                                     const std::string& name = "<memory>") {
  return detail::decode_gray(data, name, 0).header;
}

inline ClassMap decode_class_png(std::span<const std::uint8_t> data,
                                 const std::string& name = "<memory>") {
  return detail::decode_8bit<ClassMap>(data, name);
}

inline GroundTruthFrame decode_gt_png(std::span<const std::uint8_t> data,
                                      const std::string& name = "<memory>") {
  return detail::decode_8bit<GroundTruthFrame>(data, name);
}

inline ConfidenceMap decode_conf_png(std::span<const std::uint8_t> data,
                                     const std::string& name = "<memory>") {
  detail::DecodedGray d = detail::decode_gray(data, name, 16);
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(d.header.width) *
                                     d.header.height);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<std::uint16_t>((d.bytes[2 * i] << 8) | d.bytes[2 * i + 1]);
  }
  return ConfidenceMap(d.header.width, d.header.height, std::move(samples));
}

inline std::vector<std::uint8_t> encode_class_png(const ClassMap& map) {
  return detail::encode_8bit(map);
}

inline std::vector<std::uint8_t> encode_gt_png(const GroundTruthFrame& map) {
  return detail::encode_8bit(map);
}

inline std::vector<std::uint8_t> encode_conf_png(const ConfidenceMap& map) {
  std::vector<std::uint8_t> packed(map.size() * 2);
  for (std::size_t i = 0; i < map.size(); ++i) {
    packed[2 * i] = static_cast<std::uint8_t>(map[i] >> 8);
    packed[2 * i + 1] = static_cast<std::uint8_t>(map[i] & 0xff);
  }
  return detail::encode_gray(static_cast<std::uint32_t>(map.width()),
                             static_cast<std::uint32_t>(map.height()), 16, packed);
}

// File codecs.

inline ImageHeader read_png_header(const std::filesystem::path& path) {
  return decode_png_header(detail::read_bytes(path), path.string());
}

inline ClassMap read_class_png(const std::filesystem::path& path) {
  return decode_class_png(detail::read_bytes(path), path.string());
}

inline ConfidenceMap read_conf_png(const std::filesystem::path& path) {
  return decode_conf_png(detail::read_bytes(path), path.string());
}

inline GroundTruthFrame read_gt_png(const std::filesystem::path& path) {
  return decode_gt_png(detail::read_bytes(path), path.string());
}

inline void write_class_png(const std::filesystem::path& path, const ClassMap& map) {
  detail::write_bytes(path, encode_class_png(map));
}

inline void write_conf_png(const std::filesystem::path& path, const ConfidenceMap& map) {
  detail::write_bytes(path, encode_conf_png(map));
}

inline void write_gt_png(const std::filesystem::path& path, const GroundTruthFrame& map) {
  detail::write_bytes(path, encode_gt_png(map));
}

// Writes arbitrary integer labels as an 8-bit class map, refusing values that
// do not fit in a byte.
inline void write_class_png(const std::filesystem::path& path, std::size_t width,
                            std::size_t height, std::span<const int> labels) {
  if (labels.size() != width * height) {
    throw Error(ErrorCode::kEncodingFailure, "label count does not match dimensions");
  }
  std::vector<std::uint8_t> bytes(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 255) {
      throw Error(ErrorCode::kEncodingFailure,
                  "label " + std::to_string(labels[i]) + " does not fit in 8 bits");
    }
    bytes[i] = static_cast<std::uint8_t>(labels[i]);
  }
  write_class_png(path, ClassMap(width, height, std::move(bytes)));
}

}  // namespace bravo
