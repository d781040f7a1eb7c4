#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace synthqa {

// Row-major 8-bit single-channel raster.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(std::size_t w, std::size_t h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(w * h, fill) {}

  bool empty() const noexcept { return pixels.empty(); }
  std::size_t size() const noexcept { return pixels.size(); }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

// Binary raster; every value is 0 or 1.
struct BinaryMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(std::size_t w, std::size_t h, bool fill = false)
      : width(w), height(h), bits(w * h, fill ? 1 : 0) {}

  std::size_t size() const noexcept { return bits.size(); }
  std::uint8_t& at(std::size_t x, std::size_t y) { return bits[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return bits[y * width + x]; }
  std::size_t count() const;
  bool any() const { return count() != 0; }

  bool operator==(const BinaryMask&) const = default;
};

// Luma conversion with weights 0.299/0.587/0.114, rounded half-up.
std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Decodes PNG bytes of any colour type / bit depth to 8-bit grayscale.
// Alpha is discarded, 16-bit samples are reduced to their high byte.
GrayImage decode_png(std::span<const std::uint8_t> bytes);
GrayImage read_png(const std::filesystem::path& path);

// Non-interlaced 8-bit single-channel PNG with fixed filter and compression
// settings, so identical pixels always produce identical files.
std::vector<std::uint8_t> encode_png(const GrayImage& img, int compression_level = 6);
void write_png(const GrayImage& img, const std::filesystem::path& path, int compression_level = 6);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace synthqa
