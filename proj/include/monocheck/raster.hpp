#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "monocheck/error.hpp"

namespace monocheck {

/// Binary per-pixel raster, row-major. Pixel centers sit at integer
/// coordinates (u in 0..width-1, v in 0..height-1) throughout the library.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h, bool value = false)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, value ? 1 : 0) {}

  bool operator()(int u, int v) const { return data[index(u, v)] != 0; }
  void set(int u, int v, bool value) { data[index(u, v)] = value ? 1 : 0; }
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * width + static_cast<std::size_t>(u);
  }
  std::size_t count() const {
    std::size_t n = 0;
    for (auto x : data) n += (x != 0);
    return n;
  }
};

inline void require_same_size(int w0, int h0, int w1, int h1, const char* what) {
  if (w0 != w1 || h0 != h1)
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": raster dimensions differ");
}

}  // namespace monocheck
