#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rowtracker {

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct Roi {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(int u, int v) const { return u >= x0 && u < x1 && v >= y0 && v < y1; }
  Roi intersect(const Roi& o) const;
  Roi unite(const Roi& o) const;
  Roi inflate(int by) const { return {x0 - by, y0 - by, x1 + by, y1 + by}; }
  bool operator==(const Roi&) const = default;
};

/// Binary instance mask over a width x height image.
///
/// Occupancy is stored only inside the tight bounding box of the foreground,
/// row-major, one byte per pixel. Two masks compare equal iff they have the
/// same dimensions and the same set of foreground pixels.
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height);

  /// Builds a mask from occupancy over `region`, which may extend past the
  /// image; pixels outside the image are discarded.
  Mask(int width, int height, Roi region, std::span<const std::uint8_t> bits);

  static Mask from_dense(int width, int height, std::span<const std::uint8_t> bits);
  static Mask rectangle(int width, int height, Roi box);
  static Mask disk(int width, int height, double cu, double cv, double radius);

  int width() const { return width_; }
  int height() const { return height_; }
  const Roi& roi() const { return roi_; }
  std::size_t count() const { return count_; }
  bool empty() const { return count_ == 0; }
  /// Row-major 0/1 occupancy of roi().
  std::span<const std::uint8_t> bits() const { return bits_; }

  bool at(int u, int v) const {
    if (!roi_.contains(u, v)) return false;
    return bits_[static_cast<std::size_t>(v - roi_.y0) * roi_.width() + (u - roi_.x0)] != 0;
  }

  /// Mean pixel coordinate; (NaN, NaN) for an empty mask.
  std::pair<double, double> centroid() const;

  std::vector<std::uint8_t> to_dense() const;

  /// Calls f(u, v) for every foreground pixel in row-major order.
  template <class F>
  void for_each(F&& f) const {
    const int w = roi_.width();
    for (int v = roi_.y0; v < roi_.y1; ++v) {
      const std::uint8_t* row = bits_.data() + static_cast<std::size_t>(v - roi_.y0) * w;
      for (int i = 0; i < w; ++i) {
        if (row[i]) f(roi_.x0 + i, v);
      }
    }
  }

  bool operator==(const Mask& other) const;

 private:
  int width_ = 0;
  int height_ = 0;
  Roi roi_{};
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

/// Per-pixel depth in whole millimetres, 0 = no return. This is the sensor's
/// native unit and the on-disk unit, so loading a written image is exact.
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(int width, int height, std::uint16_t fill_mm = 0);
  DepthImage(int width, int height, std::vector<std::uint16_t> mm);

  int width() const { return width_; }
  int height() const { return height_; }

  std::uint16_t mm(int u, int v) const {
    return mm_[static_cast<std::size_t>(v) * width_ + u];
  }
  void set_mm(int u, int v, std::uint16_t value) {
    mm_[static_cast<std::size_t>(v) * width_ + u] = value;
  }
  double meters(int u, int v) const { return mm(u, v) / 1000.0; }
  bool valid(int u, int v) const { return mm(u, v) != 0; }

  /// Rounds to the nearest millimetre and saturates at 65535; non-positive
  /// and non-finite depths map to 0.
  static std::uint16_t to_mm(double meters);

  std::span<const std::uint16_t> data() const { return mm_; }
  std::span<std::uint16_t> data() { return mm_; }

  bool operator==(const DepthImage&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint16_t> mm_;
};

/// Morphology with a 3x3 square structuring element. `close` runs on the
/// unbounded plane and clips afterwards, so it never removes mask pixels.
Mask dilate(const Mask& mask, int iterations = 1);
Mask erode(const Mask& mask, int iterations = 1);
Mask close(const Mask& mask);
/// Closes raw occupancy over `region` (same layout as the Mask constructor).
Mask close(int width, int height, Roi region, std::vector<std::uint8_t> bits);

/// |a & b| / |a | b|, 0 when both are empty. Throws DimensionMismatch.
double mask_iou(const Mask& a, const Mask& b);

std::size_t intersection_count(const Mask& a, const Mask& b);

}  // namespace rowtracker
