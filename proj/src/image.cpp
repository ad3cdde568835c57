#include "rowtracker/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "rowtracker/error.hpp"

namespace rowtracker {

Roi Roi::intersect(const Roi& o) const {
  Roi r{std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  if (r.empty()) return {};
  return r;
}

Roi Roi::unite(const Roi& o) const {
  if (empty()) return o;
  if (o.empty()) return *this;
  return {std::min(x0, o.x0), std::min(y0, o.y0), std::max(x1, o.x1), std::max(y1, o.y1)};
}

Mask::Mask(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::DimensionMismatch, "negative mask dimensions");
  }
}

Mask::Mask(int width, int height, Roi region, std::span<const std::uint8_t> bits)
    : Mask(width, height) {
  if (static_cast<std::size_t>(std::max(region.width(), 0)) *
          static_cast<std::size_t>(std::max(region.height(), 0)) !=
      bits.size()) {
    throw Error(ErrorCode::DimensionMismatch, "occupancy size does not match region");
  }
  const Roi clip = region.intersect({0, 0, width, height});
  if (clip.empty()) return;

  const int rw = region.width();
  auto src_row = [&](int v) {
    return bits.data() + static_cast<std::size_t>(v - region.y0) * rw;
  };

  Roi tight{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
            std::numeric_limits<int>::min(), std::numeric_limits<int>::min()};
  for (int v = clip.y0; v < clip.y1; ++v) {
    const std::uint8_t* row = src_row(v);
    int first = clip.x0;
    while (first < clip.x1 && !row[first - region.x0]) ++first;
    if (first == clip.x1) continue;
    int last = clip.x1 - 1;
    while (!row[last - region.x0]) --last;
    tight.x0 = std::min(tight.x0, first);
    tight.x1 = std::max(tight.x1, last + 1);
    tight.y0 = std::min(tight.y0, v);
    tight.y1 = v + 1;
  }
  if (tight.empty()) return;

  roi_ = tight;
  bits_.assign(static_cast<std::size_t>(tight.width()) * tight.height(), 0);
  for (int v = tight.y0; v < tight.y1; ++v) {
    const std::uint8_t* row = src_row(v);
    std::uint8_t* dst = bits_.data() + static_cast<std::size_t>(v - tight.y0) * tight.width();
    for (int u = tight.x0; u < tight.x1; ++u) {
      if (row[u - region.x0]) {
        dst[u - tight.x0] = 1;
        ++count_;
      }
    }
  }
}

Mask Mask::from_dense(int width, int height, std::span<const std::uint8_t> bits) {
  return Mask(width, height, Roi{0, 0, width, height}, bits);
}

Mask Mask::rectangle(int width, int height, Roi box) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(std::max(box.width(), 0)) *
                                     std::max(box.height(), 0),
                                 1);
  return Mask(width, height, box.empty() ? Roi{} : box, bits);
}

Mask Mask::disk(int width, int height, double cu, double cv, double radius) {
  const Roi box{static_cast<int>(std::floor(cu - radius)), static_cast<int>(std::floor(cv - radius)),
                static_cast<int>(std::ceil(cu + radius)) + 1,
                static_cast<int>(std::ceil(cv + radius)) + 1};
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(box.width()) * box.height(), 0);
  const double r2 = radius * radius;
  for (int v = box.y0; v < box.y1; ++v) {
    for (int u = box.x0; u < box.x1; ++u) {
      const double du = u - cu, dv = v - cv;
      if (du * du + dv * dv <= r2) {
        bits[static_cast<std::size_t>(v - box.y0) * box.width() + (u - box.x0)] = 1;
      }
    }
  }
  return Mask(width, height, box, bits);
}

std::pair<double, double> Mask::centroid() const {
  if (count_ == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  // Integer sums are exact, so the result does not depend on traversal order.
  long long su = 0, sv = 0;
  const int w = roi_.width();
  for (int v = roi_.y0; v < roi_.y1; ++v) {
    const std::uint8_t* row = bits_.data() + static_cast<std::size_t>(v - roi_.y0) * w;
    long long n = 0, sx = 0;
    for (int i = 0; i < w; ++i) {
      n += row[i];
      sx += row[i] * i;
    }
    su += sx + n * roi_.x0;
    sv += n * v;
  }
  return {static_cast<double>(su) / static_cast<double>(count_),
          static_cast<double>(sv) / static_cast<double>(count_)};
}

std::vector<std::uint8_t> Mask::to_dense() const {
  std::vector<std::uint8_t> dense(static_cast<std::size_t>(width_) * height_, 0);
  for_each([&](int u, int v) { dense[static_cast<std::size_t>(v) * width_ + u] = 1; });
  return dense;
}

bool Mask::operator==(const Mask& other) const {
  // Both sides keep a tight bounding box, so the representation is canonical.
  return width_ == other.width_ && height_ == other.height_ && count_ == other.count_ &&
         roi_ == other.roi_ && bits_ == other.bits_;
}

DepthImage::DepthImage(int width, int height, std::uint16_t fill_mm)
    : width_(width), height_(height),
      mm_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill_mm) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::DimensionMismatch, "negative depth image dimensions");
  }
}

DepthImage::DepthImage(int width, int height, std::vector<std::uint16_t> mm)
    : width_(width), height_(height), mm_(std::move(mm)) {
  if (width < 0 || height < 0 ||
      mm_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("depth buffer holds {} values, expected {}x{}", mm_.size(), width,
                            height));
  }
}

std::uint16_t DepthImage::to_mm(double meters) {
  if (!std::isfinite(meters) || meters <= 0.0) return 0;
  const double mm = std::round(meters * 1000.0);
  if (mm >= 65535.0) return 65535;
  return static_cast<std::uint16_t>(mm);
}

namespace {

// Unclipped occupancy grid used as scratch space for morphology.
struct Grid {
  Roi region;
  std::vector<std::uint8_t> bits;
};

Grid to_grid(const Mask& m) {
  Grid g{m.roi(), std::vector<std::uint8_t>(static_cast<std::size_t>(m.roi().width()) *
                                                std::max(m.roi().height(), 0),
                                            0)};
  m.for_each([&](int u, int v) {
    g.bits[static_cast<std::size_t>(v - g.region.y0) * g.region.width() + (u - g.region.x0)] = 1;
  });
  return g;
}

// Copy of `in` over its region grown by `by`, zero outside.
Grid pad(const Grid& in, int by) {
  Grid out{in.region.inflate(by), {}};
  const int w = out.region.width(), iw = in.region.width();
  out.bits.assign(static_cast<std::size_t>(w) * out.region.height(), 0);
  for (int y = 0; y < in.region.height(); ++y) {
    std::copy_n(in.bits.begin() + static_cast<std::ptrdiff_t>(y) * iw, iw,
                out.bits.begin() + static_cast<std::ptrdiff_t>(y + by) * w + by);
  }
  return out;
}

// Separable 3x3 max (dilate) or min (erode) over the interior of a grid
// padded by one pixel; the result covers the unpadded region.
template <class Op>
Grid filter3(const Grid& padded, Op op) {
  const Roi r = padded.region.inflate(-1);
  const int pw = padded.region.width(), w = r.width(), h = r.height();
  std::vector<std::uint8_t> horiz(static_cast<std::size_t>(w) * padded.region.height());
  for (int y = 0; y < padded.region.height(); ++y) {
    const std::uint8_t* row = padded.bits.data() + static_cast<std::size_t>(y) * pw;
    std::uint8_t* dst = horiz.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) dst[x] = op(op(row[x], row[x + 1]), row[x + 2]);
  }
  Grid out{r, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* a = horiz.data() + static_cast<std::size_t>(y) * w;
    const std::uint8_t* b = a + w;
    const std::uint8_t* c = b + w;
    std::uint8_t* dst = out.bits.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) dst[x] = op(op(a[x], b[x]), c[x]);
  }
  return out;
}

Grid dilate_grid(const Grid& in) {
  if (in.region.empty()) return in;
  return filter3(pad(in, 2), [](std::uint8_t a, std::uint8_t b) -> std::uint8_t { return a | b; });
}

Grid erode_grid(const Grid& in) {
  if (in.region.empty()) return in;
  return filter3(pad(in, 1), [](std::uint8_t a, std::uint8_t b) -> std::uint8_t { return a & b; });
}

}  // namespace

Mask dilate(const Mask& mask, int iterations) {
  Grid g = to_grid(mask);
  for (int i = 0; i < iterations; ++i) g = dilate_grid(g);
  return Mask(mask.width(), mask.height(), g.region, g.bits);
}

Mask erode(const Mask& mask, int iterations) {
  Grid g = to_grid(mask);
  for (int i = 0; i < iterations; ++i) g = erode_grid(g);
  return Mask(mask.width(), mask.height(), g.region, g.bits);
}

Mask close(const Mask& mask) {
  Grid g = erode_grid(dilate_grid(to_grid(mask)));
  return Mask(mask.width(), mask.height(), g.region, g.bits);
}

Mask close(int width, int height, Roi region, std::vector<std::uint8_t> bits) {
  if (static_cast<std::size_t>(std::max(region.width(), 0)) *
          static_cast<std::size_t>(std::max(region.height(), 0)) !=
      bits.size()) {
    throw Error(ErrorCode::DimensionMismatch, "occupancy size does not match region");
  }
  Grid g = erode_grid(dilate_grid(Grid{region, std::move(bits)}));
  return Mask(width, height, g.region, g.bits);
}

std::size_t intersection_count(const Mask& a, const Mask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("masks are {}x{} and {}x{}", a.width(), a.height(), b.width(),
                            b.height()));
  }
  const Roi overlap = a.roi().intersect(b.roi());
  if (overlap.empty()) return 0;
  const auto row = [](const Mask& m, int v, int u0) {
    return m.bits().data() + static_cast<std::size_t>(v - m.roi().y0) * m.roi().width() +
           (u0 - m.roi().x0);
  };
  std::size_t inter = 0;
  const int n = overlap.width();
  for (int v = overlap.y0; v < overlap.y1; ++v) {
    const std::uint8_t* ra = row(a, v, overlap.x0);
    const std::uint8_t* rb = row(b, v, overlap.x0);
    for (int i = 0; i < n; ++i) inter += ra[i] & rb[i];
  }
  return inter;
}

double mask_iou(const Mask& a, const Mask& b) {
  const std::size_t inter = intersection_count(a, b);
  const std::size_t uni = a.count() + b.count() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace rowtracker
