#pragma once

// Shared fixtures and independent oracles for the test suites. The oracles
// deliberately avoid the library's own math (no Eigen, no rowtracker calls).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rowtracker/geom.hpp"

namespace rowtracker::testing {

/// Quarter-scale rig: same field of view as the default camera, 16x fewer
/// pixels, so on-disk rows stay small.
inline Calibration small_calibration() {
  Calibration c;
  c.intrinsics = Intrinsics{300.0, 300.0, 160.0, 90.0, 320, 180};
  return c;
}

inline Intrinsics k600() { return Intrinsics{600.0, 600.0, 640.0, 360.0, 1280, 720}; }

/// Fresh scratch directory under ROWTRACKER_TEST_TMP (or the system temp dir).
inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* base = std::getenv("ROWTRACKER_TEST_TMP");
  std::filesystem::path root = base ? std::filesystem::path(base)
                                    : std::filesystem::temp_directory_path() / "rowtracker_tests";
  std::filesystem::path dir = root / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// True iff both trees hold the same relative paths with identical bytes.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> fa, fb;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) fa.push_back(std::filesystem::relative(e.path(), a));
  }
  for (const auto& e : std::filesystem::recursive_directory_iterator(b)) {
    if (e.is_regular_file()) fb.push_back(std::filesystem::relative(e.path(), b));
  }
  std::sort(fa.begin(), fa.end());
  std::sort(fb.begin(), fb.end());
  if (fa != fb) return false;
  for (const auto& rel : fa) {
    if (slurp(a / rel) != slurp(b / rel)) return false;
  }
  return true;
}

// 4x4 homogeneous matrices as plain arrays.
using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 to_mat4(const Transform& t) {
  Mat4 m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m[r][c] = t.rotation()(r, c);
    m[r][3] = t.translation()(r);
  }
  m[3][3] = 1.0;
  return m;
}

inline Mat4 mat_mul(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += a[r][k] * b[k][c];
      out[r][c] = s;
    }
  }
  return out;
}

/// Inverse of a rigid 4x4 by Gauss-Jordan elimination, no rigidity shortcut.
inline Mat4 mat_inverse(Mat4 a) {
  Mat4 inv{};
  for (int i = 0; i < 4; ++i) inv[i][i] = 1.0;
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double p = a[col][col];
    for (int c = 0; c < 4; ++c) {
      a[col][c] /= p;
      inv[col][c] /= p;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int c = 0; c < 4; ++c) {
        a[r][c] -= f * a[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

inline double max_abs_diff(const Mat4& a, const Mat4& b) {
  double m = 0.0;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m = std::max(m, std::fabs(a[r][c] - b[r][c]));
  }
  return m;
}

// Brute-force metric oracles.

inline double oracle_ne(long long gt, long long pred) {
  const long long d = gt > pred ? gt - pred : pred - gt;
  return static_cast<double>(d) / static_cast<double>(gt);
}

inline double oracle_r2(const std::vector<int>& g, const std::vector<int>& p) {
  long double mean = 0.0L;
  for (int v : g) mean += v;
  mean /= static_cast<long double>(g.size());
  long double res = 0.0L, tot = 0.0L;
  for (std::size_t i = 0; i < g.size(); ++i) {
    res += static_cast<long double>(g[i] - p[i]) * (g[i] - p[i]);
    tot += (g[i] - mean) * (g[i] - mean);
  }
  return static_cast<double>(1.0L - res / tot);
}

inline std::pair<double, double> oracle_mean_std(const std::vector<double>& xs) {
  long double s = 0.0L;
  for (double x : xs) s += x;
  const long double mean = s / static_cast<long double>(xs.size());
  long double ss = 0.0L;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {static_cast<double>(mean),
          static_cast<double>(std::sqrt(ss / static_cast<long double>(xs.size())))};
}

}  // namespace rowtracker::testing
