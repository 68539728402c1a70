#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace nltv {

/// Raised when two grids that must agree in shape do not.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Row/column position on a grid.
struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Half-sample symmetric extension: -1 -> 0, len -> len-1, period 2*len.
/// Total on all signed indices.
constexpr int reflect_index(long long k, int len) noexcept {
  if (len <= 1) return 0;
  const long long period = 2LL * len;
  long long m = k % period;
  if (m < 0) m += period;
  return static_cast<int>(m < len ? m : period - 1 - m);
}

/// Dense row-major M x N grid of values.
template <class T>
class Grid {
public:
  using value_type = T;

  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}
  Grid(int rows, int cols, std::vector<T> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != checked_size(rows, cols))
      throw DimensionError("grid data size does not match " + std::to_string(rows) + "x" +
                           std::to_string(cols));
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int r, int c) noexcept { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const noexcept { return data_[index(r, c)]; }
  T& operator[](std::size_t k) noexcept { return data_[k]; }
  const T& operator[](std::size_t k) const noexcept { return data_[k]; }

  /// Value at (r, c) with out-of-range coordinates mirrored back inside.
  const T& at_reflected(long long r, long long c) const noexcept {
    return data_[index(reflect_index(r, rows_), reflect_index(c, cols_))];
  }

  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  std::vector<T>& storage() noexcept { return data_; }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool same_shape(const Grid& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  static std::size_t checked_size(int rows, int cols) {
    if (rows < 1 || cols < 1)
      throw DimensionError("grid dimensions must be positive, got " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Real-valued intensity image. Values are nominally in [0,255] but unconstrained.
using Raster = Grid<double>;

inline void require_same_shape(const Raster& a, const Raster& b, std::string_view what) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(what) + ": dimension mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
}

/// Copy of the rectangle [row0,row0+rows) x [col0,col0+cols).
inline Raster crop(const Raster& img, int row0, int col0, int rows, int cols) {
  if (row0 < 0 || col0 < 0 || row0 + rows > img.rows() || col0 + cols > img.cols())
    throw DimensionError("crop rectangle exceeds image bounds");
  Raster out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out(r, c) = img(row0 + r, col0 + c);
  return out;
}

inline double sum_squared_difference(const Raster& a, const Raster& b) {
  require_same_shape(a, b, "sum_squared_difference");
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

inline double mse(const Raster& a, const Raster& b) {
  require_same_shape(a, b, "mse");
  return sum_squared_difference(a, b) / static_cast<double>(a.size());
}

inline double psnr_from_mse(double m) {
  if (m <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / m);
}

/// Peak signal-to-noise ratio in dB for 8-bit peak; +infinity when the images agree.
inline double psnr(const Raster& reference, const Raster& test) { return psnr_from_mse(mse(reference, test)); }

// ---------------------------------------------------------------------------
// Gaussian noise

/// Generator identifier written to every report.
inline constexpr std::string_view kPrngId = "mt19937_64/box-muller-v1";

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string prng_id{kPrngId};
};

/// Standard normal variates from std::mt19937_64 (whose output sequence is fixed by the
/// standard) through the Box-Muller transform, so streams are identical across toolchains.
class GaussianStream {
public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // 53-bit uniform in (0,1]; the log never sees zero.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// The noise field eta alone, row-major.
inline Raster gaussian_noise(int rows, int cols, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw std::invalid_argument("noise sigma must be >= 0");
  if (spec.prng_id != kPrngId)
    throw std::invalid_argument("unsupported prng id '" + spec.prng_id + "'");
  Raster eta(rows, cols, 0.0);
  if (spec.sigma == 0.0) return eta;
  GaussianStream g(spec.seed);
  for (auto& x : eta.values()) x = spec.sigma * g.next();
  return eta;
}

/// clean + eta with eta ~ N(0, sigma^2) i.i.d.; no clipping.
inline Raster add_gaussian_noise(const Raster& clean, const NoiseSpec& spec) {
  const Raster eta = gaussian_noise(clean.rows(), clean.cols(), spec);
  Raster out = clean;
  if (spec.sigma == 0.0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += eta[k];
  return out;
}

inline bool all_finite(const Raster& r) {
  for (double x : r.values())
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace nltv
