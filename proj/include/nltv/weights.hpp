#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nltv/raster.hpp"
#include "nltv/spectral.hpp"

namespace nltv {

/// Patch side d, search-window side D, similarity bandwidth sigma_r and the
/// Gaussian patch kernel width sigma_s (defaults to (d-1)/4).
struct PatchGeometry {
  int patch = 9;
  int window = 3;
  double sigma_r = 20.0;
  double sigma_s = -1.0;  // < 0 selects the default (d-1)/4

  static PatchGeometry make(int patch, int window, double sigma_r) { return {patch, window, sigma_r, -1.0}; }

  double kernel_sigma() const noexcept { return sigma_s < 0.0 ? (patch - 1) / 4.0 : sigma_s; }
  int patch_radius() const noexcept { return (patch - 1) / 2; }
  int window_radius() const noexcept { return (window - 1) / 2; }

  void validate() const {
    if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("patch side must be odd and >= 1");
    if (window < 1 || window % 2 == 0) throw std::invalid_argument("search window side must be odd and >= 1");
    if (!(sigma_r > 0.0)) throw std::invalid_argument("sigma_r must be > 0");
  }
};

struct Offset {
  int dr = 0;
  int dc = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Window offsets in row-major order with the center removed.
inline std::vector<Offset> window_offsets(int window) {
  std::vector<Offset> out;
  const int r = (window - 1) / 2;
  for (int dr = -r; dr <= r; ++dr)
    for (int dc = -r; dc <= r; ++dc)
      if (dr != 0 || dc != 0) out.push_back({dr, dc});
  return out;
}

/// Directed weights w(i -> j) stored densely: one slot per pixel per offset.
/// Slot targets are the reflected positions i + offset; similarity fields
/// store 0 for offsets that leave the image, so those edges are inert.
class WeightField {
public:
  WeightField() = default;
  WeightField(int rows, int cols, std::vector<Offset> offsets, bool symmetric)
      : rows_(rows), cols_(cols), offsets_(std::move(offsets)), symmetric_(symmetric),
        weights_(static_cast<std::size_t>(rows) * cols * offsets_.size(), 0.0),
        targets_(weights_.size(), 0) {
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c)
        for (std::size_t k = 0; k < offsets_.size(); ++k) {
          const int tr = reflect_index(r + offsets_[k].dr, rows_);
          const int tc = reflect_index(c + offsets_[k].dc, cols_);
          targets_[slot(pixel_index(r, c), k)] = tr * cols_ + tc;
        }
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }
  std::size_t slots_per_pixel() const noexcept { return offsets_.size(); }
  const std::vector<Offset>& offsets() const noexcept { return offsets_; }
  /// Whether w(i->j) == w(j->i) holds by construction.
  bool symmetric() const noexcept { return symmetric_; }

  std::size_t pixel_index(int r, int c) const noexcept { return static_cast<std::size_t>(r) * cols_ + c; }
  std::size_t slot(std::size_t pixel, std::size_t k) const noexcept { return pixel * offsets_.size() + k; }

  double weight(std::size_t pixel, std::size_t k) const noexcept { return weights_[slot(pixel, k)]; }
  double& weight(std::size_t pixel, std::size_t k) noexcept { return weights_[slot(pixel, k)]; }
  int target(std::size_t pixel, std::size_t k) const noexcept { return targets_[slot(pixel, k)]; }

  /// Weight from pixel i to pixel j (0 when j is not in i's window).
  double between(Pixel i, Pixel j) const {
    const std::size_t pi = pixel_index(i.row, i.col);
    for (std::size_t k = 0; k < offsets_.size(); ++k)
      if (offsets_[k] == Offset{j.row - i.row, j.col - i.col}) return weight(pi, k);
    return 0.0;
  }

  /// True when offset k from (r, c) stays inside the image.
  bool in_image(int r, int c, std::size_t k) const noexcept {
    const int tr = r + offsets_[k].dr, tc = c + offsets_[k].dc;
    return tr >= 0 && tr < rows_ && tc >= 0 && tc < cols_;
  }

  std::span<const double> raw_weights() const noexcept { return weights_; }
  std::span<const int> raw_targets() const noexcept { return targets_; }

  /// Number of slots holding a nonzero weight.
  std::size_t nonzero_count() const noexcept {
    std::size_t n = 0;
    for (double w : weights_) n += w != 0.0;
    return n;
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Offset> offsets_;
  bool symmetric_ = true;
  std::vector<double> weights_;
  std::vector<int> targets_;
};

namespace detail {

inline double squared_modulus(double x) noexcept { return x * x; }
inline double squared_modulus(const Complex& x) noexcept { return std::norm(x); }

/// 1D factor of the separable patch kernel a(i,k) = exp(-|i-k|^2 / (2 sigma_s^2)).
inline std::vector<double> kernel_1d(const PatchGeometry& g) {
  const int r = g.patch_radius();
  const double s = g.kernel_sigma();
  std::vector<double> a(static_cast<std::size_t>(2 * r + 1), 1.0);
  if (s > 0.0)
    for (int q = -r; q <= r; ++q) a[q + r] = std::exp(-static_cast<double>(q * q) / (2.0 * s * s));
  return a;
}

}  // namespace detail

/// Gaussian-weighted mean of |f(k) - f(T(k))|^2 over the patch around i, T(k) = k - i + j.
/// Patch samples outside the grid are mirrored back inside.
template <class T>
double patch_distance(const Grid<T>& field, Pixel i, Pixel j, const PatchGeometry& geom) {
  geom.validate();
  const int r = geom.patch_radius();
  const double s = geom.kernel_sigma();
  double num = 0.0, den = 0.0;
  for (int qr = -r; qr <= r; ++qr)
    for (int qc = -r; qc <= r; ++qc) {
      const double a = s > 0.0 ? std::exp(-static_cast<double>(qr * qr + qc * qc) / (2.0 * s * s)) : 1.0;
      const auto diff = field.at_reflected(i.row + qr, i.col + qc) - field.at_reflected(j.row + qr, j.col + qc);
      num += a * detail::squared_modulus(diff);
      den += a;
    }
  return num / den;
}

namespace detail {

/// Computes the similarity-weight plane of each window offset in turn and hands it to
/// visit(k, offset, plane), plane[r*cols+c] = w((r,c) -> (r,c)+offset), or 0 when the
/// target leaves the image.
///
/// Patch sums are evaluated per offset as a separable convolution of the squared
/// difference image; the addends for w(i->j) and w(j->i) coincide term by term, so the
/// weights are symmetric to the last bit.
template <class T, class Visit>
void visit_similarity_planes(const Grid<T>& field, const PatchGeometry& geom, Visit&& visit) {
  geom.validate();
  const int rows = field.rows(), cols = field.cols();
  const int rd = geom.patch_radius();
  const int margin = rd + geom.window_radius();
  const int prow = rows + 2 * margin, pcol = cols + 2 * margin;

  std::vector<T> padded(static_cast<std::size_t>(prow) * pcol);
  for (int r = 0; r < prow; ++r)
    for (int c = 0; c < pcol; ++c) padded[static_cast<std::size_t>(r) * pcol + c] = field.at_reflected(r - margin, c - margin);

  const std::vector<double> a = kernel_1d(geom);
  double a_sum = 0.0;
  for (double x : a) a_sum += x;
  const double norm = a_sum * a_sum;
  const double inv_two_sr2 = 1.0 / (2.0 * geom.sigma_r * geom.sigma_r);

  // Squared differences on rows/cols [-rd, dim+rd), stored with origin shifted by rd.
  const int drow = rows + 2 * rd, dcol = cols + 2 * rd;
  std::vector<double> diff(static_cast<std::size_t>(drow) * dcol);
  std::vector<double> horiz(static_cast<std::size_t>(drow) * cols);
  std::vector<double> plane(static_cast<std::size_t>(rows) * cols);

  const std::vector<Offset> offs = window_offsets(geom.window);
  for (std::size_t k = 0; k < offs.size(); ++k) {
    const Offset o = offs[k];
    for (int r = 0; r < drow; ++r) {
      const T* p0 = &padded[static_cast<std::size_t>(r + margin - rd) * pcol + (margin - rd)];
      const T* p1 = &padded[static_cast<std::size_t>(r + margin - rd + o.dr) * pcol + (margin - rd + o.dc)];
      double* out = &diff[static_cast<std::size_t>(r) * dcol];
      for (int c = 0; c < dcol; ++c) out[c] = squared_modulus(p0[c] - p1[c]);
    }
    for (int r = 0; r < drow; ++r) {
      const double* in = &diff[static_cast<std::size_t>(r) * dcol];
      double* out = &horiz[static_cast<std::size_t>(r) * cols];
      for (int c = 0; c < cols; ++c) {
        double s = 0.0;
        for (int q = 0; q <= 2 * rd; ++q) s += a[q] * in[c + q];
        out[c] = s;
      }
    }
    for (int r = 0; r < rows; ++r) {
      const bool row_ok = r + o.dr >= 0 && r + o.dr < rows;
      for (int c = 0; c < cols; ++c) {
        double& dst = plane[static_cast<std::size_t>(r) * cols + c];
        if (!row_ok || c + o.dc < 0 || c + o.dc >= cols) {
          dst = 0.0;
          continue;
        }
        double s = 0.0;
        for (int q = 0; q <= 2 * rd; ++q) s += a[q] * horiz[static_cast<std::size_t>(r + q) * cols + c];
        dst = std::exp(-(s / norm) * inv_two_sr2);
      }
    }
    visit(k, o, static_cast<const std::vector<double>&>(plane));
  }
}

}  // namespace detail

/// NL-means style weights exp(-patch_distance / (2 sigma_r^2)) for every in-image j in the
/// D x D window around i (center excluded). Works on images and on spectra.
template <class T>
WeightField similarity_weights(const Grid<T>& field, const PatchGeometry& geom) {
  geom.validate();
  WeightField wf(field.rows(), field.cols(), window_offsets(geom.window), true);
  detail::visit_similarity_planes(field, geom, [&](std::size_t k, Offset, const std::vector<double>& plane) {
    for (std::size_t p = 0; p < plane.size(); ++p) wf.weight(p, k) = plane[p];
  });
  return wf;
}

/// Indicator weights toward the down and right neighbours; with these the nonlocal
/// energy is the classical (isotropic, forward-difference) total variation.
/// Neighbours past the last row/column reflect onto the pixel itself.
inline WeightField tv_weights(int rows, int cols) {
  if (rows < 2 || cols < 2) throw DimensionError("tv_weights needs at least a 2x2 grid");
  WeightField wf(rows, cols, {{1, 0}, {0, 1}}, false);
  for (std::size_t p = 0; p < wf.pixels(); ++p)
    for (std::size_t k = 0; k < 2; ++k) wf.weight(p, k) = 1.0;
  return wf;
}

}  // namespace nltv
