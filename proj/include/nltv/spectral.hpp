#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "nltv/raster.hpp"

namespace nltv {

using Complex = std::complex<double>;

/// Complex coefficients on the same M x N index set as the image.
using Spectrum = Grid<Complex>;

/// Unnormalized 1D DFT of a fixed length. Power-of-two lengths use an iterative
/// radix-2 transform; other lengths go through Bluestein's chirp-z identity.
class Fft1d {
public:
  explicit Fft1d(std::size_t n) : n_(n) {
    if (n_ == 0) throw std::invalid_argument("FFT length must be positive");
    if (is_pow2(n_)) {
      init_radix2(n_, twiddles_, bitrev_);
    } else {
      m_ = 1;
      while (m_ < 2 * n_ - 1) m_ <<= 1;
      init_radix2(m_, twiddles_, bitrev_);
      chirp_.resize(n_);
      for (std::size_t k = 0; k < n_; ++k) {
        // k^2 mod 2n keeps the angle argument small for large k.
        const std::size_t k2 = (k * k) % (2 * n_);
        const double angle = std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n_);
        chirp_[k] = std::polar(1.0, -angle);
      }
      std::vector<Complex> b(m_, Complex{});
      b[0] = std::conj(chirp_[0]);
      for (std::size_t k = 1; k < n_; ++k) b[k] = b[m_ - k] = std::conj(chirp_[k]);
      radix2(b, false);
      kernel_ = std::move(b);
      work_.resize(m_);
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// In-place; inverse=true uses the positive exponent. No scaling in either direction.
  void transform(Complex* data, bool inverse) {
    if (m_ == 0) {
      radix2_inplace(data, n_, inverse);
      return;
    }
    // Inverse via conjugation: conj(F(conj(x))).
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex x = inverse ? std::conj(data[k]) : data[k];
      work_[k] = x * chirp_[k];
    }
    std::fill(work_.begin() + static_cast<std::ptrdiff_t>(n_), work_.end(), Complex{});
    radix2(work_, false);
    for (std::size_t k = 0; k < m_; ++k) work_[k] *= kernel_[k];
    radix2(work_, true);
    const double scale = 1.0 / static_cast<double>(m_);
    for (std::size_t k = 0; k < n_; ++k) {
      const Complex y = work_[k] * scale * chirp_[k];
      data[k] = inverse ? std::conj(y) : y;
    }
  }

private:
  static bool is_pow2(std::size_t n) { return (n & (n - 1)) == 0; }

  static void init_radix2(std::size_t n, std::vector<Complex>& tw, std::vector<std::size_t>& rev) {
    tw.resize(n / 2 > 0 ? n / 2 : 1);
    for (std::size_t k = 0; k < n / 2; ++k)
      tw[k] = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
    rev.resize(n);
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b)
        if (k & (std::size_t{1} << b)) r |= std::size_t{1} << (bits - 1 - b);
      rev[k] = r;
    }
  }

  void radix2(std::vector<Complex>& a, bool inverse) const { radix2_inplace(a.data(), a.size(), inverse); }

  void radix2_inplace(Complex* a, std::size_t n, bool inverse) const {
    for (std::size_t k = 0; k < n; ++k)
      if (k < bitrev_[k]) std::swap(a[k], a[bitrev_[k]]);
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          Complex w = twiddles_[k * stride];
          if (inverse) w = std::conj(w);
          const Complex t = w * a[start + k + half];
          a[start + k + half] = a[start + k] - t;
          a[start + k] += t;
        }
      }
    }
  }

  std::size_t n_;
  std::size_t m_ = 0;  // Bluestein convolution length, 0 for radix-2
  std::vector<Complex> twiddles_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_;
  std::vector<Complex> work_;
};

/// Unitary 2D DFT for one grid shape: forward and inverse both scale by (MN)^(-1/2),
/// so Frobenius norms are preserved. Holds scratch buffers; not safe to share across threads.
class Fourier2d {
public:
  Fourier2d(int rows, int cols)
      : rows_(rows), cols_(cols), row_fft_(static_cast<std::size_t>(cols)),
        col_fft_(static_cast<std::size_t>(rows)), column_(static_cast<std::size_t>(rows)),
        scale_(1.0 / std::sqrt(static_cast<double>(rows) * static_cast<double>(cols))) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }

  Spectrum forward(const Raster& image) {
    check(image.rows(), image.cols());
    Spectrum s(rows_, cols_);
    for (std::size_t k = 0; k < image.size(); ++k) s[k] = Complex(image[k], 0.0);
    apply(s, false);
    return s;
  }

  Spectrum forward(const Spectrum& spec) {
    check(spec.rows(), spec.cols());
    Spectrum s = spec;
    apply(s, false);
    return s;
  }

  Spectrum inverse(const Spectrum& spec) {
    check(spec.rows(), spec.cols());
    Spectrum s = spec;
    apply(s, true);
    return s;
  }

  /// Unitary inverse followed by taking the real part.
  Raster inverse_real(const Spectrum& spec) {
    const Spectrum s = inverse(spec);
    Raster out(rows_, cols_);
    for (std::size_t k = 0; k < s.size(); ++k) out[k] = s[k].real();
    return out;
  }

private:
  void check(int r, int c) const {
    if (r != rows_ || c != cols_) throw DimensionError("Fourier2d: grid shape does not match the plan");
  }

  void apply(Spectrum& s, bool inverse) {
    for (int r = 0; r < rows_; ++r) row_fft_.transform(&s(r, 0), inverse);
    for (int c = 0; c < cols_; ++c) {
      for (int r = 0; r < rows_; ++r) column_[r] = s(r, c);
      col_fft_.transform(column_.data(), inverse);
      for (int r = 0; r < rows_; ++r) s(r, c) = column_[r] * scale_;
    }
  }

  int rows_;
  int cols_;
  Fft1d row_fft_;
  Fft1d col_fft_;
  std::vector<Complex> column_;
  double scale_;
};

inline Spectrum dft2(const Raster& image) { return Fourier2d(image.rows(), image.cols()).forward(image); }

inline Spectrum idft2(const Spectrum& spec) { return Fourier2d(spec.rows(), spec.cols()).inverse(spec); }

inline Raster idft2_real(const Spectrum& spec) {
  return Fourier2d(spec.rows(), spec.cols()).inverse_real(spec);
}

inline double frobenius_norm(const Raster& r) {
  double s = 0.0;
  for (double x : r.values()) s += x * x;
  return std::sqrt(s);
}

inline double frobenius_norm(const Spectrum& r) {
  double s = 0.0;
  for (const auto& x : r.values()) s += std::norm(x);
  return std::sqrt(s);
}

/// Real and imaginary planes, for dumping a spectrum as two NLTVF1 images.
inline std::pair<Raster, Raster> split_planes(const Spectrum& s) {
  Raster re(s.rows(), s.cols()), im(s.rows(), s.cols());
  for (std::size_t k = 0; k < s.size(); ++k) {
    re[k] = s[k].real();
    im[k] = s[k].imag();
  }
  return {std::move(re), std::move(im)};
}

}  // namespace nltv
