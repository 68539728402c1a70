#pragma once

// Reference implementations and helpers shared by the unit tests and the acceptance runner.
// Everything here is written the slow, obvious way on purpose.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "nltv/image_io.hpp"
#include "nltv/raster.hpp"
#include "nltv/spectral.hpp"
#include "nltv/sure.hpp"
#include "nltv/variational.hpp"
#include "nltv/weights.hpp"

namespace nltv::oracle {

inline Raster random_raster(int rows, int cols, std::uint64_t seed, double lo = 0.0, double hi = 255.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  Raster r(rows, cols);
  for (auto& x : r.values()) x = dist(rng);
  return r;
}

/// Direct O((MN)^2) unitary DFT.
inline Spectrum naive_dft2(const Raster& u) {
  const int M = u.rows(), N = u.cols();
  Spectrum out(M, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(M) * N);
  for (int w1 = 0; w1 < M; ++w1)
    for (int w2 = 0; w2 < N; ++w2) {
      Complex s{};
      for (int i1 = 0; i1 < M; ++i1)
        for (int i2 = 0; i2 < N; ++i2) {
          // Reduce the phase exactly in integers before converting to radians.
          const long long a = (static_cast<long long>(w1) * i1 % M) * N + (static_cast<long long>(w2) * i2 % N) * M;
          const double phase = -2.0 * std::numbers::pi * static_cast<double>(a % (static_cast<long long>(M) * N)) /
                               (static_cast<double>(M) * N);
          s += u(i1, i2) * Complex(std::cos(phase), std::sin(phase));
        }
      out(w1, w2) = s * scale;
    }
  return out;
}

/// Patch distance evaluated straight from the definition with explicit mirror indexing.
template <class T>
double brute_patch_distance(const Grid<T>& f, Pixel i, Pixel j, int d, double sigma_s) {
  const int r = (d - 1) / 2;
  double num = 0.0, den = 0.0;
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b) {
      const double k = sigma_s > 0.0 ? std::exp(-(a * a + b * b) / (2.0 * sigma_s * sigma_s)) : 1.0;
      const int kr = reflect_index(i.row + a, f.rows()), kc = reflect_index(i.col + b, f.cols());
      const int tr = reflect_index(j.row + a, f.rows()), tc = reflect_index(j.col + b, f.cols());
      num += k * std::norm(std::complex<double>(f(kr, kc)) - std::complex<double>(f(tr, tc)));
      den += k;
    }
  return num / den;
}

/// Weight i -> j, or 0 when j is outside the image or outside i's window.
template <class T>
double brute_weight(const Grid<T>& f, Pixel i, Pixel j, const PatchGeometry& g) {
  if (j.row < 0 || j.col < 0 || j.row >= f.rows() || j.col >= f.cols()) return 0.0;
  const int R = g.window_radius();
  if (std::abs(i.row - j.row) > R || std::abs(i.col - j.col) > R || i == j) return 0.0;
  const double dist = brute_patch_distance(f, i, j, g.patch, g.kernel_sigma());
  return std::exp(-dist / (2.0 * g.sigma_r * g.sigma_r));
}

/// Central difference gradient of a scalar function of a raster.
inline Raster finite_difference_gradient(const std::function<double(const Raster&)>& fn, const Raster& u,
                                         double h) {
  Raster g(u.rows(), u.cols());
  Raster probe = u;
  for (std::size_t p = 0; p < u.size(); ++p) {
    probe[p] = u[p] + h;
    const double up = fn(probe);
    probe[p] = u[p] - h;
    const double dn = fn(probe);
    probe[p] = u[p];
    g[p] = (up - dn) / (2.0 * h);
  }
  return g;
}

/// ||a - b|| / max(||b||, tiny).
inline double relative_error(const Raster& a, const Raster& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += (a[k] - b[k]) * (a[k] - b[k]);
    den += b[k] * b[k];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline Raster load_corpus_image(const std::string& name) {
  return read_pgm(std::filesystem::path(NLTV_DATA_DIR) / "images" / (name + ".pgm"));
}

/// Central size x size crop of Lena.
inline Raster lena_crop(int size) { return crop(load_corpus_image("lena"), 256, 256, size, size); }

/// The k-step map v -> u^k with weights rebuilt from v and the step sizes held fixed.
inline Raster step_map(const Raster& v, const PatchGeometry& g, double lambda, const std::vector<double>& steps,
                       double beta = 1e-2) {
  const WeightField w = similarity_weights(v, g);
  return apply_steps(v, &w, nullptr, lambda, 0.0, beta, steps);
}

/// Central-difference Jacobian of `fn` at v, column l = d fn / d v(l).
template <class Fn>
DenseMatrix fd_jacobian(const Raster& v, Fn&& fn, double h) {
  const std::size_t P = v.size();
  DenseMatrix J(P);
  Raster probe = v;
  for (std::size_t l = 0; l < P; ++l) {
    probe[l] = v[l] + h;
    const Raster up = fn(probe);
    probe[l] = v[l] - h;
    const Raster dn = fn(probe);
    probe[l] = v[l];
    for (std::size_t i = 0; i < P; ++i) J.row(i)[l] = (up[i] - dn[i]) / (2.0 * h);
  }
  return J;
}

inline double relative_matrix_error(const DenseMatrix& a, const DenseMatrix& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t l = 0; l < a.size(); ++l) {
      const double d = a.row(i)[l] - b.row(i)[l];
      num += d * d;
      den += b.row(i)[l] * b.row(i)[l];
    }
  return std::sqrt(num / den);
}

}  // namespace nltv::oracle
