#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltv/raster.hpp"
#include "nltv/variational.hpp"
#include "nltv/weights.hpp"

namespace nltv {

/// Largest region (in pixels) for which the dense Jacobian is propagated.
inline constexpr std::size_t kMaxSurePixels = 32 * 32;

/// Dense square matrix, row-major.
class DenseMatrix {
public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {}

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }
  double* row(std::size_t i) noexcept { return a_.data() + i * n_; }
  const double* row(std::size_t i) const noexcept { return a_.data() + i * n_; }

  double trace() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += a_[i * n_ + i];
    return s;
  }

private:
  std::size_t n_ = 0;
  std::vector<double> a_;
};

/// d w(i,j) / d v(l) for a similarity weight, with j in the window of i.
///   w(i,j) * sum_k a(i,k) (v(k)-v(T k)) (delta(k,l) - delta(T k,l)) / (-sigma_r^2 sum_k a(i,k))
/// Patch samples outside the grid are mirrored, so l always indexes an in-grid pixel.
inline double weight_jacobian(const Raster& v, const PatchGeometry& geom, Pixel i, Pixel j, Pixel l) {
  geom.validate();
  const int r = geom.patch_radius();
  const double s = geom.kernel_sigma();
  const double w = std::exp(-patch_distance(v, i, j, geom) / (2.0 * geom.sigma_r * geom.sigma_r));
  double num = 0.0, den = 0.0;
  for (int qr = -r; qr <= r; ++qr)
    for (int qc = -r; qc <= r; ++qc) {
      const double a = s > 0.0 ? std::exp(-static_cast<double>(qr * qr + qc * qc) / (2.0 * s * s)) : 1.0;
      const Pixel k{reflect_index(i.row + qr, v.rows()), reflect_index(i.col + qc, v.cols())};
      const Pixel tk{reflect_index(j.row + qr, v.rows()), reflect_index(j.col + qc, v.cols())};
      const double dv = v(k.row, k.col) - v(tk.row, tk.col);
      const double delta = static_cast<double>(k == l) - static_cast<double>(tk == l);
      num += a * dv * delta;
      den += a;
    }
  return w * num / (-geom.sigma_r * geom.sigma_r * den);
}

/// Sparse derivative of every weight slot with respect to the noisy image.
struct WeightDerivatives {
  struct Entry {
    int pixel;
    double value;
  };
  std::vector<std::size_t> begin;  // per slot, into entries; size slots+1
  std::vector<Entry> entries;

  std::span<const Entry> slot(std::size_t s) const { return {entries.data() + begin[s], begin[s + 1] - begin[s]}; }
};

/// Derivatives of all slots of `w` (built from v with geom) by the patch-sum formula.
inline WeightDerivatives weight_derivatives(const Raster& v, const WeightField& w, const PatchGeometry& geom) {
  const int rows = v.rows(), cols = v.cols();
  const int r = geom.patch_radius();
  const std::vector<double> a1 = detail::kernel_1d(geom);
  double a_sum = 0.0;
  for (double x : a1) a_sum += x;
  const double scale = -1.0 / (geom.sigma_r * geom.sigma_r * a_sum * a_sum);

  WeightDerivatives out;
  const std::size_t slots = w.pixels() * w.slots_per_pixel();
  out.begin.reserve(slots + 1);
  std::vector<double> acc(w.pixels(), 0.0);
  std::vector<int> touched;
  std::vector<char> seen(w.pixels(), 0);

  for (int ir = 0; ir < rows; ++ir)
    for (int ic = 0; ic < cols; ++ic) {
      const std::size_t p = w.pixel_index(ir, ic);
      for (std::size_t k = 0; k < w.slots_per_pixel(); ++k) {
        out.begin.push_back(out.entries.size());
        const double wk = w.weight(p, k);
        if (wk == 0.0) continue;
        const int jr = ir + w.offsets()[k].dr, jc = ic + w.offsets()[k].dc;
        for (int qr = -r; qr <= r; ++qr)
          for (int qc = -r; qc <= r; ++qc) {
            const int kk = reflect_index(ir + qr, rows) * cols + reflect_index(ic + qc, cols);
            const int tk = reflect_index(jr + qr, rows) * cols + reflect_index(jc + qc, cols);
            const double c = wk * a1[qr + r] * a1[qc + r] * (v[kk] - v[tk]) * scale;
            for (const auto& [idx, sign] : {std::pair{kk, 1.0}, std::pair{tk, -1.0}}) {
              if (!seen[idx]) {
                seen[idx] = 1;
                touched.push_back(idx);
              }
              acc[idx] += sign * c;
            }
          }
        std::sort(touched.begin(), touched.end());
        for (int idx : touched) {
          if (acc[idx] != 0.0) out.entries.push_back({idx, acc[idx]});
          acc[idx] = 0.0;
          seen[idx] = 0;
        }
        touched.clear();
      }
    }
  out.begin.push_back(out.entries.size());
  return out;
}

/// d(grad E(u))(i) / d v(l) for the NLTV energy, given J = du/dv:
///   lambda (P1 + P2 + P3) + J - I
/// with the beta-smoothed magnitudes throughout. Requires a symmetric weight field.
inline DenseMatrix grad_jacobian(const Raster& u, const Raster& v, const WeightField& w,
                                 const WeightDerivatives& dw, const DenseMatrix& J, double lambda, double beta) {
  require_same_shape(u, v, "grad_jacobian");
  if (!w.symmetric()) throw std::invalid_argument("grad_jacobian needs symmetric weights");
  const std::size_t P = w.pixels(), K = w.slots_per_pixel();
  if (J.size() != P) throw DimensionError("grad_jacobian: Jacobian size does not match the image");

  DenseMatrix D(P);
  for (std::size_t i = 0; i < P; ++i) {
    double* d = D.row(i);
    const double* ji = J.row(i);
    for (std::size_t l = 0; l < P; ++l) d[l] = ji[l];
    d[i] -= 1.0;
  }
  if (lambda == 0.0) return D;

  const std::vector<double> m = detail::magnitudes(u, w, beta);
  std::vector<double> inv_m(P);
  for (std::size_t i = 0; i < P; ++i) inv_m[i] = 1.0 / m[i];

  // G(i,.) = d(1/m_i)/dv
  DenseMatrix G(P);
  for (std::size_t i = 0; i < P; ++i) {
    double* g = G.row(i);
    const double* ji = J.row(i);
    double self = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double wk = w.weight(i, k);
      if (wk == 0.0) continue;
      const std::size_t j = static_cast<std::size_t>(w.target(i, k));
      const double diff = u[i] - u[j];
      const double alpha = 2.0 * diff * wk;
      self += alpha;
      const double* jj = J.row(j);
      for (std::size_t l = 0; l < P; ++l) g[l] -= alpha * jj[l];
      for (const auto& e : dw.slot(w.slot(i, k))) g[e.pixel] += diff * diff * e.value;
    }
    for (std::size_t l = 0; l < P; ++l) g[l] += self * ji[l];
    const double f = -0.5 * inv_m[i] * inv_m[i] * inv_m[i];
    for (std::size_t l = 0; l < P; ++l) g[l] *= f;
  }

  std::vector<double> row(P);
  for (std::size_t i = 0; i < P; ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    const double* ji = J.row(i);
    const double* gi = G.row(i);
    double sum_b = 0.0, sum_c = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double wk = w.weight(i, k);
      if (wk == 0.0) continue;
      const std::size_t j = static_cast<std::size_t>(w.target(i, k));
      const double diff = u[i] - u[j];
      const double both = inv_m[i] + inv_m[j];
      const double b = wk * both;  // P1 coefficient
      const double c = diff * wk;  // P3 coefficient
      sum_b += b;
      sum_c += c;
      const double* jj = J.row(j);
      const double* gj = G.row(j);
      for (std::size_t l = 0; l < P; ++l) row[l] += c * gj[l] - b * jj[l];
      for (const auto& e : dw.slot(w.slot(i, k))) row[e.pixel] += diff * both * e.value;  // P2
    }
    double* d = D.row(i);
    for (std::size_t l = 0; l < P; ++l) d[l] += lambda * (row[l] + sum_b * ji[l] + sum_c * gi[l]);
  }
  return D;
}

struct SureReport {
  std::vector<double> sure;        // per iterate u^0..u^K
  std::vector<double> divergence;  // trace of du^k/dv
  std::vector<double> residual;    // ||u^k - v||^2 / P
  std::vector<double> steps;       // accepted step sizes, held constant in the propagation
  Raster result;
  double lambda = 0.0;

  double final_sure() const { return sure.back(); }
};

/// SURE_k = ||u^k - v||^2/P - sigma^2 + 2 sigma^2 div_k / P.
inline double sure_value(double residual_mean, double divergence, double sigma, std::size_t pixels) {
  const double s2 = sigma * sigma;
  return residual_mean - s2 + 2.0 * s2 * divergence / static_cast<double>(pixels);
}

inline void check_sure_size(const Raster& v) {
  if (v.size() > kMaxSurePixels)
    throw std::length_error("SURE region of " + std::to_string(v.rows()) + "x" + std::to_string(v.cols()) +
                            " exceeds the dense Jacobian limit of 1024 pixels; split the image into "
                            "regions of at most 32x32");
}

/// Runs the NLTV descent on v (weights from v with geom, only cfg.lambda is used) and
/// propagates J^{k+1} = J^k - t_k d(grad E(u^k))/dv from J^0 = I, reporting SURE per iterate.
inline SureReport sure_trace(const Raster& v, double sigma, const PatchGeometry& geom, const SolverConfig& cfg) {
  check_sure_size(v);
  const WeightField w = similarity_weights(v, geom);
  SolverConfig nltv = cfg;
  nltv.lambda_f = 0.0;
  DescentTrace trace = descend(v, &w, nullptr, nltv, DescentOptions::keeping_iterates());

  const WeightDerivatives dw = weight_derivatives(v, w, geom);
  const std::size_t P = v.size();
  SureReport rep;
  rep.lambda = cfg.lambda;
  rep.steps = trace.steps;
  DenseMatrix J = DenseMatrix::identity(P);
  for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
    const Raster& u = trace.iterates[k];
    const double res = sum_squared_difference(u, v) / static_cast<double>(P);
    const double div = J.trace();
    rep.residual.push_back(res);
    rep.divergence.push_back(div);
    rep.sure.push_back(sure_value(res, div, sigma, P));
    if (k + 1 == trace.iterates.size()) break;
    const DenseMatrix D = grad_jacobian(u, v, w, dw, J, cfg.lambda, cfg.beta);
    const double t = trace.steps[k];
    for (std::size_t i = 0; i < P; ++i) {
      double* jr = J.row(i);
      const double* dr = D.row(i);
      for (std::size_t l = 0; l < P; ++l) jr[l] -= t * dr[l];
    }
  }
  rep.result = std::move(trace.result);
  return rep;
}

struct LambdaChoice {
  double lambda = 0.0;
  std::size_t index = 0;
  std::vector<SureReport> reports;  // one per candidate, in input order
};

/// Candidate with the smallest final SURE; ties go to the smaller lambda.
inline LambdaChoice select_lambda(const Raster& v, double sigma, const std::vector<double>& candidates,
                                  const PatchGeometry& geom, const SolverConfig& cfg) {
  if (candidates.empty()) throw std::invalid_argument("select_lambda needs at least one candidate");
  check_sure_size(v);
  LambdaChoice out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    SolverConfig run = cfg;
    run.lambda = candidates[c];
    out.reports.push_back(sure_trace(v, sigma, geom, run));
    const double s = out.reports.back().final_sure();
    const double best = out.reports[out.index].final_sure();
    if (c == 0 || s < best || (s == best && candidates[c] < candidates[out.index])) out.index = c;
  }
  out.lambda = candidates[out.index];
  return out;
}

}  // namespace nltv
