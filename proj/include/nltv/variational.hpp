#pragma once

#include <cfloat>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltv/raster.hpp"
#include "nltv/spectral.hpp"
#include "nltv/weights.hpp"

namespace nltv {

/// Regularization weights and gradient-descent controls.
struct SolverConfig {
  double lambda = 15.0;    // spatial regularizer weight
  double lambda_f = 0.0;   // frequency regularizer weight
  double beta = 1e-2;      // smoothing inside the square roots
  double t_init = 0.2;     // first trial step
  int max_halvings = 30;
  int n_iter = 50;
  double eps = 0.0;        // stop when ||u^{k+1}-u^k|| < eps*sqrt(MN); 0 disables

  void validate() const {
    if (!(lambda >= 0.0) || !(lambda_f >= 0.0)) throw std::invalid_argument("lambda values must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be > 0");
    if (!(t_init > 0.0)) throw std::invalid_argument("t_init must be > 0");
    if (n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
    if (max_halvings < 0) throw std::invalid_argument("max_halvings must be >= 0");
    if (!(eps >= 0.0)) throw std::invalid_argument("eps must be >= 0");
  }
};

enum class StopReason { IterationCap, SmallChange, ZeroGradient, Stationary };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::IterationCap: return "iteration-cap";
    case StopReason::SmallChange: return "small-change";
    case StopReason::ZeroGradient: return "zero-gradient";
    case StopReason::Stationary: return "stationary";
  }
  return "?";
}

struct DescentTrace {
  Raster result;
  std::vector<Raster> iterates;  // u^0..u^K, only when requested
  std::vector<double> energies;  // E(u^0)..E(u^K)
  std::vector<double> steps;     // accepted t_0..t_{K-1}
  StopReason reason = StopReason::IterationCap;

  int iterations() const noexcept { return static_cast<int>(steps.size()); }
};

/// No trial step lowered the energy. Carries the last iterate reached.
class StepSearchError : public std::runtime_error {
public:
  StepSearchError(std::string msg, Raster iterate, int iteration)
      : std::runtime_error(std::move(msg)), iterate_(std::move(iterate)), iteration_(iteration) {}
  const Raster& iterate() const noexcept { return iterate_; }
  int iteration() const noexcept { return iteration_; }

private:
  Raster iterate_;
  int iteration_;
};

// ---------------------------------------------------------------------------
// Smoothed nonlocal magnitudes and their gradients, generic over real/complex fields.

namespace detail {

/// m_i = sqrt(sum_j |f(i)-f(j)|^2 w(i,j) + beta) for every pixel.
template <class T>
std::vector<double> magnitudes(const Grid<T>& f, const WeightField& w, double beta) {
  const std::size_t P = w.pixels(), K = w.slots_per_pixel();
  const auto wt = w.raw_weights();
  const auto tg = w.raw_targets();
  std::vector<double> m(P);
  for (std::size_t i = 0; i < P; ++i) {
    double s = 0.0;
    const T fi = f[i];
    for (std::size_t k = 0; k < K; ++k) {
      const double wk = wt[i * K + k];
      if (wk == 0.0) continue;
      s += squared_modulus(fi - f[static_cast<std::size_t>(tg[i * K + k])]) * wk;
    }
    m[i] = std::sqrt(s + beta);
  }
  return m;
}

inline double sum_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

/// Gradient of sum_i m_i with respect to f (treating real and imaginary parts of a complex
/// field as independent coordinates, packed back as a complex number), added into g.
template <class T>
void add_magnitude_gradient(const Grid<T>& f, const WeightField& w, const std::vector<double>& m,
                            double scale, Grid<T>& g) {
  const std::size_t P = w.pixels(), K = w.slots_per_pixel();
  const auto wt = w.raw_weights();
  const auto tg = w.raw_targets();
  for (std::size_t i = 0; i < P; ++i) {
    const double c_i = scale / m[i];
    const T fi = f[i];
    T acc{};
    for (std::size_t k = 0; k < K; ++k) {
      const double wk = wt[i * K + k];
      if (wk == 0.0) continue;
      const std::size_t j = static_cast<std::size_t>(tg[i * K + k]);
      const T c = (fi - f[j]) * (wk * c_i);
      acc += c;
      g[j] -= c;
    }
    g[i] += acc;
  }
}

inline void check_field(const WeightField* w, int rows, int cols, const char* what) {
  if (w && (w->rows() != rows || w->cols() != cols))
    throw DimensionError(std::string(what) + ": weight field shape does not match the image");
}

}  // namespace detail

/// sqrt( sum_{j in window(i)} (u(i)-u(j))^2 w(i,j) + beta ).
inline double nl_magnitude(const Raster& u, const WeightField& w, Pixel i, double beta) {
  const std::size_t p = w.pixel_index(i.row, i.col);
  double s = 0.0;
  for (std::size_t k = 0; k < w.slots_per_pixel(); ++k) {
    const double d = u[p] - u[static_cast<std::size_t>(w.target(p, k))];
    s += d * d * w.weight(p, k);
  }
  return std::sqrt(s + beta);
}

/// Energy lambda * sum_i m_i(u) + lambda_f * sum_w m_w(dft2 u) + 0.5 ||u - v||^2 and its
/// exact gradient. Either regularizer may be absent. Weight fields are built from v
/// beforehand and stay fixed.
class Energy {
public:
  Energy(const Raster& v, const WeightField* spatial, const WeightField* frequency, double lambda,
         double lambda_f, double beta)
      : v_(v), spatial_(lambda > 0.0 ? spatial : nullptr), frequency_(lambda_f > 0.0 ? frequency : nullptr),
        lambda_(lambda), lambda_f_(lambda_f), beta_(beta) {
    if (lambda > 0.0 && !spatial) throw std::invalid_argument("lambda > 0 needs a spatial weight field");
    if (lambda_f > 0.0 && !frequency) throw std::invalid_argument("lambda_f > 0 needs a frequency weight field");
    detail::check_field(spatial_, v.rows(), v.cols(), "Energy");
    detail::check_field(frequency_, v.rows(), v.cols(), "Energy");
    if (frequency_) fourier_.emplace(v.rows(), v.cols());
  }

  const Raster& data() const noexcept { return v_; }

  double spatial_term(const Raster& u) const {
    if (!spatial_) return 0.0;
    return lambda_ * detail::sum_of(detail::magnitudes(u, *spatial_, beta_));
  }

  double frequency_term(const Raster& u) {
    if (!frequency_) return 0.0;
    const Spectrum uh = fourier_->forward(u);
    return lambda_f_ * detail::sum_of(detail::magnitudes(uh, *frequency_, beta_));
  }

  double value(const Raster& u) {
    require_same_shape(u, v_, "Energy::value");
    return spatial_term(u) + frequency_term(u) + 0.5 * sum_squared_difference(u, v_);
  }

  Raster gradient(const Raster& u) {
    require_same_shape(u, v_, "Energy::gradient");
    Raster g(u.rows(), u.cols(), 0.0);
    if (spatial_) {
      const auto m = detail::magnitudes(u, *spatial_, beta_);
      detail::add_magnitude_gradient(u, *spatial_, m, lambda_, g);
    }
    if (frequency_) {
      const Spectrum uh = fourier_->forward(u);
      const auto m = detail::magnitudes(uh, *frequency_, beta_);
      Spectrum fh(u.rows(), u.cols(), Complex{});
      detail::add_magnitude_gradient(uh, *frequency_, m, 1.0, fh);
      const Raster f = fourier_->inverse_real(fh);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += lambda_f_ * f[k];
    }
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += u[k] - v_[k];
    return g;
  }

private:
  const Raster& v_;
  const WeightField* spatial_;
  const WeightField* frequency_;
  double lambda_;
  double lambda_f_;
  double beta_;
  std::optional<Fourier2d> fourier_;
};

inline double nltv_energy(const Raster& u, const Raster& v, const WeightField& w, double lambda, double beta) {
  return Energy(v, &w, nullptr, lambda, 0.0, beta).value(u);
}

inline Raster nltv_gradient(const Raster& u, const Raster& v, const WeightField& w, double lambda, double beta) {
  return Energy(v, &w, nullptr, lambda, 0.0, beta).gradient(u);
}

inline double fnltv_energy(const Raster& u, const Raster& v, const WeightField& wf, double lambda_f, double beta) {
  return Energy(v, nullptr, &wf, 0.0, lambda_f, beta).value(u);
}

inline Raster fnltv_gradient(const Raster& u, const Raster& v, const WeightField& wf, double lambda_f,
                             double beta) {
  return Energy(v, nullptr, &wf, 0.0, lambda_f, beta).gradient(u);
}

inline double sfnltv_energy(const Raster& u, const Raster& v, const WeightField& w, const WeightField& wf,
                            double lambda, double lambda_f, double beta) {
  return Energy(v, &w, &wf, lambda, lambda_f, beta).value(u);
}

inline Raster sfnltv_gradient(const Raster& u, const Raster& v, const WeightField& w, const WeightField& wf,
                              double lambda, double lambda_f, double beta) {
  return Energy(v, &w, &wf, lambda, lambda_f, beta).gradient(u);
}

struct DescentOptions {
  bool keep_iterates = false;
  /// Called after each accepted step with (k+1, u^{k+1}).
  std::function<void(int, const Raster&)> observer;

  static DescentOptions keeping_iterates() {
    DescentOptions o;
    o.keep_iterates = true;
    return o;
  }
};

/// Monotone gradient descent from u^0 = v. Each step tries the last accepted step size
/// (t_init at first) and halves it until the energy strictly decreases.
inline DescentTrace descend(const Raster& v, const WeightField* spatial, const WeightField* frequency,
                            const SolverConfig& cfg, const DescentOptions& opts = {}) {
  cfg.validate();
  Energy energy(v, spatial, frequency, cfg.lambda, cfg.lambda_f, cfg.beta);
  DescentTrace trace;
  Raster u = v;
  double e = energy.value(u);
  trace.energies.push_back(e);
  if (opts.keep_iterates) trace.iterates.push_back(u);
  const double change_tol = cfg.eps * std::sqrt(static_cast<double>(u.size()));
  double t = cfg.t_init;

  for (int k = 0; k < cfg.n_iter; ++k) {
    const Raster g = energy.gradient(u);
    double g2 = 0.0;
    for (double x : g.values()) g2 += x * x;
    if (g2 == 0.0) {
      trace.reason = StopReason::ZeroGradient;
      break;
    }
    Raster candidate(u.rows(), u.cols());
    double e_new = e;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
      for (std::size_t p = 0; p < u.size(); ++p) candidate[p] = u[p] - t * g[p];
      e_new = energy.value(candidate);
      if (e_new < e) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // A first-order decrease below the energy's rounding level cannot be observed.
      if (cfg.t_init * g2 <= 64.0 * DBL_EPSILON * std::abs(e)) {
        trace.reason = StopReason::Stationary;
        break;
      }
      throw StepSearchError("no decreasing step found at iteration " + std::to_string(k), u, k);
    }
    double change2 = 0.0;
    for (std::size_t p = 0; p < u.size(); ++p) {
      const double d = candidate[p] - u[p];
      change2 += d * d;
    }
    u = std::move(candidate);
    e = e_new;
    trace.steps.push_back(t);
    trace.energies.push_back(e);
    if (opts.keep_iterates) trace.iterates.push_back(u);
    if (opts.observer) opts.observer(k + 1, u);
    if (cfg.eps > 0.0 && std::sqrt(change2) < change_tol) {
      trace.reason = StopReason::SmallChange;
      break;
    }
  }
  trace.result = std::move(u);
  return trace;
}

/// Applies a prescribed sequence of step sizes (no line search).
inline Raster apply_steps(const Raster& v, const WeightField* spatial, const WeightField* frequency,
                          double lambda, double lambda_f, double beta, const std::vector<double>& steps) {
  Energy energy(v, spatial, frequency, lambda, lambda_f, beta);
  Raster u = v;
  for (double t : steps) {
    const Raster g = energy.gradient(u);
    for (std::size_t p = 0; p < u.size(); ++p) u[p] -= t * g[p];
  }
  return u;
}

}  // namespace nltv
