#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nltv/parallel.hpp"
#include "nltv/raster.hpp"
#include "nltv/spectral.hpp"
#include "nltv/variational.hpp"
#include "nltv/weights.hpp"

namespace nltv {

/// Overlapping square regions of side `region_size` whose origins advance by `step`
/// along each axis; the last origin is clamped to dim - region_size.
struct RegionGrid {
  int rows = 0;
  int cols = 0;
  int region_size = 0;
  int step = 0;
  std::vector<int> row_origins;
  std::vector<int> col_origins;

  std::size_t size() const noexcept { return row_origins.size() * col_origins.size(); }
  /// Region origins enumerated row-major: index = ri * col_origins.size() + ci.
  Pixel origin(std::size_t index) const {
    return {row_origins[index / col_origins.size()], col_origins[index % col_origins.size()]};
  }
};

namespace detail {

inline std::vector<int> axis_origins(int dim, int size, int step) {
  std::vector<int> o;
  for (int x = 0; x + size <= dim; x += step) o.push_back(x);
  if (o.back() + size < dim) o.push_back(dim - size);
  return o;
}

}  // namespace detail

inline RegionGrid tile(int rows, int cols, int region_size, int step) {
  if (region_size < 3 || region_size > rows || region_size > cols)
    throw std::invalid_argument("region size must satisfy 3 <= S_r <= min(M,N), got " + std::to_string(region_size));
  if (step < 1 || step > region_size)
    throw std::invalid_argument("step must satisfy 1 <= n_s <= S_r, got " + std::to_string(step));
  RegionGrid g{rows, cols, region_size, step, {}, {}};
  g.row_origins = detail::axis_origins(rows, region_size, step);
  g.col_origins = detail::axis_origins(cols, region_size, step);
  return g;
}

/// Half-open rectangle [row0, row1) x [col0, col1) in image coordinates.
struct Rect {
  int row0 = 0, col0 = 0, row1 = 0, col1 = 0;
  int area() const noexcept { return (row1 - row0) * (col1 - col0); }
  bool contains(int r, int c) const noexcept { return r >= row0 && r < row1 && c >= col0 && c < col1; }
};

/// Pixels of a region kept after dropping its one-pixel border. Border sides lying on the
/// image boundary are kept, since no other region can supply those pixels.
inline Rect trim_contribution(Pixel origin, int region_size, int rows, int cols) {
  if (origin.row < 0 || origin.col < 0 || origin.row + region_size > rows || origin.col + region_size > cols)
    throw std::invalid_argument("region lies outside the image");
  Rect r{origin.row + 1, origin.col + 1, origin.row + region_size - 1, origin.col + region_size - 1};
  if (origin.row == 0) r.row0 = 0;
  if (origin.col == 0) r.col0 = 0;
  if (origin.row + region_size == rows) r.row1 = rows;
  if (origin.col + region_size == cols) r.col1 = cols;
  return r;
}

/// Averages overlapping region estimates. Trimmed contributions are primary; a pixel that
/// no trimmed area reaches (steps larger than S_r - 2) falls back to the untrimmed estimates.
class Aggregator {
public:
  Aggregator(int rows, int cols) : sum_(rows, cols, 0.0), count_(rows, cols, 0), fb_sum_(rows, cols, 0.0),
                                   fb_count_(rows, cols, 0) {}

  void add(const Raster& region, Pixel origin, const Rect& keep) {
    for (int r = 0; r < region.rows(); ++r)
      for (int c = 0; c < region.cols(); ++c) {
        const int ir = origin.row + r, ic = origin.col + c;
        const double x = region(r, c);
        if (keep.contains(ir, ic)) {
          sum_(ir, ic) += x;
          ++count_(ir, ic);
        } else {
          fb_sum_(ir, ic) += x;
          ++fb_count_(ir, ic);
        }
      }
  }

  /// Number of estimates averaged at each pixel.
  Grid<int> counts() const {
    Grid<int> n = count_;
    for (std::size_t k = 0; k < n.size(); ++k)
      if (n[k] == 0) n[k] = fb_count_[k];
    return n;
  }

  Raster result() const {
    Raster out(sum_.rows(), sum_.cols());
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (count_[k] > 0)
        out[k] = sum_[k] / count_[k];
      else if (fb_count_[k] > 0)
        out[k] = fb_sum_[k] / fb_count_[k];
      else
        throw std::logic_error("aggregation left a pixel without any estimate");
    }
    return out;
  }

private:
  Raster sum_;
  Grid<int> count_;
  Raster fb_sum_;
  Grid<int> fb_count_;
};

enum class Regularizers { Spatial, Frequency, Both };

/// Everything a single-region (or whole-image) variational run needs.
struct VariationalParams {
  Regularizers terms = Regularizers::Both;
  PatchGeometry spatial = PatchGeometry::make(9, 3, 20.0);
  PatchGeometry frequency = PatchGeometry::make(9, 5, 16.0);
  SolverConfig solver;
};

/// Builds the weight fields from v and runs the descent.
inline DescentTrace denoise_variational(const Raster& v, const VariationalParams& p, const DescentOptions& opts = {}) {
  SolverConfig cfg = p.solver;
  std::optional<WeightField> w, wf;
  if (p.terms == Regularizers::Frequency) cfg.lambda = 0.0;
  if (p.terms == Regularizers::Spatial) cfg.lambda_f = 0.0;
  if (cfg.lambda > 0.0) w = similarity_weights(v, p.spatial);
  if (cfg.lambda_f > 0.0) wf = similarity_weights(dft2(v), p.frequency);
  return descend(v, w ? &*w : nullptr, wf ? &*wf : nullptr, cfg, opts);
}

struct LocalParams {
  VariationalParams region;  // solver.n_iter is the per-region iteration count
  int region_size = 16;
  int step = 6;
  bool trim = true;
};

/// Region failed; identifies which one.
class RegionError : public std::runtime_error {
public:
  RegionError(std::size_t region, const std::string& what)
      : std::runtime_error("region " + std::to_string(region) + ": " + what), region_(region) {}
  std::size_t region() const noexcept { return region_; }

private:
  std::size_t region_;
};

/// Denoises every region independently (each region sees only its own pixels and
/// mirrors at its own border), then averages the estimates in region-index order.
inline Raster denoise_regions(const Raster& v, const LocalParams& p, unsigned workers = worker_count()) {
  const RegionGrid grid = tile(v.rows(), v.cols(), p.region_size, p.step);
  std::vector<Raster> results(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t idx) {
        const Pixel o = grid.origin(idx);
        const Raster region = crop(v, o.row, o.col, p.region_size, p.region_size);
        try {
          results[idx] = denoise_variational(region, p.region).result;
        } catch (const std::exception& e) {
          throw RegionError(idx, e.what());
        }
      },
      workers);
  Aggregator agg(v.rows(), v.cols());
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    const Pixel o = grid.origin(idx);
    const Rect keep = p.trim ? trim_contribution(o, p.region_size, v.rows(), v.cols())
                             : Rect{o.row, o.col, o.row + p.region_size, o.col + p.region_size};
    agg.add(results[idx], o, keep);
  }
  return agg.result();
}

/// Local spatial-frequency NLTV: both regularizers, trimmed region borders.
inline Raster l_sfnltv(const Raster& v, LocalParams p, unsigned workers = worker_count()) {
  p.region.terms = Regularizers::Both;
  p.trim = true;
  return denoise_regions(v, p, workers);
}

enum class LocalMethod { Nltv, Fnltv };

/// Local application of a single regularizer. Only the frequency variant trims borders.
inline Raster l_variant(const Raster& v, LocalMethod method, int region_size, int step, LocalParams p,
                        unsigned workers = worker_count()) {
  p.region_size = region_size;
  p.step = step;
  p.region.terms = method == LocalMethod::Nltv ? Regularizers::Spatial : Regularizers::Frequency;
  p.trim = method == LocalMethod::Fnltv;
  return denoise_regions(v, p, workers);
}

}  // namespace nltv
