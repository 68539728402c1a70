#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "nltv/local.hpp"
#include "nltv/parallel.hpp"
#include "nltv/raster.hpp"
#include "nltv/sure.hpp"

namespace nltv {

/// Per-region NLTV runs for every candidate lambda on a tiling of side `region_size`
/// (step = region_size, so regions only overlap where the last origin is clamped).
struct RegionSelection {
  RegionGrid grid;
  std::vector<double> candidates;
  std::vector<std::size_t> chosen;                 // per region, index into candidates
  std::vector<std::vector<double>> final_sure;     // [region][candidate]
  std::vector<std::vector<Raster>> estimates;      // [region][candidate]

  double chosen_lambda(std::size_t region) const { return candidates[chosen[region]]; }

  /// Mosaic built from one candidate index per region.
  Raster assemble(const std::vector<std::size_t>& pick) const {
    if (pick.size() != grid.size()) throw std::invalid_argument("one candidate index per region required");
    Aggregator agg(grid.rows, grid.cols);
    const int S = grid.region_size;
    for (std::size_t r = 0; r < grid.size(); ++r) {
      const Pixel o = grid.origin(r);
      agg.add(estimates[r].at(pick[r]), o, Rect{o.row, o.col, o.row + S, o.col + S});
    }
    return agg.result();
  }

  Raster selected() const { return assemble(chosen); }
};

/// Runs sure_trace for every (region, candidate) pair and keeps the candidate with the
/// smallest final SURE per region.
inline RegionSelection select_regionwise(const Raster& v, double sigma, int region_size,
                                         const std::vector<double>& candidates, const PatchGeometry& geom,
                                         const SolverConfig& cfg, unsigned workers = worker_count()) {
  if (candidates.empty()) throw std::invalid_argument("at least one lambda candidate required");
  if (static_cast<std::size_t>(region_size) * region_size > kMaxSurePixels)
    throw std::length_error("SURE regions are limited to 32x32 (dense Jacobian)");
  RegionSelection sel;
  sel.grid = tile(v.rows(), v.cols(), region_size, region_size);
  sel.candidates = candidates;
  const std::size_t n = sel.grid.size();
  sel.chosen.assign(n, 0);
  sel.final_sure.assign(n, {});
  sel.estimates.assign(n, {});
  parallel_for(
      n,
      [&](std::size_t r) {
        const Pixel o = sel.grid.origin(r);
        const Raster region = crop(v, o.row, o.col, region_size, region_size);
        try {
          LambdaChoice c = select_lambda(region, sigma, candidates, geom, cfg);
          sel.chosen[r] = c.index;
          for (auto& rep : c.reports) {
            sel.final_sure[r].push_back(rep.final_sure());
            sel.estimates[r].push_back(std::move(rep.result));
          }
        } catch (const std::exception& e) {
          throw RegionError(r, e.what());
        }
      },
      workers);
  return sel;
}

/// Mean PSNR against `clean` over `draws` uniformly random per-region candidate assignments.
inline double random_assignment_psnr(const RegionSelection& sel, const Raster& clean, int draws, std::uint64_t seed) {
  if (draws < 1) throw std::invalid_argument("draws must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_one(0, sel.candidates.size() - 1);
  double total = 0.0;
  std::vector<std::size_t> pick(sel.grid.size());
  for (int d = 0; d < draws; ++d) {
    for (auto& p : pick) p = pick_one(rng);
    total += psnr(clean, sel.assemble(pick));
  }
  return total / draws;
}

}  // namespace nltv
