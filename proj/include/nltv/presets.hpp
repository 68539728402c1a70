#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nltv/local.hpp"
#include "nltv/weights.hpp"

namespace nltv {

/// Lower-cased file stem, used to look up per-image parameter exceptions.
inline std::string image_key(std::string_view path) {
  const auto slash = path.find_last_of("/\\");
  if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
  const auto dot = path.find_last_of('.');
  if (dot != std::string_view::npos) path = path.substr(0, dot);
  std::string key(path);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  return key;
}

namespace presets {

/// Spatial NLTV at sigma = 20. Bridge has its own tuning.
inline VariationalParams nltv(std::string_view image = {}) {
  VariationalParams p;
  p.terms = Regularizers::Spatial;
  const bool bridge = image_key(image) == "bridge";
  p.spatial = PatchGeometry::make(bridge ? 15 : 9, 3, 20.0);
  p.solver.lambda = bridge ? 11.0 : 15.0;
  p.solver.lambda_f = 0.0;
  p.solver.n_iter = 50;
  return p;
}

/// Classical TV; lambda 11 on Barbara and Bridge, 16 elsewhere.
inline SolverConfig rof(std::string_view image = {}) {
  const std::string key = image_key(image);
  SolverConfig s;
  s.lambda = (key == "barbara" || key == "bridge") ? 11.0 : 16.0;
  s.lambda_f = 0.0;
  s.n_iter = 50;
  return s;
}

inline PatchGeometry nl_means(std::string_view image = {}) {
  return image_key(image) == "bridge" ? PatchGeometry::make(3, 5, 24.0) : PatchGeometry::make(7, 11, 18.0);
}

/// Whole-image FNLTV (frequency term only).
inline VariationalParams fnltv(double lambda_f = 16.0) {
  VariationalParams p;
  p.terms = Regularizers::Frequency;
  p.frequency = PatchGeometry::make(9, 5, 16.0);
  p.solver.lambda = 0.0;
  p.solver.lambda_f = lambda_f;
  p.solver.n_iter = 50;
  return p;
}

/// SFNLTV with one parameter set for every image at sigma = 20.
inline VariationalParams sfnltv_uniform() {
  VariationalParams p;
  p.terms = Regularizers::Both;
  p.spatial = PatchGeometry::make(9, 3, 20.0);
  p.frequency = PatchGeometry::make(9, 5, 16.0);
  p.solver.lambda = 11.0;
  p.solver.lambda_f = 2.0;
  p.solver.n_iter = 50;
  return p;
}

/// Per-noise-level row of the local-method table: spatial patch side and both weights.
struct LocalRow {
  double sigma;
  int patch;
  double lambda;
  double lambda_f;
};

inline constexpr std::array<LocalRow, 4> kLocalRows{{
    {10.0, 9, 4.0, 6.0},
    {20.0, 9, 5.0, 11.0},
    {30.0, 11, 7.0, 21.0},
    {50.0, 15, 10.0, 38.0},
}};

/// Tabulated row for sigma; other noise levels use the nearest tabulated sigma.
inline LocalRow local_row(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma-dependent preset needs sigma > 0");
  const LocalRow* best = &kLocalRows[0];
  for (const auto& r : kLocalRows)
    if (std::abs(r.sigma - sigma) < std::abs(best->sigma - sigma)) best = &r;
  return *best;
}

/// Whole-image SFNLTV with noise-level scaled parameters.
inline VariationalParams sfnltv(double sigma) {
  const LocalRow row = local_row(sigma);
  VariationalParams p;
  p.terms = Regularizers::Both;
  p.spatial = PatchGeometry::make(row.patch, 3, sigma);
  p.frequency = PatchGeometry::make(9, 5, 0.8 * sigma);
  p.solver.lambda = 0.55 * sigma;
  p.solver.lambda_f = 1.6 + 0.02 * sigma;
  p.solver.n_iter = 50;
  return p;
}

/// Local SFNLTV; `textured` switches to lambda = 1, lambda_f = sigma.
inline LocalParams l_sfnltv(double sigma, bool textured = false) {
  const LocalRow row = local_row(sigma);
  LocalParams p;
  p.region_size = 16;
  p.step = 6;
  p.trim = true;
  p.region.terms = Regularizers::Both;
  p.region.spatial = PatchGeometry::make(row.patch, 3, sigma);
  p.region.frequency = PatchGeometry::make(5, 3, sigma);
  p.region.solver.lambda = textured ? 1.0 : row.lambda;
  p.region.solver.lambda_f = textured ? sigma : row.lambda_f;
  p.region.solver.n_iter = 20;
  return p;
}

/// Local FNLTV: the local SFNLTV geometry with only the frequency term, lambda_f = sigma.
inline LocalParams l_fnltv(double sigma) {
  LocalParams p = l_sfnltv(sigma);
  p.region.terms = Regularizers::Frequency;
  p.region.solver.lambda = 0.0;
  p.region.solver.lambda_f = sigma;
  return p;
}

/// Images that take the textured local preset.
inline bool is_textured(std::string_view image) { return image_key(image) == "barbara"; }

inline const std::vector<double>& sure_candidates() {
  static const std::vector<double> c{9, 12, 15, 18, 21, 24};
  return c;
}

}  // namespace presets

/// Reference PSNR values (dB) that the benchmark suites compare against.
namespace benchmark {

inline constexpr std::array<std::string_view, 7> kImages{"lena", "barbara", "peppers", "boats",
                                                        "bridge", "house", "cameraman"};

struct Row {
  std::string_view method;
  double sigma;
  bool external;  // third-party method, not implemented here
  std::array<double, 7> psnr;
};

/// Regionwise NLTV: random lambda vs SURE-selected lambda, sigma = 20.
struct SelectionRow {
  int region;
  std::array<double, 7> random;
  std::array<double, 7> selected;
};

inline constexpr std::array<SelectionRow, 2> kSelection{{
    {16, {30.49, 27.73, 29.35, 28.84, 26.20, 30.57, 28.86}, {30.65, 28.04, 29.56, 29.05, 26.55, 30.76, 29.11}},
    {32, {30.78, 27.90, 29.72, 29.02, 26.27, 31.07, 29.14}, {30.98, 28.24, 29.88, 29.24, 26.67, 31.10, 29.31}},
}};

inline constexpr std::array<Row, 4> kGlobal{{
    {"nltv", 20, false, {31.56, 28.46, 30.21, 29.49, 26.81, 31.74, 29.45}},
    {"nlmeans", 20, false, {31.56, 29.68, 30.18, 29.32, 26.81, 31.92, 29.35}},
    {"rof", 20, false, {31.07, 27.10, 29.65, 29.15, 26.69, 31.18, 28.70}},
    {"sfnltv", 20, false, {31.77, 29.19, 30.29, 29.89, 26.92, 32.14, 29.64}},
}};

inline constexpr std::array<Row, 20> kNoiseLevels{{
    {"nlstv", 10, true, {34.61, 31.29, 34.06, 33.15, 30.62, 34.52, 33.30}},
    {"rnltv", 10, true, {34.17, 32.79, 33.11, 32.68, 29.14, 34.43, 31.97}},
    {"bnltv", 10, true, {34.57, 33.77, 32.31, 32.83, 29.96, 34.97, 32.52}},
    {"sfnltv", 10, false, {35.05, 33.93, 33.82, 33.42, 30.86, 35.49, 33.45}},
    {"l-sfnltv", 10, false, {35.57, 34.60, 34.28, 33.56, 30.96, 35.62, 33.65}},
    {"nlstv", 20, true, {31.18, 27.23, 30.16, 29.80, 27.03, 30.93, 29.41}},
    {"rnltv", 20, true, {30.40, 29.19, 29.64, 29.50, 26.63, 30.21, 28.54}},
    {"bnltv", 20, true, {31.71, 30.40, 28.38, 29.55, 26.06, 32.17, 28.85}},
    {"sfnltv", 20, false, {31.77, 29.19, 30.29, 29.89, 26.92, 32.14, 29.64}},
    {"l-sfnltv", 20, false, {32.49, 30.98, 30.59, 30.40, 27.15, 32.50, 29.69}},
    {"nlstv", 30, true, {29.86, 24.84, 28.51, 28.14, 25.04, 29.89, 27.76}},
    {"rnltv", 30, true, {27.89, 26.74, 27.26, 27.18, 24.93, 27.78, 26.55}},
    {"bnltv", 30, true, {29.98, 28.59, 26.58, 27.94, 24.69, 30.36, 27.21}},
    {"sfnltv", 30, false, {29.82, 26.55, 28.13, 27.93, 25.01, 29.97, 27.58}},
    {"l-sfnltv", 30, false, {30.64, 28.86, 28.55, 28.50, 25.19, 30.64, 27.75}},
    {"nlstv", 50, true, {27.67, 23.17, 26.00, 25.96, 23.12, 27.57, 25.42}},
    {"rnltv", 50, true, {24.40, 23.30, 23.91, 23.94, 22.50, 24.12, 23.41}},
    {"bnltv", 50, true, {27.92, 26.21, 24.39, 25.92, 23.03, 28.10, 25.08}},
    {"sfnltv", 50, false, {27.61, 24.11, 25.48, 25.69, 23.18, 27.40, 24.83}},
    {"l-sfnltv", 50, false, {28.26, 26.20, 26.08, 26.25, 23.40, 28.16, 25.24}},
}};

/// Local FNLTV at sigma = 20 (available for Peppers and House only).
inline std::optional<double> l_fnltv_sigma20(std::string_view image) {
  if (image == "peppers") return 30.09;
  if (image == "house") return 32.33;
  return std::nullopt;
}

inline std::optional<std::size_t> image_slot(std::string_view image) {
  for (std::size_t k = 0; k < kImages.size(); ++k)
    if (kImages[k] == image) return k;
  return std::nullopt;
}

/// Noise seed for realization k of an (image, sigma) benchmark cell.
inline std::uint64_t noise_seed(std::size_t image_slot, double sigma, std::uint64_t k = 0) {
  return 1000003ull * (image_slot + 1) + 1009ull * static_cast<std::uint64_t>(sigma) + k;
}

}  // namespace benchmark

}  // namespace nltv
