#include <gtest/gtest.h>

#include "nltv/presets.hpp"
#include "nltv/selection.hpp"
#include "support.hpp"

using namespace nltv;

TEST(Presets, ImageKey) {
  EXPECT_EQ(image_key("/data/Bridge.PGM"), "bridge");
  EXPECT_EQ(image_key("lena"), "lena");
}

TEST(Presets, GlobalSettings) {
  EXPECT_EQ(presets::nltv().solver.lambda, 15.0);
  EXPECT_EQ(presets::nltv().spatial.patch, 9);
  EXPECT_EQ(presets::nltv("x/bridge.png").spatial.patch, 15);
  EXPECT_EQ(presets::nltv("bridge").solver.lambda, 11.0);
  EXPECT_EQ(presets::rof("barbara.pgm").lambda, 11.0);
  EXPECT_EQ(presets::rof("lena.pgm").lambda, 16.0);
  EXPECT_EQ(presets::nl_means().window, 11);
  EXPECT_EQ(presets::nl_means("bridge").sigma_r, 24.0);
  const auto sf = presets::sfnltv_uniform();
  EXPECT_EQ(sf.solver.lambda, 11.0);
  EXPECT_EQ(sf.solver.lambda_f, 2.0);
  EXPECT_EQ(sf.frequency.window, 5);
}

TEST(Presets, NoiseLevelTables) {
  const auto p10 = presets::l_sfnltv(10.0);
  EXPECT_EQ(p10.region.spatial.patch, 9);
  EXPECT_EQ(p10.region.solver.lambda, 4.0);
  EXPECT_EQ(p10.region.solver.lambda_f, 6.0);
  EXPECT_EQ(p10.region.solver.n_iter, 20);
  EXPECT_EQ(p10.region.frequency.patch, 5);
  EXPECT_EQ(p10.region.frequency.window, 3);
  const auto p50 = presets::l_sfnltv(50.0);
  EXPECT_EQ(p50.region.spatial.patch, 15);
  EXPECT_EQ(p50.region.solver.lambda_f, 38.0);
  const auto tex = presets::l_sfnltv(30.0, true);
  EXPECT_EQ(tex.region.solver.lambda, 1.0);
  EXPECT_EQ(tex.region.solver.lambda_f, 30.0);
  const auto s = presets::sfnltv(30.0);
  EXPECT_DOUBLE_EQ(s.solver.lambda, 16.5);
  EXPECT_DOUBLE_EQ(s.solver.lambda_f, 2.2);
  EXPECT_DOUBLE_EQ(s.frequency.sigma_r, 24.0);
  EXPECT_EQ(s.spatial.patch, 11);
  EXPECT_EQ(presets::local_row(24.0).sigma, 20.0);
  EXPECT_THROW(presets::local_row(0.0), std::invalid_argument);
}

TEST(BenchmarkReference, AllRowsCoverEveryImage) {
  EXPECT_EQ(benchmark::kGlobal[0].psnr[0], 31.56);
  EXPECT_EQ(benchmark::kSelection[1].selected[0], 30.98);
  int external = 0;
  for (const auto& r : benchmark::kNoiseLevels) external += r.external;
  EXPECT_EQ(external, 12);
  EXPECT_EQ(benchmark::image_slot("house"), 5u);
  EXPECT_FALSE(benchmark::image_slot("mandrill").has_value());
}

TEST(RegionSelection, SingleCandidateEqualsPlainRegionwiseNltv) {
  const Raster v = add_gaussian_noise(oracle::random_raster(32, 32, 1, 60, 190), {20.0, 1});
  const auto g = PatchGeometry::make(3, 3, 20.0);
  SolverConfig cfg;
  cfg.n_iter = 5;
  const RegionSelection sel = select_regionwise(v, 20.0, 16, {15.0}, g, cfg, 1);
  EXPECT_EQ(sel.grid.size(), 4u);
  const Raster mosaic = sel.selected();
  for (std::size_t r = 0; r < 4; ++r) {
    const Pixel o = sel.grid.origin(r);
    const Raster region = crop(v, o.row, o.col, 16, 16);
    const WeightField w = similarity_weights(region, g);
    cfg.lambda = 15.0;
    const Raster ref = descend(region, &w, nullptr, cfg).result;
    for (int a = 0; a < 16; ++a)
      for (int b = 0; b < 16; ++b) ASSERT_EQ(mosaic(o.row + a, o.col + b), ref(a, b));
  }
}

TEST(RegionSelection, ChoiceMinimisesSurePerRegion) {
  const Raster clean = oracle::random_raster(32, 32, 2, 60, 190);
  const Raster v = add_gaussian_noise(clean, {20.0, 2});
  SolverConfig cfg;
  cfg.n_iter = 5;
  const RegionSelection sel = select_regionwise(v, 20.0, 16, {9.0, 15.0, 24.0}, PatchGeometry::make(3, 3, 20.0), cfg, 2);
  for (std::size_t r = 0; r < sel.grid.size(); ++r)
    for (double s : sel.final_sure[r]) EXPECT_GE(s, sel.final_sure[r][sel.chosen[r]]);
  const double rnd = random_assignment_psnr(sel, clean, 5, 1);
  EXPECT_TRUE(std::isfinite(rnd));
  EXPECT_EQ(rnd, random_assignment_psnr(sel, clean, 5, 1));
  EXPECT_THROW(select_regionwise(v, 20.0, 33, {9.0}, PatchGeometry::make(3, 3, 20.0), cfg), std::length_error);
}
