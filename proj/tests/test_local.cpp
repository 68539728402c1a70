#include <gtest/gtest.h>

#include "nltv/local.hpp"
#include "nltv/presets.hpp"
#include "support.hpp"

using namespace nltv;

TEST(Tile, Origins) {
  const RegionGrid one = tile(16, 16, 16, 6);
  EXPECT_EQ(one.row_origins, std::vector<int>{0});
  const RegionGrid g = tile(512, 512, 16, 6);
  ASSERT_EQ(g.row_origins.size(), 84u);
  for (std::size_t k = 0; k + 1 < 83; ++k) EXPECT_EQ(g.row_origins[k], static_cast<int>(6 * k));
  EXPECT_EQ(g.row_origins[82], 492);
  EXPECT_EQ(g.row_origins.back(), 496);
  EXPECT_EQ(g.size(), 84u * 84u);
  const RegionGrid exact = tile(256, 256, 16, 16);
  EXPECT_EQ(exact.row_origins.size(), 16u);
  EXPECT_EQ(exact.row_origins.back(), 240);
}

TEST(Tile, OriginsIncreaseAndEndAtBorder) {
  for (int dim : {16, 17, 31, 100, 256})
    for (int S : {3, 8, 16})
      for (int step : {1, 3, 6, S}) {
        if (S > dim || step > S) continue;
        const RegionGrid g = tile(dim, dim + 5, S, step);
        for (std::size_t k = 1; k < g.row_origins.size(); ++k) ASSERT_GT(g.row_origins[k], g.row_origins[k - 1]);
        ASSERT_EQ(g.row_origins.back() + S, dim);
        ASSERT_EQ(g.col_origins.back() + S, dim + 5);
      }
}

TEST(Tile, RejectsInvalidSizes) {
  EXPECT_THROW(tile(10, 10, 2, 1), std::invalid_argument);
  EXPECT_THROW(tile(10, 10, 11, 1), std::invalid_argument);
  EXPECT_THROW(tile(10, 10, 5, 0), std::invalid_argument);
  EXPECT_THROW(tile(10, 10, 5, 6), std::invalid_argument);
}

TEST(Trim, ContributingAreas) {
  EXPECT_EQ(trim_contribution({6, 6}, 16, 512, 512).area(), 196);
  EXPECT_EQ(trim_contribution({0, 0}, 16, 512, 512).area(), 15 * 15);
  EXPECT_EQ(trim_contribution({496, 496}, 16, 512, 512).area(), 15 * 15);
  EXPECT_EQ(trim_contribution({0, 0}, 16, 16, 16).area(), 256);
  EXPECT_THROW(trim_contribution({500, 0}, 16, 512, 512), std::invalid_argument);
}

TEST(Trim, EveryLegalTilingCoversTheImage) {
  auto check = [](int rows, int cols, int S, int step) {
    const RegionGrid g = tile(rows, cols, S, step);
    Aggregator agg(rows, cols);
    for (std::size_t r = 0; r < g.size(); ++r) {
      const Pixel o = g.origin(r);
      agg.add(Raster(S, S, 1.0), o, trim_contribution(o, S, rows, cols));
    }
    const Grid<int> n = agg.counts();
    for (std::size_t k = 0; k < n.size(); ++k)
      if (n[k] < 1) return false;
    return true;
  };
  EXPECT_TRUE(check(512, 512, 16, 6));
  for (int S = 3; S <= 12; ++S)
    for (int step = 1; step <= S; ++step) EXPECT_TRUE(check(37, 29, S, step)) << S << " " << step;
}

TEST(Aggregator, AveragesInOrder) {
  Aggregator agg(3, 3);
  agg.add(Raster(2, 2, 1.0), {0, 0}, Rect{0, 0, 2, 2});
  agg.add(Raster(2, 2, 4.0), {1, 1}, Rect{1, 1, 3, 3});
  agg.add(Raster(1, 1, 7.0), {0, 2}, Rect{0, 2, 1, 3});
  agg.add(Raster(1, 1, 9.0), {2, 0}, Rect{0, 0, 0, 0});  // untrimmed fallback only
  const Raster out = agg.result();
  EXPECT_EQ(out(0, 0), 1.0);
  EXPECT_EQ(out(1, 1), 2.5);
  EXPECT_EQ(out(2, 2), 4.0);
  EXPECT_EQ(out(0, 2), 7.0);
  EXPECT_EQ(out(2, 0), 9.0);
  Aggregator empty(2, 2);
  EXPECT_THROW(empty.result(), std::logic_error);
}

TEST(LocalSfnltv, ConstantImageUnchanged) {
  const Raster v(40, 40, 123.0);
  const Raster out = l_sfnltv(v, presets::l_sfnltv(20.0), 1);
  for (double x : out.values()) EXPECT_NEAR(x, 123.0, 1e-9);
}

TEST(LocalSfnltv, DeterministicAcrossWorkerCounts) {
  const Raster v = add_gaussian_noise(oracle::random_raster(40, 46, 3, 50, 200), {20.0, 1});
  LocalParams p = presets::l_sfnltv(20.0);
  p.region.solver.n_iter = 5;
  const Raster a = l_sfnltv(v, p, 1);
  EXPECT_EQ(a, l_sfnltv(v, p, 1));
  EXPECT_EQ(a, l_sfnltv(v, p, 3));
}

TEST(LocalSfnltv, RegionsAreIndependent) {
  // Changing pixels far from a region must not change that region's estimate: with
  // non-overlapping untrimmed regions the output of region 0 depends only on its own pixels.
  Raster v = add_gaussian_noise(oracle::random_raster(32, 32, 4, 50, 200), {20.0, 2});
  const Raster a = l_variant(v, LocalMethod::Nltv, 16, 16, presets::l_sfnltv(20.0), 1);
  for (int r = 16; r < 32; ++r)
    for (int c = 0; c < 32; ++c) v(r, c) += 30.0;
  const Raster b = l_variant(v, LocalMethod::Nltv, 16, 16, presets::l_sfnltv(20.0), 1);
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 16; ++c) EXPECT_EQ(a(r, c), b(r, c));
}

TEST(LocalVariant, TrimsOnlyForFrequencyTerm) {
  // A single region covering the image reduces each local method to the global one.
  const Raster v = add_gaussian_noise(oracle::random_raster(16, 16, 5, 50, 200), {20.0, 3});
  LocalParams p = presets::l_sfnltv(20.0);
  const Raster ln = l_variant(v, LocalMethod::Nltv, 16, 6, p, 1);
  VariationalParams spatial = p.region;
  spatial.terms = Regularizers::Spatial;
  EXPECT_EQ(ln, denoise_variational(v, spatial).result);
  const Raster lf = l_variant(v, LocalMethod::Fnltv, 16, 6, presets::l_fnltv(20.0), 1);
  VariationalParams freq = presets::l_fnltv(20.0).region;
  EXPECT_EQ(lf, denoise_variational(v, freq).result);
}

TEST(LocalVariant, ErrorsCarryRegionIndex) {
  const Raster v = oracle::random_raster(20, 20, 6);
  LocalParams p = presets::l_sfnltv(20.0);
  p.region.solver.t_init = 1e9;
  p.region.solver.max_halvings = 0;
  try {
    l_sfnltv(v, p, 1);
    FAIL() << "expected RegionError";
  } catch (const RegionError& e) {
    EXPECT_EQ(e.region(), 0u);
  }
}
