#include <gtest/gtest.h>

#include "nltv/spectral.hpp"
#include "support.hpp"

using namespace nltv;

namespace {

double max_abs_diff(const Spectrum& a, const Spectrum& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

double max_abs(const Spectrum& a) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k]));
  return m;
}

}  // namespace

TEST(Dft, DeltaGivesFlatSpectrum) {
  Raster delta(4, 4, 0.0);
  delta(0, 0) = 1.0;
  const Spectrum s = dft2(delta);
  for (std::size_t k = 0; k < s.size(); ++k) EXPECT_NEAR(std::abs(s[k] - Complex(0.25, 0.0)), 0.0, 1e-15);
}

TEST(Dft, ConstantImageOnlyDc) {
  for (auto [M, N] : {std::pair{6, 10}, std::pair{8, 8}, std::pair{5, 7}}) {
    const Spectrum s = dft2(Raster(M, N, 3.0));
    EXPECT_NEAR(s(0, 0).real(), 3.0 * std::sqrt(M * N), 1e-12);
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(std::abs(s[k]), 1e-12);
  }
}

// Relative-to-magnitude tolerance: 1e-12 times the largest coefficient.
TEST(Dft, MatchesNaiveSummation) {
  for (auto [M, N] : {std::pair{8, 8}, std::pair{16, 16}, std::pair{6, 10}, std::pair{7, 3}, std::pair{1, 12}}) {
    const Raster u = oracle::random_raster(M, N, 100 + M * N);
    const Spectrum ref = oracle::naive_dft2(u);
    EXPECT_LE(max_abs_diff(dft2(u), ref), 1e-12 * max_abs(ref)) << M << "x" << N;
  }
}

TEST(Dft, ParsevalLinearityRoundTrip) {
  for (int n : {8, 16, 12}) {
    const Raster u = oracle::random_raster(n, n, n), w = oracle::random_raster(n, n, n + 1);
    const Spectrum U = dft2(u), W = dft2(w);
    EXPECT_LE(std::abs(frobenius_norm(U) - frobenius_norm(u)), 1e-12 * frobenius_norm(u));

    Raster mix(n, n);
    for (std::size_t k = 0; k < mix.size(); ++k) mix[k] = 0.7 * u[k] - 2.5 * w[k];
    Spectrum lin(n, n);
    for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = 0.7 * U[k] - 2.5 * W[k];
    EXPECT_LE(max_abs_diff(dft2(mix), lin), 1e-12 * max_abs(lin));

    const Raster back = idft2_real(U);
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(back[k], u[k], 1e-12 * 255.0);
  }
}

TEST(Dft, HermitianSymmetryAndRealInverse) {
  const int M = 6, N = 9;
  const Raster u = oracle::random_raster(M, N, 77);
  const Spectrum s = dft2(u);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < N; ++b) EXPECT_LT(std::abs(s(a, b) - std::conj(s((M - a) % M, (N - b) % N))), 1e-11);
  const Spectrum inv = idft2(s);
  for (std::size_t k = 0; k < inv.size(); ++k) EXPECT_LT(std::abs(inv[k].imag()), 1e-12);
}

TEST(Dft, ZeroSpectrumInvertsToZero) {
  const Raster z = idft2_real(Spectrum(5, 4, Complex{}));
  for (double x : z.values()) EXPECT_EQ(x, 0.0);
}

TEST(Dft, ForwardInverseAreAdjoint) {
  // <F u, S> = <u, F^* S> for the unitary transform.
  const Raster u = oracle::random_raster(10, 6, 5);
  Spectrum S(10, 6);
  const Raster re = oracle::random_raster(10, 6, 6), im = oracle::random_raster(10, 6, 7);
  for (std::size_t k = 0; k < S.size(); ++k) S[k] = Complex(re[k], im[k]);
  const Spectrum Fu = dft2(u), FS = idft2(S);
  Complex lhs{}, rhs{};
  for (std::size_t k = 0; k < S.size(); ++k) {
    lhs += Fu[k] * std::conj(S[k]);
    rhs += u[k] * std::conj(FS[k]);
  }
  EXPECT_LT(std::abs(lhs - rhs), 1e-9 * std::abs(lhs));
}
