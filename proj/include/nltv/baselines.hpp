#pragma once

#include "nltv/raster.hpp"
#include "nltv/weights.hpp"

namespace nltv {

/// NL-means: normalized average of v over the D x D window, weighted by patch similarity.
/// The center contributes with weight 1 (zero self-distance); window positions outside
/// the image are skipped.
inline Raster nl_means(const Raster& v, const PatchGeometry& geom) {
  geom.validate();
  const int rows = v.rows(), cols = v.cols();
  Raster num = v;
  Raster den(rows, cols, 1.0);
  detail::visit_similarity_planes(v, geom, [&](std::size_t, Offset o, const std::vector<double>& plane) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        const double wk = plane[static_cast<std::size_t>(r) * cols + c];
        if (wk == 0.0) continue;
        num(r, c) += wk * v(r + o.dr, c + o.dc);
        den(r, c) += wk;
      }
  });
  for (std::size_t p = 0; p < num.size(); ++p) num[p] /= den[p];
  return num;
}

}  // namespace nltv
