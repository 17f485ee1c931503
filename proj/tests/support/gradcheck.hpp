#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gfs/linalg.hpp"

namespace gfs::testing {

struct GradCheck {
  double rel_error = 0.0;  // ||a - n|| / max(||a|| + ||n||, floor)
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

// Fourth-order central finite differences of `loss` with respect to every
// entry of `x`, compared against `analytic`. `stable` is asked, for each perturbed pair,
// whether the function stayed on one smooth piece (e.g. no relu sign flip);
// coordinates where it did not are skipped.
inline GradCheck finite_difference(Matrix& x, const Matrix& analytic,
                                   const std::function<double()>& loss,
                                   const std::function<bool()>& stable = {}, double h = 1e-5) {
  GradCheck out;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    bool ok = true;
    auto at = [&](double offset) {
      x.data()[i] = saved + offset;
      const double v = loss();
      ok = ok && (!stable || stable());
      return v;
    };
    const double p1 = at(h), m1 = at(-h), p2 = at(2 * h), m2 = at(-2 * h);
    x.data()[i] = saved;
    if (!ok) {
      ++out.skipped;
      continue;
    }
    const double numeric = (8 * (p1 - m1) - (p2 - m2)) / (12 * h);
    const double a = analytic.data()[i];
    diff2 += (a - numeric) * (a - numeric);
    a2 += a * a;
    n2 += numeric * numeric;
    ++out.checked;
  }
  const double denom = std::max(std::sqrt(a2) + std::sqrt(n2), 1e-4);
  out.rel_error = std::sqrt(diff2) / denom;
  return out;
}

}  // namespace gfs::testing
