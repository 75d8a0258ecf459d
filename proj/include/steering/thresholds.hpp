// Closed-form efficiency thresholds for one-detector steering.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "steering/quantum.hpp"

namespace steering {

struct ThresholdReport {
  double epsilon_star = 1.0;  // 1 / lambda_max
  double lambda_max = 1.0;
  double lambda_minus = 0.0;
  int X = 2;
  double overlap_sum = 0.0;  // sum_{x,x'} Tr[Pi_x Pi_x']
};

// Spectrum of sum_x Pi_x from pairwise overlaps only:
// lambda_pm = (X +- sqrt(2*sum_overlaps - X^2)) / 2.
inline std::pair<double, double> projector_sum_spectrum(const MeasurementFamily& family) {
  const int X = family.X;
  double overlap_sum = 0.0;
  for (int x = 0; x < X; ++x)
    for (int xp = 0; xp < X; ++xp) overlap_sum += projector_overlap(family, x, xp);
  const double disc = 2.0 * overlap_sum - static_cast<double>(X) * X;
  if (disc < -1e-12) throw std::invalid_argument("projector_sum_spectrum: negative discriminant, projectors not co-planar");
  const double root = std::sqrt(std::max(0.0, disc));
  return {0.5 * (X + root), 0.5 * (X - root)};
}

// epsilon* = 1 / lambda_max(sum_x Pi_x); an LHS model exists iff eps <= eps*.
inline ThresholdReport cutoff_efficiency(const MeasurementFamily& family) {
  for (int x = 0; x < family.X; ++x) {
    const auto e = eig_hermitian(family.projector(x));
    if (std::abs(e.eigenvalues[0] - 1.0) > 1e-10 || std::abs(e.eigenvalues[1]) > 1e-10)
      throw std::invalid_argument("cutoff_efficiency: click effect not a rank-one projector");
  }
  ThresholdReport r;
  r.X = family.X;
  const auto spec = projector_sum_spectrum(family);
  r.lambda_max = max_eigenvalue(family.projector_sum());
  r.lambda_minus = spec.second;
  r.epsilon_star = 1.0 / r.lambda_max;
  for (int x = 0; x < family.X; ++x)
    for (int xp = 0; xp < family.X; ++xp) r.overlap_sum += projector_overlap(family, x, xp);
  return r;
}

// lambda_max for the equally spaced family: (X + sin(X d/2)/sin(d/2)) / 2.
// The delta -> 0 limit is X; evaluated analytically below delta = 1e-8.
inline double lambda_max_equal_spaced(int X, double delta) {
  if (X < 2) throw std::invalid_argument("lambda_max_equal_spaced: X must be >= 2");
  if (delta < 0.0 || delta > 2.0 * std::numbers::pi / X)
    throw std::invalid_argument("lambda_max_equal_spaced: delta must lie in [0, 2*pi/X]");
  if (delta < 1e-8) return static_cast<double>(X);
  return 0.5 * (X + std::sin(X * delta / 2.0) / std::sin(delta / 2.0));
}

// Infimum of the cutoff over the equally spaced construction: 1/X.
inline double asymptotic_threshold(int X) {
  if (X < 2) throw std::invalid_argument("asymptotic_threshold: X must be >= 2");
  return 1.0 / X;
}

}  // namespace steering
