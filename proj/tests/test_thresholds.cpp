#include <doctest.h>

#include <numbers>
#include <random>

#include "steering/thresholds.hpp"

using namespace steering;

TEST_CASE("projector-sum spectrum matches direct diagonalization") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 200; ++t) {
    MeasurementFamily f;
    f.X = 2 + static_cast<int>(rng() % 4);
    for (int x = 0; x < f.X; ++x) f.amplitude_angles.push_back(u(rng));
    const auto spec = projector_sum_spectrum(f);
    const auto e = eig_hermitian(f.projector_sum());
    CHECK(std::abs(spec.first - e.eigenvalues[0]) <= 1e-10);
    CHECK(std::abs(spec.second - e.eigenvalues[1]) <= 1e-10);
  }
}

TEST_CASE("two orthogonal projectors give spectrum {1,1} and cutoff 1") {
  const MeasurementFamily f = one_click_family(2, std::numbers::pi, 1.0);
  const auto spec = projector_sum_spectrum(f);
  CHECK(spec.first == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spec.second == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cutoff_efficiency(f).epsilon_star == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("spacing 2pi/3 gives spectrum {1.5, 0.5} and cutoff 2/3") {
  const MeasurementFamily f = one_click_family(2, 2.0 * std::numbers::pi / 3.0, 1.0);
  const auto spec = projector_sum_spectrum(f);
  CHECK(spec.first == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(spec.second == doctest::Approx(0.5).epsilon(1e-12));
  const ThresholdReport r = cutoff_efficiency(f);
  CHECK(r.epsilon_star == doctest::Approx(2.0 / 3.0).epsilon(1e-10));
  CHECK(r.lambda_max == doctest::Approx(1.5).epsilon(1e-10));
}

TEST_CASE("equal-spacing lambda_max closed form matches the generic spectrum") {
  for (int X : {2, 3, 4, 5}) {
    for (double delta : {0.2, 0.7, 1.1}) {
      if (delta >= 2.0 * std::numbers::pi / X) continue;
      const MeasurementFamily f = one_click_family(X, delta, 1.0);
      CHECK(lambda_max_equal_spaced(X, delta) ==
            doctest::Approx(projector_sum_spectrum(f).first).epsilon(1e-10));
    }
  }
}

TEST_CASE("cutoff approaches 1/X as the spacing shrinks") {
  for (int X : {2, 3, 5}) {
    const double lam = lambda_max_equal_spaced(X, 1e-4);
    CHECK(std::abs(1.0 / lam - asymptotic_threshold(X)) <= 1e-6);
  }
  CHECK(lambda_max_equal_spaced(4, 0.0) == doctest::Approx(4.0));
  CHECK(asymptotic_threshold(2) == doctest::Approx(0.5));
}

TEST_CASE("threshold input validation") {
  CHECK_THROWS(lambda_max_equal_spaced(1, 0.1));
  CHECK_THROWS(lambda_max_equal_spaced(2, -0.1));
  CHECK_THROWS(lambda_max_equal_spaced(2, std::numbers::pi + 0.1));
  CHECK_THROWS(asymptotic_threshold(1));
}
