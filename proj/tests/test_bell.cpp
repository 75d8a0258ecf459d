#include <doctest.h>

#include <numbers>
#include <random>

#include "steering/bell.hpp"

using namespace steering;

TEST_CASE("Bell operator trace identity") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double eps = 0.1 + 0.9 * u(rng);
    const BellOperator op = bell_operator(eps, 6.28 * u(rng), 6.28 * u(rng));
    CHECK(op.matrix.trace().real() == doctest::Approx(2.0 * eps * (2.0 - eps)).epsilon(1e-12));
    CHECK((op.matrix - op.matrix.adjoint()).max_abs() <= 1e-14);
  }
}

TEST_CASE("Bell operator expectation equals the Eberhard value of the quantum behavior") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 30; ++t) {
    const double eps = 0.4 + 0.3 * (u(rng) + 1.0);
    const double px = 3.0 * u(rng), py = 3.0 * u(rng);
    std::vector<cplx> psi(4);
    double nrm = 0.0;
    for (auto& z : psi) {
      z = cplx{u(rng), u(rng)};
      nrm += std::norm(z);
    }
    for (auto& z : psi) z /= std::sqrt(nrm);
    const ComplexMatrix rho = ComplexMatrix::outer(psi, psi);
    const double expectation = hs_inner(bell_operator(eps, px, py).matrix, rho).real();
    const double eberhard = eberhard_value(quantum_behavior(rho, eps, px, py));
    CHECK(std::abs(expectation - eberhard) <= 1e-12);
  }
}

TEST_CASE("minimum eigenvalue golden values") {
  const AngleOptimum opt1 = min_eig_over_angles(1.0);
  CHECK(std::abs(opt1.lambda_min - 0.5 * (1.0 - std::sqrt(2.0))) <= 1e-8);
  const AngleOptimum opt23 = min_eig_over_angles(2.0 / 3.0);
  CHECK(std::abs(opt23.lambda_min) <= 1e-8);  // boundary: no negativity at eps = 2/3
  CHECK(min_eig_over_angles(0.5).lambda_min >= -1e-10);
}

TEST_CASE("noise thresholds: golden points, crossings, and ordering") {
  CHECK(std::abs(noise_threshold_optimized(1.0).eta - (1.0 - 1.0 / std::sqrt(2.0))) <= 1e-8);
  // maxent curve crosses zero at 2(sqrt(2)-1)
  const double eps_me = 2.0 * (std::sqrt(2.0) - 1.0);
  CHECK(noise_threshold_maxent(eps_me - 1e-9).below_threshold);
  CHECK_FALSE(noise_threshold_maxent(eps_me + 1e-6).below_threshold);
  // optimized curve crosses zero at 2/3
  CHECK(noise_threshold_optimized(2.0 / 3.0 - 2e-3).below_threshold);
  CHECK_FALSE(noise_threshold_optimized(2.0 / 3.0 + 2e-3).below_threshold);
  // the maxent threshold never exceeds the optimized one where both are positive
  for (double eps = 0.84; eps <= 1.0; eps += 0.02) {
    const double me = noise_threshold_maxent(eps).eta;
    const double op = noise_threshold_optimized(eps).eta;
    CHECK(me <= op + 1e-9);
  }
}

TEST_CASE("PR box values and behavior validation") {
  const Behavior pr = pr_box();
  pr.validate();
  CHECK(chsh_value(pr) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(ch_value(pr) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(pr.no_signalling_residual() <= 1e-15);
}

TEST_CASE("apply_inefficiency preserves no-signalling and normalization") {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 500; ++t) {
    const Behavior b = random_ns_behavior(rng);
    b.validate();
    const Behavior b3 = apply_inefficiency(b, 0.3 + 0.7 * (static_cast<double>(t % 7) / 7.0));
    b3.validate();  // includes normalization and no-signalling
  }
}

TEST_CASE("Eberhard value equals CH under the all-to-one null assignment") {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 100; ++t) {
    const Behavior b = random_ns_behavior(rng);
    const Behavior b3 = apply_inefficiency(b, 0.55 + 0.4 * (static_cast<double>(t % 9) / 9.0));
    const double e = eberhard_value(b3);
    const double ch = ch_value(assign_nulls(b3, all_nulls_to_one()));
    CHECK(std::abs(e - ch) <= 1e-12);
  }
}

TEST_CASE("worst-case assigned CHSH on the inefficient PR box matches the closed form") {
  for (double eps : {0.5, 0.6, 2.0 / 3.0, 0.75, 0.9, 1.0}) {
    const Behavior b3 = apply_inefficiency(pr_box(), eps);
    double best = -8.0;
    for (int k = 0; k < 16; ++k) {
      AssignmentStrategy s;
      s.alice_to_one = {static_cast<double>(k & 1), static_cast<double>((k >> 1) & 1)};
      s.bob_to_one = {static_cast<double>((k >> 2) & 1), static_cast<double>((k >> 3) & 1)};
      best = std::max(best, chsh_value(assign_nulls(b3, s)));
    }
    CHECK(best == doctest::Approx(4.0 * eps * eps + 2.0 * (1.0 - eps) * (1.0 - eps)).epsilon(1e-12));
  }
}

TEST_CASE("probabilistic null assignments never beat the deterministic extremes") {
  const Behavior b3 = apply_inefficiency(pr_box(), 0.8);
  double best_det = -8.0;
  for (int k = 0; k < 16; ++k) {
    AssignmentStrategy s;
    s.alice_to_one = {static_cast<double>(k & 1), static_cast<double>((k >> 1) & 1)};
    s.bob_to_one = {static_cast<double>((k >> 2) & 1), static_cast<double>((k >> 3) & 1)};
    best_det = std::max(best_det, chsh_value(assign_nulls(b3, s)));
  }
  std::mt19937_64 rng(35);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    AssignmentStrategy s;
    s.alice_to_one = {u(rng), u(rng)};
    s.bob_to_one = {u(rng), u(rng)};
    CHECK(chsh_value(assign_nulls(b3, s)) <= best_det + 1e-12);
  }
}

TEST_CASE("input validation for bell routines") {
  CHECK_THROWS(bell_operator(1.2, 0.0, 0.0));
  CHECK_THROWS(eberhard_value(pr_box()));                 // needs 3 outcomes
  CHECK_THROWS(chsh_value(apply_inefficiency(pr_box(), 0.9)));  // needs 2 outcomes
  CHECK_THROWS(apply_inefficiency(apply_inefficiency(pr_box(), 0.9), 0.9));
  AssignmentStrategy bad;
  bad.alice_to_one = {1.5, 0.0};
  CHECK_THROWS(assign_nulls(apply_inefficiency(pr_box(), 0.9), bad));
}
