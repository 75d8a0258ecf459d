#include <doctest.h>

#include <numbers>

#include "steering/lhs.hpp"
#include "steering/sdp.hpp"
#include "steering/witness.hpp"

using namespace steering;

TEST_CASE("scalar problem: max t subject to I - t I >= 0 gives t = 1") {
  // block Y = I - t I >= 0 with the matrix equality Y + t I = I; minimize -t
  SdpProblem p;
  p.block_dims = {2};
  p.num_free = 1;
  p.c_free = {-1.0};
  add_matrix_equality(p, {1.0}, {ComplexMatrix::identity(2)}, ComplexMatrix::identity(2));
  const SdpSolution s = solve_sdp(p);
  REQUIRE(s.ok());
  CHECK(s.free_vars[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(s.residuals.duality_gap <= tol::sdp_gap * 10.0);
}

TEST_CASE("pure SDP block objective: min Tr[C Y] with Tr Y = 1") {
  // C with eigenvalues {1, -1}: the optimum is -1 at the projector on the
  // negative eigenvector
  SdpProblem p;
  p.block_dims = {2};
  p.num_free = 0;
  ComplexMatrix c(2);
  c(0, 1) = cplx{1.0, 0.0};
  c(1, 0) = cplx{1.0, 0.0};
  p.C = {c};
  SdpConstraint tr;
  tr.A = {ComplexMatrix::identity(2)};
  tr.rhs = 1.0;
  p.constraints.push_back(tr);
  const SdpSolution s = solve_sdp(p);
  REQUIRE(s.ok());
  CHECK(s.optimal_value == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("spectral robustness equals min(0, closed-form value)") {
  // the one-click mu-SDP saturates at zero below threshold: the strategy that
  // clicks for both settings is squeezed between two distinct rank-one
  // operators and must vanish, so positive closed-form values are not attained
  for (double alpha : {0.3, std::numbers::pi / 4.0}) {
    for (double eps : {0.45, 0.62, 0.8, 0.95}) {
      for (double delta : {0.9, 1.7, 2.5}) {
        const Assemblage a = steered_assemblage(phi_plus_alpha(alpha), one_click_family(2, delta, eps));
        const double mu_sdp = lhs_spectral_robustness(a);
        const double mu_cf = primal_value(a);
        CHECK(std::abs(mu_sdp - std::min(0.0, mu_cf)) <= tol::duality_gap);
      }
    }
  }
}

TEST_CASE("spectral robustness of an explicitly unsteerable flat assemblage") {
  // sigma_{+|x} = 0.3 * I/2 for both settings admits the trivial LHS model;
  // the mu-SDP must report a non-negative robustness
  Assemblage a;
  a.X = 2;
  a.dim_B = 2;
  const ComplexMatrix half = 0.15 * ComplexMatrix::identity(2);
  const ComplexMatrix rest = 0.35 * ComplexMatrix::identity(2);
  a.click = {half, half};
  a.null = {rest, rest};
  CHECK(lhs_spectral_robustness(a) >= -1e-9);
}

TEST_CASE("solver reports tight residuals on the steering problems") {
  const Assemblage a = steered_assemblage(phi_plus_alpha(std::numbers::pi / 4.0), one_click_family(2, 1.8, 0.9));
  SdpProblem p;
  const DeterministicStrategySet strategies{2};
  p.block_dims.assign(4, 2);
  p.num_free = 1;
  p.c_free = {-1.0};
  const ComplexMatrix id = ComplexMatrix::identity(2);
  for (int x = 0; x < 2; ++x) {
    std::vector<double> coeffs(4, 0.0);
    int nx = 0;
    for (int l = 0; l < 4; ++l)
      if (strategies.clicks(l, x)) {
        coeffs[static_cast<size_t>(l)] = 1.0;
        ++nx;
      }
    add_matrix_equality(p, coeffs, {static_cast<double>(nx) * id}, a.click[static_cast<size_t>(x)]);
  }
  add_matrix_equality(p, {1.0, 1.0, 1.0, 1.0}, {4.0 * id}, a.rho_B());
  const SdpSolution s = solve_sdp(p);
  REQUIRE(s.ok());
  CHECK(s.residuals.primal_infeasibility <= 1e-8);
  CHECK(s.residuals.dual_infeasibility <= 1e-8);
  CHECK(s.residuals.duality_gap <= 1e-8);
  CHECK(s.free_vars[0] == doctest::Approx(primal_value(a)).epsilon(1e-6));
}

TEST_CASE("deterministic strategy enumeration covers all click patterns") {
  const DeterministicStrategySet s{3};
  CHECK(s.size() == 8);
  int click_count = 0;
  for (int l = 0; l < s.size(); ++l)
    for (int x = 0; x < 3; ++x)
      if (s.clicks(l, x)) ++click_count;
  CHECK(click_count == 12);  // each setting clicks in half the strategies
  CHECK_FALSE(s.clicks(0, 0));
  CHECK(s.clicks(7, 2));
}

TEST_CASE("add_matrix_equality validates shapes") {
  SdpProblem p;
  p.block_dims = {2};
  p.num_free = 1;
  CHECK_THROWS(add_matrix_equality(p, {1.0, 2.0}, {ComplexMatrix::identity(2)}, ComplexMatrix::identity(2)));
  CHECK_THROWS(add_matrix_equality(p, {1.0}, {}, ComplexMatrix::identity(2)));
}
