#include <doctest.h>

#include <numbers>

#include "steering/simulate.hpp"

using namespace steering;

namespace {

const std::array<double, 3> kPerfectDetectors{1.0, 1.0, 1.0};

}  // namespace

TEST_CASE("simulation is deterministic in the seed") {
  const SchmidtState s = phi_plus_alpha(std::numbers::pi / 4.0);
  const MeasurementFamily f = one_click_family(2, 1.8, 0.7);
  const POVM povm = trine_povm();
  const CountData a = simulate_counts(s, f, povm, kPerfectDetectors, 50000, 99);
  const CountData b = simulate_counts(s, f, povm, kPerfectDetectors, 50000, 99);
  const CountData c = simulate_counts(s, f, povm, kPerfectDetectors, 50000, 100);
  CHECK(a.coincidences == b.coincidences);
  CHECK(a.singles == b.singles);
  CHECK(a.coincidences != c.coincidences);
  a.validate();
}

TEST_CASE("counts are complete and bounded by the heralds") {
  const SchmidtState s = phi_plus_alpha(0.5);
  const MeasurementFamily f = one_click_family(2, 2.2, 0.6);
  const CountData c = simulate_counts(s, f, trine_povm(), kPerfectDetectors, 30000, 7);
  for (int x = 0; x < 2; ++x) {
    // with perfect Bob detectors the singles sum to the heralds exactly
    CHECK(c.singles[static_cast<size_t>(x)][0] + c.singles[static_cast<size_t>(x)][1] +
              c.singles[static_cast<size_t>(x)][2] ==
          30000);
    for (int i = 0; i < 3; ++i)
      CHECK(c.coincidences[static_cast<size_t>(x)][static_cast<size_t>(i)] <=
            c.singles[static_cast<size_t>(x)][static_cast<size_t>(i)]);
  }
}

TEST_CASE("zero Alice efficiency yields zero coincidences") {
  const SchmidtState s = phi_plus_alpha(std::numbers::pi / 4.0);
  const MeasurementFamily f = one_click_family(2, 1.5, 0.0);
  const CountData c = simulate_counts(s, f, trine_povm(), kPerfectDetectors, 10000, 3);
  for (int x = 0; x < 2; ++x)
    for (int i = 0; i < 3; ++i) CHECK(c.coincidences[static_cast<size_t>(x)][static_cast<size_t>(i)] == 0);
}

TEST_CASE("count-to-probability formulas on exact expected counts round-trip") {
  // pushing the exact expected counts through the estimator arithmetic must
  // reproduce the model probabilities to machine precision
  const SchmidtState s = phi_plus_alpha(0.62);
  const MeasurementFamily f = one_click_family(2, 2.0, 0.55);
  const POVM povm = trine_povm();
  const Assemblage a = steered_assemblage(s, f);
  const double n = 1e6;
  std::vector<std::array<double, 3>> coin, sing;
  for (int x = 0; x < 2; ++x) {
    const auto p = joint_distribution(a, povm, x);
    std::array<double, 3> rc{}, rs{};
    for (int b = 0; b < 3; ++b) {
      rc[static_cast<size_t>(b)] = n * p[0][static_cast<size_t>(b)];
      rs[static_cast<size_t>(b)] = n * (p[0][static_cast<size_t>(b)] + p[1][static_cast<size_t>(b)]);
    }
    coin.push_back(rc);
    sing.push_back(rs);
  }
  const ProbabilityTables t = probabilities_from_real_counts(coin, sing);
  for (int x = 0; x < 2; ++x) {
    const auto p = joint_distribution(a, povm, x);
    for (int aa = 0; aa < 2; ++aa)
      for (int b = 0; b < 3; ++b)
        CHECK(std::abs(t.joint(x, aa, b) - p[static_cast<size_t>(aa)][static_cast<size_t>(b)]) <= 1e-12);
  }
}

TEST_CASE("probability extraction rejects degenerate counts") {
  std::vector<std::array<double, 3>> zero{{0.0, 0.0, 0.0}};
  std::vector<std::array<double, 3>> sing{{10.0, 10.0, 10.0}};
  CHECK_THROWS(probabilities_from_real_counts(zero, zero));   // zero singles
  CHECK_THROWS(probabilities_from_real_counts(zero, sing));   // zero coincidences
  CHECK_THROWS(probabilities_from_real_counts(sing, sing));   // zero null events
}

TEST_CASE("efficiency estimation is unbiased and state-independent") {
  const POVM povm = trine_povm();
  for (double alpha : {0.3, std::numbers::pi / 4.0}) {
    const SchmidtState s = phi_plus_alpha(alpha);
    for (double eps : {0.516, 0.7}) {
      const MeasurementFamily f = one_click_family(2, 1.8, eps);
      const CountData axis = simulate_counts(s, f, povm, kPerfectDetectors, 2000000, 11);
      const CountData orth = simulate_counts(s, orthogonal_family(f), povm, kPerfectDetectors, 2000000, 12);
      const double est = estimate_efficiency(axis, orth);
      CHECK(std::abs(est - eps) <= 3e-3);  // a few sigma at N = 2e6
    }
  }
}

TEST_CASE("orthogonal family flips every click projector") {
  const MeasurementFamily f = one_click_family(2, 1.4, 0.8);
  const MeasurementFamily g = orthogonal_family(f);
  for (int x = 0; x < 2; ++x)
    CHECK((f.projector(x) + g.projector(x) - ComplexMatrix::identity(2)).max_abs() <= 1e-12);
}

TEST_CASE("Bob-side inefficiency thins singles and coincidences together") {
  const SchmidtState s = phi_plus_alpha(std::numbers::pi / 4.0);
  const MeasurementFamily f = one_click_family(2, 1.8, 0.8);
  const std::array<double, 3> eps_B{0.5, 0.5, 0.5};
  const CountData thin = simulate_counts(s, f, trine_povm(), eps_B, 1000000, 21);
  thin.validate();
  std::uint64_t total = 0;
  for (int x = 0; x < 2; ++x)
    total += thin.singles[static_cast<size_t>(x)][0] + thin.singles[static_cast<size_t>(x)][1] +
             thin.singles[static_cast<size_t>(x)][2];
  // halved detector efficiency halves the retained singles
  CHECK(std::abs(static_cast<double>(total) / 2e6 - 0.5) <= 3e-3);
}

TEST_CASE("pipeline produces parameters consistent with the ideal theory") {
  PipelineConfig cfg;
  cfg.alpha = std::numbers::pi / 4.0;
  cfg.epsilon = 0.7;
  cfg.deltas = {1.6};
  cfg.n_heralds = 300000;
  cfg.repetitions = 4;
  cfg.seed = 17;
  const PipelineReport rep = run_pipeline(cfg);
  REQUIRE(rep.points.size() == 1);
  const PipelinePoint& pt = rep.points[0];
  CHECK(pt.overlap == doctest::Approx(std::cos(0.8) * std::cos(0.8)).epsilon(1e-12));
  const double ideal = primal_value(
      steered_assemblage(phi_plus_alpha(cfg.alpha), one_click_family(2, 1.6, cfg.epsilon)));
  CHECK(std::abs(pt.mean_parameter - ideal) <= 6.0 * pt.stderr_parameter + 1e-4);
  CHECK(pt.mean_parameter < 0.0);  // far inside the steerable region
  CHECK(std::abs(pt.epsilon_estimate - cfg.epsilon) <= 6.0 * pt.stderr_epsilon + 1e-3);
  CHECK(static_cast<int>(pt.parameters.size()) == cfg.repetitions);
}

TEST_CASE("pipeline validation") {
  PipelineConfig cfg;
  cfg.deltas = {};
  CHECK_THROWS(run_pipeline(cfg));
  cfg.deltas = {1.0};
  cfg.repetitions = 1;
  CHECK_THROWS(run_pipeline(cfg));
}
