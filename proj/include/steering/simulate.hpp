// Monte Carlo model of the photonic experiment and the count-to-probability
// pipeline: counts -> probabilities -> maximum-likelihood assemblage ->
// witness -> steering parameter.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "steering/lhs.hpp"
#include "steering/quantum.hpp"
#include "steering/witness.hpp"

namespace steering {

// Raw record for one measurement family: per setting, coincidences between
// Alice's click and each of Bob's three detectors, and Bob's singles.
struct CountData {
  int X = 2;
  std::uint64_t n_heralds = 0;  // trials per setting
  std::uint64_t seed = 0;
  std::vector<std::array<std::uint64_t, 3>> coincidences;  // C(A, B_i) per x
  std::vector<std::array<std::uint64_t, 3>> singles;       // S(B_i) per x

  void validate() const {
    if (static_cast<int>(coincidences.size()) != X || static_cast<int>(singles.size()) != X)
      throw std::invalid_argument("CountData: row count mismatch");
    for (int x = 0; x < X; ++x)
      for (int i = 0; i < 3; ++i)
        if (coincidences[static_cast<size_t>(x)][static_cast<size_t>(i)] >
            singles[static_cast<size_t>(x)][static_cast<size_t>(i)])
          throw std::invalid_argument("CountData: coincidences exceed singles");
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Multinomial draw over `probs` (need not be exhaustively normalized; the
// remainder is discarded) via a chain of binomials.
inline std::vector<std::uint64_t> multinomial(std::mt19937_64& rng, std::uint64_t n, const std::vector<double>& probs) {
  std::vector<std::uint64_t> out(probs.size(), 0);
  double remaining = 1.0;
  std::uint64_t left = n;
  for (size_t k = 0; k < probs.size() && left > 0; ++k) {
    const double p = std::min(1.0, std::max(0.0, probs[k] / remaining));
    std::binomial_distribution<std::uint64_t> bin(left, p);
    const std::uint64_t c = (p >= 1.0) ? left : bin(rng);
    out[k] = c;
    left -= c;
    remaining -= probs[k];
    if (remaining <= 0.0) break;
  }
  return out;
}

}  // namespace detail

// Joint distribution p(a,b|x) = Tr[E_b sigma_{a|x}], a in {click, null},
// b the trine outcome.
inline std::array<std::array<double, 3>, 2> joint_distribution(const Assemblage& a, const POVM& povm, int x) {
  std::array<std::array<double, 3>, 2> p{};
  for (int b = 0; b < 3; ++b) {
    p[0][static_cast<size_t>(b)] = hs_inner(povm.effects[static_cast<size_t>(b)], a.click[static_cast<size_t>(x)]).real();
    p[1][static_cast<size_t>(b)] = hs_inner(povm.effects[static_cast<size_t>(b)], a.null[static_cast<size_t>(x)]).real();
  }
  return p;
}

// One multinomial draw per setting over the six joint cells; Bob-side
// inefficiency thins both singles and coincidences per detector, preserving
// C <= S. Deterministic given the seed.
inline CountData simulate_counts(const SchmidtState& state, const MeasurementFamily& family, const POVM& povm,
                                 const std::array<double, 3>& eps_B, std::uint64_t n_heralds, std::uint64_t seed) {
  if (n_heralds < 1) throw std::invalid_argument("simulate_counts: n_heralds must be >= 1");
  for (double e : eps_B)
    if (e < 0.0 || e > 1.0) throw std::invalid_argument("simulate_counts: detector efficiency outside [0,1]");
  const Assemblage a = steered_assemblage(state, family);
  CountData c;
  c.X = family.X;
  c.n_heralds = n_heralds;
  c.seed = seed;
  for (int x = 0; x < family.X; ++x) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(0x5e77u + static_cast<std::uint64_t>(x))));
    const auto p = joint_distribution(a, povm, x);
    std::vector<double> flat;
    for (int aa = 0; aa < 2; ++aa)
      for (int b = 0; b < 3; ++b) flat.push_back(std::max(0.0, p[static_cast<size_t>(aa)][static_cast<size_t>(b)]));
    const auto cells = detail::multinomial(rng, n_heralds, flat);
    std::array<std::uint64_t, 3> coin{}, sing{};
    for (int b = 0; b < 3; ++b) {
      std::uint64_t click = cells[static_cast<size_t>(b)], nul = cells[static_cast<size_t>(3 + b)];
      const double eb = eps_B[static_cast<size_t>(b)];
      if (eb < 1.0) {
        std::binomial_distribution<std::uint64_t> tc(click, eb), tn(nul, eb);
        click = (click > 0) ? tc(rng) : 0;
        nul = (nul > 0) ? tn(rng) : 0;
      }
      coin[static_cast<size_t>(b)] = click;
      sing[static_cast<size_t>(b)] = click + nul;
    }
    c.coincidences.push_back(coin);
    c.singles.push_back(sing);
  }
  return c;
}

// The eight count-to-probability formulas, on real-valued counts so that
// exact expectations can be pushed through the identical arithmetic.
inline ProbabilityTables probabilities_from_real_counts(const std::vector<std::array<double, 3>>& coincidences,
                                                        const std::vector<std::array<double, 3>>& singles) {
  if (coincidences.size() != singles.size() || coincidences.empty())
    throw std::invalid_argument("probabilities_from_real_counts: shape mismatch");
  ProbabilityTables t;
  for (size_t x = 0; x < coincidences.size(); ++x) {
    const auto& C = coincidences[x];
    const auto& S = singles[x];
    const double cs = C[0] + C[1] + C[2], ss = S[0] + S[1] + S[2];
    if (ss <= 0.0) throw std::invalid_argument("probabilities_from_real_counts: zero singles sum");
    if (cs <= 0.0) throw std::invalid_argument("probabilities_from_real_counts: zero coincidence sum");
    if (ss - cs <= 0.0) throw std::invalid_argument("probabilities_from_real_counts: zero null-event sum");
    std::array<double, 2> marg{cs / ss, 1.0 - cs / ss};
    std::array<std::array<double, 3>, 2> cond{};
    for (int b = 0; b < 3; ++b) {
      cond[0][static_cast<size_t>(b)] = C[static_cast<size_t>(b)] / cs;
      cond[1][static_cast<size_t>(b)] = (S[static_cast<size_t>(b)] - C[static_cast<size_t>(b)]) / (ss - cs);
    }
    t.alice_marginal.push_back(marg);
    t.bob_conditional.push_back(cond);
  }
  t.validate();
  return t;
}

inline ProbabilityTables probabilities_from_counts(const CountData& c) {
  c.validate();
  std::vector<std::array<double, 3>> coin, sing;
  for (int x = 0; x < c.X; ++x) {
    std::array<double, 3> rc{}, rs{};
    for (int i = 0; i < 3; ++i) {
      rc[static_cast<size_t>(i)] = static_cast<double>(c.coincidences[static_cast<size_t>(x)][static_cast<size_t>(i)]);
      rs[static_cast<size_t>(i)] = static_cast<double>(c.singles[static_cast<size_t>(x)][static_cast<size_t>(i)]);
    }
    coin.push_back(rc);
    sing.push_back(rs);
  }
  return probabilities_from_real_counts(coin, sing);
}

// Family with each click vector replaced by its orthogonal complement
// (half-wave plate rotated +45 degrees).
inline MeasurementFamily orthogonal_family(const MeasurementFamily& f) {
  MeasurementFamily g = f;
  for (auto& mu : g.amplitude_angles) mu += std::numbers::pi;
  return g;
}

// Sum of heralding efficiencies along the measurement axis and its orthogonal
// axis, averaged over settings; equals the family efficiency in expectation.
inline double estimate_efficiency(const CountData& axis, const CountData& orthogonal) {
  axis.validate();
  orthogonal.validate();
  if (axis.X != orthogonal.X || axis.n_heralds != orthogonal.n_heralds)
    throw std::invalid_argument("estimate_efficiency: mismatched records");
  double total = 0.0;
  for (int x = 0; x < axis.X; ++x) {
    double est = 0.0;
    for (const CountData* c : {&axis, &orthogonal}) {
      const auto& C = c->coincidences[static_cast<size_t>(x)];
      const auto& S = c->singles[static_cast<size_t>(x)];
      const double ss = static_cast<double>(S[0] + S[1] + S[2]);
      if (ss <= 0.0) throw std::invalid_argument("estimate_efficiency: zero singles sum");
      est += static_cast<double>(C[0] + C[1] + C[2]) / ss;
    }
    total += est;
  }
  return total / axis.X;
}

struct PipelineConfig {
  double alpha = std::numbers::pi / 4.0;
  double epsilon = 0.6;
  std::vector<double> deltas;  // spacing grid
  std::uint64_t n_heralds = 1000000;
  int repetitions = 10;
  std::uint64_t seed = 1;
  std::array<double, 3> eps_B{1.0, 1.0, 1.0};
};

struct PipelinePoint {
  double delta = 0.0;
  double overlap = 0.0;  // cos^2(delta/2)
  double mean_parameter = 0.0;
  double stderr_parameter = 0.0;
  double epsilon_estimate = 0.0;
  double stderr_epsilon = 0.0;
  std::vector<double> parameters;  // per repetition
};

struct PipelineReport {
  PipelineConfig config;
  std::vector<PipelinePoint> points;
};

// Least-squares linear inversion of the joint probabilities onto real
// symmetric operators: Tr[E_b sigma_{a|x}] = P(a,b|x). Unlike the MLE it is
// linear in the measured frequencies, hence unbiased, but its output may dip
// outside the PSD cone; it is meant for evaluating linear witnesses only.
inline Assemblage linear_inversion_assemblage(const ProbabilityTables& tables, const POVM& povm) {
  tables.validate();
  povm.validate();
  const int nb = static_cast<int>(povm.effects.size());
  Assemblage a;
  a.X = tables.settings();
  a.dim_B = 2;
  for (int x = 0; x < a.X; ++x) {
    std::array<ComplexMatrix, 2> rec{ComplexMatrix(2), ComplexMatrix(2)};
    for (int aa = 0; aa < 2; ++aa) {
      // normal equations over the (m00, m01, m11) parameterization
      std::vector<double> A(9, 0.0), rhs(3, 0.0);
      for (int b = 0; b < nb; ++b) {
        const ComplexMatrix& e = povm.effects[static_cast<size_t>(b)];
        const std::array<double, 3> row{e(0, 0).real(), 2.0 * e(0, 1).real(), e(1, 1).real()};
        const double p = tables.joint(x, aa, b);
        for (int i = 0; i < 3; ++i) {
          rhs[static_cast<size_t>(i)] += row[static_cast<size_t>(i)] * p;
          for (int j = 0; j < 3; ++j) A[static_cast<size_t>(3 * i + j)] += row[static_cast<size_t>(i)] * row[static_cast<size_t>(j)];
        }
      }
      if (!detail::lu_solve(A, rhs, 3))
        throw std::invalid_argument("linear_inversion_assemblage: POVM does not span the real operator space");
      ComplexMatrix m(2);
      m(0, 0) = rhs[0];
      m(0, 1) = rhs[1];
      m(1, 0) = rhs[1];
      m(1, 1) = rhs[2];
      rec[static_cast<size_t>(aa)] = m;
    }
    a.click.push_back(rec[0]);
    a.null.push_back(rec[1]);
  }
  return a;
}

// Full loop for one (delta, repetition): simulate, tabulate, reconstruct by
// MLE, read the optimal witness off the reconstruction, then evaluate that
// witness linearly on the linear-inversion assemblage of the same
// frequencies. The split matters statistically: the witness functional is
// linear in the measured probabilities, so the reported parameter is free of
// the positivity-projection bias the MLE introduces near rank-deficient
// assemblages.
inline double pipeline_parameter(const CountData& counts, const POVM& povm) {
  const ProbabilityTables t = probabilities_from_counts(counts);
  const MleResult mle = mle_assemblage(t, povm);
  const SteeringResult closed = evaluate_closed_form(mle.assemblage);
  const Assemblage linear = linear_inversion_assemblage(t, povm);
  return steering_parameter(closed.witness, linear).parameter;
}

inline PipelineReport run_pipeline(const PipelineConfig& cfg) {
  if (cfg.deltas.empty()) throw std::invalid_argument("run_pipeline: empty delta grid");
  if (cfg.repetitions < 2) throw std::invalid_argument("run_pipeline: at least 2 repetitions required");
  const SchmidtState state = phi_plus_alpha(cfg.alpha);
  const POVM povm = trine_povm();
  PipelineReport report;
  report.config = cfg;
  for (size_t di = 0; di < cfg.deltas.size(); ++di) {
    const double delta = cfg.deltas[di];
    const MeasurementFamily fam = one_click_family(2, delta, cfg.epsilon);
    const MeasurementFamily orth = orthogonal_family(fam);
    PipelinePoint pt;
    pt.delta = delta;
    pt.overlap = std::cos(delta / 2.0) * std::cos(delta / 2.0);
    std::vector<double> eps_est;
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const std::uint64_t s =
          detail::splitmix64(cfg.seed ^ detail::splitmix64(1000003ULL * di + static_cast<std::uint64_t>(rep)));
      const CountData axis = simulate_counts(state, fam, povm, cfg.eps_B, cfg.n_heralds, s);
      const CountData orth_counts = simulate_counts(state, orth, povm, cfg.eps_B, cfg.n_heralds, detail::splitmix64(s));
      pt.parameters.push_back(pipeline_parameter(axis, povm));
      eps_est.push_back(estimate_efficiency(axis, orth_counts));
    }
    auto mean_stderr = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - m) * (x - m);
      const double sd = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
      return std::pair<double, double>{m, sd / std::sqrt(static_cast<double>(v.size()))};
    };
    std::tie(pt.mean_parameter, pt.stderr_parameter) = mean_stderr(pt.parameters);
    std::tie(pt.epsilon_estimate, pt.stderr_epsilon) = mean_stderr(eps_est);
    report.points.push_back(pt);
  }
  return report;
}

}  // namespace steering
