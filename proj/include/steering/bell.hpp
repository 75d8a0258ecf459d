// Eberhard/CH/CHSH analysis: Bell operator, noise-efficiency curves, PR-box
// thresholds, and null-assignment strategies.
#pragma once

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "steering/linalg.hpp"

namespace steering {

// Two-input bipartite behavior p(ab|xy), 2 or 3 outcomes per party. For
// 3-outcome behaviors the outcome index 2 is the null symbol.
struct Behavior {
  int outcomes = 2;
  // p[x][y][a][b]
  std::array<std::array<std::array<std::array<double, 3>, 3>, 2>, 2> p{};

  double& at(int x, int y, int a, int b) {
    return p[static_cast<size_t>(x)][static_cast<size_t>(y)][static_cast<size_t>(a)][static_cast<size_t>(b)];
  }
  double at(int x, int y, int a, int b) const {
    return p[static_cast<size_t>(x)][static_cast<size_t>(y)][static_cast<size_t>(a)][static_cast<size_t>(b)];
  }

  double marginal_A(int a, int x, int y = 0) const {
    double s = 0.0;
    for (int b = 0; b < outcomes; ++b) s += at(x, y, a, b);
    return s;
  }
  double marginal_B(int b, int y, int x = 0) const {
    double s = 0.0;
    for (int a = 0; a < outcomes; ++a) s += at(x, y, a, b);
    return s;
  }

  double no_signalling_residual() const {
    double m = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int a = 0; a < outcomes; ++a) m = std::max(m, std::abs(marginal_A(a, x, 0) - marginal_A(a, x, 1)));
    for (int y = 0; y < 2; ++y)
      for (int b = 0; b < outcomes; ++b) m = std::max(m, std::abs(marginal_B(b, y, 0) - marginal_B(b, y, 1)));
    return m;
  }

  void validate() const {
    if (outcomes != 2 && outcomes != 3) throw std::invalid_argument("Behavior: outcomes must be 2 or 3");
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        double s = 0.0;
        for (int a = 0; a < outcomes; ++a)
          for (int b = 0; b < outcomes; ++b) {
            if (at(x, y, a, b) < -1e-12) throw std::invalid_argument("Behavior: negative probability");
            s += at(x, y, a, b);
          }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("Behavior: table not normalized");
      }
    if (no_signalling_residual() > 1e-10) throw std::invalid_argument("Behavior: signalling detected");
  }
};

struct BellOperator {
  ComplexMatrix matrix{4};
  double epsilon = 1.0;
  double phi_x = 0.0, phi_y = 0.0;
};

// E = p(00|11) + p(10|10) + p(n0|10) + p(01|01) + p(0n|01) - p(00|00); >= 0
// for every LHV behavior.
inline double eberhard_value(const Behavior& b) {
  if (b.outcomes != 3) throw std::invalid_argument("eberhard_value: 3-outcome behavior required");
  b.validate();
  return b.at(1, 1, 0, 0) + b.at(1, 0, 1, 0) + b.at(1, 0, 2, 0) + b.at(0, 1, 0, 1) + b.at(0, 1, 0, 2) -
         b.at(0, 0, 0, 0);
}

// The 4x4 operator with T = eps/2 (e^{i phi_x} - 1), R = (e^{i phi_y} - 1),
// prefactor eps/2; Tr = 2 eps (2 - eps).
inline BellOperator bell_operator(double epsilon, double phi_x, double phi_y) {
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("bell_operator: epsilon must lie in [0,1]");
  const cplx T = 0.5 * epsilon * (std::polar(1.0, phi_x) - 1.0);
  const cplx R = std::polar(1.0, phi_y) - 1.0;
  const double d = 2.0 - epsilon, o = 1.0 - epsilon;
  const cplx TR = T * R;
  ComplexMatrix m(4);
  m(0, 0) = d;  m(0, 1) = o;  m(0, 2) = o;  m(0, 3) = TR - epsilon;
  m(1, 0) = o;  m(1, 1) = d;  m(1, 2) = T * std::conj(R) - epsilon;  m(1, 3) = o;
  m(2, 0) = o;  m(2, 1) = std::conj(T) * R - epsilon;  m(2, 2) = d;  m(2, 3) = o;
  m(3, 0) = std::conj(TR) - epsilon;  m(3, 1) = o;  m(3, 2) = o;  m(3, 3) = d;
  BellOperator op;
  op.matrix = (0.5 * epsilon) * m;
  op.epsilon = epsilon;
  op.phi_x = phi_x;
  op.phi_y = phi_y;
  return op;
}

struct AngleOptimum {
  double lambda_min = 0.0;
  double phi_x = 0.0, phi_y = 0.0;
};

// Global minimum of lambda_min(B(eps, phi_x, phi_y)) over [0, 2pi)^2: coarse
// grid then shrinking pattern search to angle tolerance 1e-6.
inline AngleOptimum min_eig_over_angles(double epsilon, int grid = 64) {
  if (grid < 64) throw std::invalid_argument("min_eig_over_angles: grid must be >= 64");
  auto f = [&](double px, double py) { return min_eigenvalue(bell_operator(epsilon, px, py).matrix); };
  const double two_pi = 2.0 * std::numbers::pi;
  AngleOptimum best;
  best.lambda_min = 1e300;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double px = two_pi * i / grid, py = two_pi * j / grid;
      const double v = f(px, py);
      if (v < best.lambda_min) best = {v, px, py};
    }
  double step = two_pi / grid;
  while (step > 1e-7) {
    bool improved = false;
    for (const auto& [dx, dy] : std::array<std::array<double, 2>, 4>{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}}) {
      const double px = best.phi_x + dx * step, py = best.phi_y + dy * step;
      const double v = f(px, py);
      if (v < best.lambda_min - 1e-15) {
        best = {v, px, py};
        improved = true;
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

struct NoiseThreshold {
  double eta = 0.0;
  bool below_threshold = false;
};

// eta = 1 / (1 - eps(2-eps)/(2 lambda_min)) at the angle-optimal lambda_min.
inline NoiseThreshold noise_threshold_optimized(double epsilon) {
  const AngleOptimum opt = min_eig_over_angles(epsilon);
  if (opt.lambda_min >= -1e-12) return {0.0, true};
  return {1.0 / (1.0 - epsilon * (2.0 - epsilon) / (2.0 * opt.lambda_min)), false};
}

// eta solving eps[(1-eta) S_max + eta/2 - 1] = -1 with S_max = (1-sqrt(2))/2.
inline NoiseThreshold noise_threshold_maxent(double epsilon) {
  if (epsilon <= 0.0) return {0.0, true};
  const double s_max = 0.5 * (1.0 - std::sqrt(2.0));
  const double eta = (1.0 - 1.0 / epsilon - s_max) / (0.5 - s_max);
  if (eta <= 0.0) return {0.0, true};
  return {eta, false};
}

inline Behavior pr_box() {
  Behavior b;
  b.outcomes = 2;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb)
          b.at(x, y, a, bb) = ((a ^ bb) == (x & y)) ? 0.5 : 0.0;
  return b;
}

// C = C00 + C01 + C10 - C11 with Cxy the correlators; local bound 2.
inline double chsh_value(const Behavior& b) {
  if (b.outcomes != 2) throw std::invalid_argument("chsh_value: 2-outcome behavior required");
  b.validate();
  auto corr = [&](int x, int y) {
    return b.at(x, y, 0, 0) + b.at(x, y, 1, 1) - b.at(x, y, 0, 1) - b.at(x, y, 1, 0);
  };
  return corr(0, 0) + corr(0, 1) + corr(1, 0) - corr(1, 1);
}

// S = p(00|11) - p(00|10) - p(00|01) - p(00|00) + pA(0|0) + pB(0|0); >= 0 for LHV.
inline double ch_value(const Behavior& b) {
  if (b.outcomes != 2) throw std::invalid_argument("ch_value: 2-outcome behavior required");
  b.validate();
  return b.at(1, 1, 0, 0) - b.at(1, 0, 0, 0) - b.at(0, 1, 0, 0) - b.at(0, 0, 0, 0) + b.marginal_A(0, 0) +
         b.marginal_B(0, 0);
}

// 9-outcome map: eps^2 on joint outcomes, eps(1-eps) on single-null entries
// weighted by the input marginals, (1-eps)^2 on the double null.
inline Behavior apply_inefficiency(const Behavior& b, double epsilon) {
  if (b.outcomes != 2) throw std::invalid_argument("apply_inefficiency: 2-outcome behavior required");
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("apply_inefficiency: epsilon must lie in [0,1]");
  b.validate();
  Behavior out;
  out.outcomes = 3;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) out.at(x, y, a, bb) = epsilon * epsilon * b.at(x, y, a, bb);
      for (int a = 0; a < 2; ++a) out.at(x, y, a, 2) = epsilon * (1.0 - epsilon) * b.marginal_A(a, x, y);
      for (int bb = 0; bb < 2; ++bb) out.at(x, y, 2, bb) = (1.0 - epsilon) * epsilon * b.marginal_B(bb, y, x);
      out.at(x, y, 2, 2) = (1.0 - epsilon) * (1.0 - epsilon);
    }
  return out;
}

// Local (possibly probabilistic) null-assignment: to_one[x] is the probability
// of mapping the null symbol to outcome 1 at that input.
struct AssignmentStrategy {
  std::array<double, 2> alice_to_one{1.0, 1.0};
  std::array<double, 2> bob_to_one{1.0, 1.0};

  void validate() const {
    for (double q : alice_to_one)
      if (q < 0.0 || q > 1.0) throw std::invalid_argument("AssignmentStrategy: probability outside [0,1]");
    for (double q : bob_to_one)
      if (q < 0.0 || q > 1.0) throw std::invalid_argument("AssignmentStrategy: probability outside [0,1]");
  }
};

inline Behavior assign_nulls(const Behavior& b, const AssignmentStrategy& s) {
  if (b.outcomes != 3) throw std::invalid_argument("assign_nulls: 3-outcome behavior required");
  s.validate();
  b.validate();
  Behavior out;
  out.outcomes = 2;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double qa = s.alice_to_one[static_cast<size_t>(x)], qb = s.bob_to_one[static_cast<size_t>(y)];
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) {
          const double wa = (a == 1) ? qa : 1.0 - qa;  // P(null -> a)
          const double wb = (bb == 1) ? qb : 1.0 - qb;
          out.at(x, y, a, bb) = b.at(x, y, a, bb) + wa * b.at(x, y, 2, bb) + wb * b.at(x, y, a, 2) +
                                wa * wb * b.at(x, y, 2, 2);
        }
    }
  return out;
}

inline AssignmentStrategy all_nulls_to_one() { return AssignmentStrategy{}; }

// Quantum 3-outcome behavior for a two-qubit state, click projectors in the
// sigma1-sigma2 plane: setting 0 has Bloch vector (1,0,0), setting 1 the
// vector (Re e^{-i phi}, Im e^{-i phi}, 0); both detectors have efficiency eps.
inline Behavior quantum_behavior(const ComplexMatrix& rho_ab, double epsilon, double phi_x, double phi_y) {
  if (rho_ab.dim() != 4) throw std::invalid_argument("quantum_behavior: 4x4 state required");
  auto projector = [](double phi, int outcome) {
    const double n1 = std::cos(phi), n2 = -std::sin(phi);
    const double sgn = (outcome == 0) ? 1.0 : -1.0;
    ComplexMatrix m(2);
    m(0, 0) = 0.5;
    m(1, 1) = 0.5;
    m(0, 1) = 0.5 * sgn * cplx{n1, -n2};
    m(1, 0) = 0.5 * sgn * cplx{n1, n2};
    return m;
  };
  auto effect = [&](double phi, int outcome) {
    if (outcome == 2) return (1.0 - epsilon) * ComplexMatrix::identity(2);
    return epsilon * projector(phi, outcome);
  };
  Behavior b;
  b.outcomes = 3;
  const std::array<double, 2> phis_a{0.0, phi_x}, phis_b{0.0, phi_y};
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 3; ++a)
        for (int bb = 0; bb < 3; ++bb)
          b.at(x, y, a, bb) = hs_inner(kron(effect(phis_a[static_cast<size_t>(x)], a),
                                            effect(phis_b[static_cast<size_t>(y)], bb)),
                                       rho_ab)
                                  .real();
  return b;
}

// Random no-signalling behavior: convex mix of the PR box and the 16 local
// deterministic points.
inline Behavior random_ns_behavior(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<double, 17> w{};
  double s = 0.0;
  for (auto& v : w) {
    v = u(rng);
    s += v;
  }
  for (auto& v : w) v /= s;
  Behavior out;
  out.outcomes = 2;
  const Behavior pr = pr_box();
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) out.at(x, y, a, bb) = w[16] * pr.at(x, y, a, bb);
  for (int k = 0; k < 16; ++k) {
    const int a0 = k & 1, a1 = (k >> 1) & 1, b0 = (k >> 2) & 1, b1 = (k >> 3) & 1;
    const std::array<int, 2> av{a0, a1}, bv{b0, b1};
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        out.at(x, y, av[static_cast<size_t>(x)], bv[static_cast<size_t>(y)]) += w[static_cast<size_t>(k)];
  }
  return out;
}

}  // namespace steering
