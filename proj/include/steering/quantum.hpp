// States, one-click measurement families, POVMs, and assemblage construction.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "steering/linalg.hpp"

namespace steering {

// Bipartite pure state as descending squared Schmidt coefficients plus local bases.
struct SchmidtState {
  std::vector<double> coeffs;  // lambda_i >= 0, descending, sum 1
  int dim_A = 2;
  int dim_B = 2;
  std::vector<std::vector<cplx>> basis_A;
  std::vector<std::vector<cplx>> basis_B;

  bool entangled() const { return coeffs.size() > 1 && coeffs[1] > 1e-12; }

  double concurrence() const {
    if (coeffs.size() < 2) return 0.0;
    return 2.0 * std::sqrt(coeffs[0] * coeffs[1]);
  }

  // Reduced state of Bob in his Schmidt basis coordinates (diagonal).
  ComplexMatrix rho_B() const {
    ComplexMatrix r(dim_B);
    for (int i = 0; i < dim_B && i < static_cast<int>(coeffs.size()); ++i) r(i, i) = coeffs[static_cast<size_t>(i)];
    return r;
  }

  // Density operator of the joint state, dim_A*dim_B, Schmidt-basis coordinates.
  ComplexMatrix rho_AB() const {
    std::vector<cplx> psi(static_cast<size_t>(dim_A * dim_B), cplx{0.0, 0.0});
    for (int i = 0; i < static_cast<int>(coeffs.size()); ++i)
      psi[static_cast<size_t>(i * dim_B + i)] = std::sqrt(coeffs[static_cast<size_t>(i)]);
    return ComplexMatrix::outer(psi, psi);
  }

  void validate() const {
    double s = 0.0;
    for (size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i] < -1e-12) throw std::invalid_argument("SchmidtState: negative coefficient");
      if (i > 0 && coeffs[i] > coeffs[i - 1] + 1e-12) throw std::invalid_argument("SchmidtState: coeffs not descending");
      s += coeffs[i];
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("SchmidtState: coefficients do not sum to 1");
  }
};

// X rank-one click projectors with a shared efficiency. The click vector for
// setting x is cos(mu_x/2)|a0> + sin(mu_x/2)|a1>.
struct MeasurementFamily {
  int X = 2;
  std::vector<double> amplitude_angles;  // mu_x, radians
  double efficiency = 1.0;               // epsilon

  std::vector<cplx> click_vector(int x) const {
    const double mu = amplitude_angles.at(static_cast<size_t>(x));
    return {cplx{std::cos(mu / 2.0), 0.0}, cplx{std::sin(mu / 2.0), 0.0}};
  }

  ComplexMatrix projector(int x) const {
    const auto v = click_vector(x);
    return ComplexMatrix::outer(v, v);
  }

  ComplexMatrix projector_sum() const {
    ComplexMatrix s(2);
    for (int x = 0; x < X; ++x) s += projector(x);
    return s;
  }
};

struct POVM {
  std::vector<ComplexMatrix> effects;

  void validate() const {
    if (effects.empty()) throw std::invalid_argument("POVM: no effects");
    ComplexMatrix s(effects[0].dim());
    for (const auto& e : effects) {
      if (min_eigenvalue(e) < -1e-12) throw std::invalid_argument("POVM: effect not positive semidefinite");
      s += e;
    }
    if ((s - ComplexMatrix::identity(s.dim())).max_abs() > 1e-10)
      throw std::invalid_argument("POVM: effects do not sum to identity");
  }
};

// Bob's unnormalized conditional states sigma_{a|x}, a in {click, null}.
struct Assemblage {
  int X = 2;
  int dim_B = 2;
  std::vector<ComplexMatrix> click;  // sigma_{+|x}
  std::vector<ComplexMatrix> null;   // sigma_{null|x}

  ComplexMatrix rho_B() const { return click.at(0) + null.at(0); }

  double non_signalling_residual() const {
    const ComplexMatrix r = rho_B();
    double m = 0.0;
    for (int x = 0; x < X; ++x) m = std::max(m, (click[static_cast<size_t>(x)] + null[static_cast<size_t>(x)] - r).max_abs());
    return m;
  }

  void validate() const {
    if (static_cast<int>(click.size()) != X || static_cast<int>(null.size()) != X)
      throw std::invalid_argument("Assemblage: member count mismatch");
    for (int x = 0; x < X; ++x) {
      if (min_eigenvalue(click[static_cast<size_t>(x)]) < -tol::psd ||
          min_eigenvalue(null[static_cast<size_t>(x)]) < -tol::psd)
        throw std::invalid_argument("Assemblage: member not positive semidefinite");
    }
    if (non_signalling_residual() > tol::non_signalling)
      throw std::invalid_argument("Assemblage: non-signalling violated");
  }
};

// |Phi_alpha> = cos(a)|HH> + sin(a)|VV>, alpha in [0, pi/4].
inline SchmidtState phi_plus_alpha(double alpha) {
  if (alpha < 0.0 || alpha > std::numbers::pi / 4.0 + 1e-15)
    throw std::invalid_argument("phi_plus_alpha: alpha must lie in [0, pi/4]");
  SchmidtState s;
  const double c2 = std::cos(alpha) * std::cos(alpha);
  s.coeffs = {c2, 1.0 - c2};
  if (s.coeffs[0] < s.coeffs[1]) std::swap(s.coeffs[0], s.coeffs[1]);
  s.dim_A = s.dim_B = 2;
  s.basis_A = {{cplx{1, 0}, cplx{0, 0}}, {cplx{0, 0}, cplx{1, 0}}};
  s.basis_B = s.basis_A;
  return s;
}

// Equally spaced amplitude angles mu_x = (x - (X-1)/2) * delta.
// Adjacent click vectors overlap by cos(delta/2).
inline MeasurementFamily one_click_family(int X, double delta, double efficiency) {
  if (X < 2) throw std::invalid_argument("one_click_family: X must be >= 2");
  if (!(delta > 0.0) || !(delta <= 2.0 * std::numbers::pi / X))
    throw std::invalid_argument("one_click_family: delta must lie in (0, 2*pi/X]");
  if (efficiency < 0.0 || efficiency > 1.0)
    throw std::invalid_argument("one_click_family: efficiency must lie in [0,1]");
  MeasurementFamily f;
  f.X = X;
  f.efficiency = efficiency;
  for (int x = 0; x < X; ++x) f.amplitude_angles.push_back((x - 0.5 * (X - 1)) * delta);
  return f;
}

// Main-text convention cos(theta)|H> +/- sin(theta)|V> maps to spacing delta = 4*theta.
inline MeasurementFamily family_from_hwp_theta(double theta, double efficiency) {
  return one_click_family(2, 4.0 * theta, efficiency);
}

// Projector overlap between two settings: Tr[Pi_x Pi_x'] = cos^2((mu_x - mu_x')/2).
inline double projector_overlap(const MeasurementFamily& f, int x, int xp) {
  const double d = f.amplitude_angles.at(static_cast<size_t>(x)) - f.amplitude_angles.at(static_cast<size_t>(xp));
  const double c = std::cos(d / 2.0);
  return c * c;
}

// Trine POVM: E_b = (2/3)|e_b><e_b| with the three unit vectors at 120 degrees
// in the X-Z plane; e0 = |V>.
inline POVM trine_povm() {
  const double h = std::sqrt(3.0) / 2.0;
  const std::vector<std::vector<cplx>> vecs = {
      {cplx{0, 0}, cplx{1, 0}},
      {cplx{h, 0}, cplx{0.5, 0}},
      {cplx{h, 0}, cplx{-0.5, 0}},
  };
  POVM p;
  for (const auto& v : vecs) p.effects.push_back((2.0 / 3.0) * ComplexMatrix::outer(v, v));
  return p;
}

// sigma_{+|x} = eps * sqrt(rho_B) Pi^T sqrt(rho_B) in Bob's Schmidt basis;
// sigma_{null|x} = rho_B - sigma_{+|x}.
inline Assemblage steered_assemblage(const SchmidtState& state, const MeasurementFamily& family) {
  state.validate();
  if (state.dim_B != 2) throw std::invalid_argument("steered_assemblage: only qubit Bob supported");
  Assemblage a;
  a.X = family.X;
  a.dim_B = state.dim_B;
  const ComplexMatrix rho = state.rho_B();
  const ComplexMatrix sq = psd_sqrt(rho);
  for (int x = 0; x < family.X; ++x) {
    ComplexMatrix s = family.efficiency * (sq * family.projector(x).transpose() * sq);
    a.click.push_back(s.hermitian_part());
    a.null.push_back((rho - s).hermitian_part());
  }
  return a;
}

// sigma_{a|x} -> (1-eta) sigma_{a|x} + eta Tr[E_{a|x}] I/(d_A d_B).
// Tr[E_{+|x}] = eps and Tr[E_{null|x}] = d_A - eps.
inline Assemblage add_white_noise_assemblage(const Assemblage& asm_in, const MeasurementFamily& family, double eta,
                                             int d_A, int d_B) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("add_white_noise_assemblage: eta must lie in [0,1]");
  Assemblage out = asm_in;
  const ComplexMatrix id = ComplexMatrix::identity(asm_in.dim_B);
  const double denom = static_cast<double>(d_A) * d_B;
  for (int x = 0; x < asm_in.X; ++x) {
    out.click[static_cast<size_t>(x)] =
        (1.0 - eta) * asm_in.click[static_cast<size_t>(x)] + (eta * family.efficiency / denom) * id;
    out.null[static_cast<size_t>(x)] =
        (1.0 - eta) * asm_in.null[static_cast<size_t>(x)] + (eta * (d_A - family.efficiency) / denom) * id;
  }
  return out;
}

}  // namespace steering
