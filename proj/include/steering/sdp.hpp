// Small dense semidefinite programming over Hermitian blocks.
//
// Primal:  min  sum_k <C_k, X_k> + c_free . t
//          s.t. sum_k <A_{i,k}, X_k> + g_i . t = b_i   (i = 1..m)
//               X_k >= 0,  t free
// Dual:    max  b . y
//          s.t. sum_i y_i A_{i,k} + S_k = C_k,  S_k >= 0,  G^T y = c_free
//
// Infeasible-start primal-dual interior point method with Nesterov-Todd
// scaling, a Mehrotra-style centering heuristic, and a bordered Schur system
// for the free variables. Problem sizes here are tiny (blocks <= 4, a few
// dozen constraints), so everything is dense.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "steering/linalg.hpp"

namespace steering {

struct SdpConstraint {
  std::vector<ComplexMatrix> A;  // one per block; zero-dim entries mean "no coefficient"
  std::vector<double> g;         // per free variable
  double rhs = 0.0;
};

struct SdpProblem {
  std::vector<int> block_dims;
  int num_free = 0;
  std::vector<ComplexMatrix> C;  // objective per block (empty -> zero)
  std::vector<double> c_free;
  std::vector<SdpConstraint> constraints;

  int scalar_variable_count() const {
    int n = num_free;
    for (int d : block_dims) n += d * d;
    return n;
  }
};

enum class SdpStatus { Optimal, MaxIterations, NumericalFailure };

struct SdpResiduals {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double duality_gap = 0.0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  double optimal_value = 0.0;
  std::vector<ComplexMatrix> blocks;
  std::vector<double> free_vars;
  std::vector<double> y;
  std::vector<ComplexMatrix> dual_blocks;
  SdpResiduals residuals;
  int iterations = 0;

  bool ok() const { return status == SdpStatus::Optimal; }
};

// Orthonormal Hermitian basis of a d x d space (d^2 elements):
// E_ii, (E_ij + E_ji)/sqrt(2), i(E_ij - E_ji)/sqrt(2).
inline std::vector<ComplexMatrix> hermitian_basis(int d) {
  std::vector<ComplexMatrix> basis;
  for (int i = 0; i < d; ++i) {
    ComplexMatrix e(d);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      ComplexMatrix re(d), im(d);
      re(i, j) = r;
      re(j, i) = r;
      im(i, j) = cplx{0.0, r};
      im(j, i) = cplx{0.0, -r};
      basis.push_back(re);
      basis.push_back(im);
    }
  return basis;
}

// Expands the Hermitian matrix equality
//   sum_k coeff_k * X_k + sum_j t_j M_j = RHS
// into scalar constraints along hermitian_basis(RHS.dim()). Blocks that do not
// participate carry coefficient 0.
inline void add_matrix_equality(SdpProblem& p, const std::vector<double>& block_coeffs,
                                const std::vector<ComplexMatrix>& free_coeffs, const ComplexMatrix& rhs) {
  if (block_coeffs.size() != p.block_dims.size() || static_cast<int>(free_coeffs.size()) != p.num_free)
    throw std::invalid_argument("add_matrix_equality: shape mismatch");
  for (const auto& e : hermitian_basis(rhs.dim())) {
    SdpConstraint c;
    c.A.resize(p.block_dims.size());
    for (size_t k = 0; k < block_coeffs.size(); ++k)
      if (block_coeffs[k] != 0.0) c.A[k] = block_coeffs[k] * e;
    for (const auto& mj : free_coeffs)
      c.g.push_back(mj.dim() == 0 ? 0.0 : hs_inner(e, mj).real());
    c.rhs = hs_inner(e, rhs).real();
    p.constraints.push_back(c);
  }
}

namespace detail {

inline double block_inner(const ComplexMatrix& a, const ComplexMatrix& b) { return hs_inner(a, b).real(); }

// Dense real linear solve (partial pivoting), in place.
inline bool lu_solve(std::vector<double>& a, std::vector<double>& x, int n) {
  std::vector<int> piv(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) piv[static_cast<size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int best = col;
    double bv = std::abs(a[static_cast<size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a[static_cast<size_t>(r) * n + col]);
      if (v > bv) {
        bv = v;
        best = r;
      }
    }
    if (bv < 1e-300) return false;
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(col) * n + j], a[static_cast<size_t>(best) * n + j]);
      std::swap(x[static_cast<size_t>(col)], x[static_cast<size_t>(best)]);
    }
    const double d = a[static_cast<size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r) * n + col] / d;
      if (f == 0.0) continue;
      a[static_cast<size_t>(r) * n + col] = 0.0;
      for (int j = col + 1; j < n; ++j) a[static_cast<size_t>(r) * n + j] -= f * a[static_cast<size_t>(col) * n + j];
      x[static_cast<size_t>(r)] -= f * x[static_cast<size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = x[static_cast<size_t>(r)];
    for (int j = r + 1; j < n; ++j) s -= a[static_cast<size_t>(r) * n + j] * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(r)] = s / a[static_cast<size_t>(r) * n + r];
  }
  return true;
}

// Spectral inverse square root with an eigenvalue floor; scaling matrices near
// a low-rank optimum legitimately have eigenvalues at roundoff level.
inline ComplexMatrix clamped_inv_sqrt(const ComplexMatrix& m, double floor) {
  return hermitian_function(m, [&](double l) { return 1.0 / std::sqrt(std::max(l, floor)); });
}

inline ComplexMatrix clamped_inverse(const ComplexMatrix& m, double floor) {
  return hermitian_function(m, [&](double l) { return 1.0 / std::max(l, floor); });
}

inline double max_step_psd(const ComplexMatrix& x, const ComplexMatrix& dx) {
  // largest alpha with x + alpha*dx >= 0; the iterate may be numerically
  // singular near a low-rank optimum, so clamp the spectrum before inverting
  const double floor = 1e-14 * std::max(1.0, x.trace().real());
  const ComplexMatrix xinv_sqrt = clamped_inv_sqrt(x, floor);
  const ComplexMatrix b = (xinv_sqrt * dx * xinv_sqrt).hermitian_part();
  const double lmin = min_eigenvalue(b);
  if (lmin >= -1e-14) return 1e18;
  return -1.0 / lmin;
}

}  // namespace detail

inline SdpSolution solve_sdp(const SdpProblem& p, int max_iterations = 100) {
  if (p.scalar_variable_count() > 200) throw std::invalid_argument("solve_sdp: too many scalar variables");
  const int nb = static_cast<int>(p.block_dims.size());
  const int m = static_cast<int>(p.constraints.size());
  const int nf = p.num_free;
  const int ksys = m + nf;

  for (const auto& c : p.constraints) {
    if (static_cast<int>(c.A.size()) != nb || static_cast<int>(c.g.size()) != nf)
      throw std::invalid_argument("solve_sdp: constraint shape mismatch");
    for (int k = 0; k < nb; ++k)
      if (c.A[static_cast<size_t>(k)].dim() != 0 && c.A[static_cast<size_t>(k)].dim() != p.block_dims[static_cast<size_t>(k)])
        throw std::invalid_argument("solve_sdp: constraint block dim mismatch");
  }

  auto obj_block = [&](int k) -> ComplexMatrix {
    if (k < static_cast<int>(p.C.size()) && p.C[static_cast<size_t>(k)].dim() != 0) return p.C[static_cast<size_t>(k)];
    return ComplexMatrix::zero(p.block_dims[static_cast<size_t>(k)]);
  };

  double data_scale = 1.0;
  for (const auto& c : p.constraints) {
    data_scale = std::max(data_scale, std::abs(c.rhs));
    for (const auto& a : c.A)
      if (a.dim() != 0) data_scale = std::max(data_scale, a.max_abs());
  }

  std::vector<ComplexMatrix> X, S;
  for (int k = 0; k < nb; ++k) {
    X.push_back(data_scale * ComplexMatrix::identity(p.block_dims[static_cast<size_t>(k)]));
    S.push_back(data_scale * ComplexMatrix::identity(p.block_dims[static_cast<size_t>(k)]));
  }
  std::vector<double> t(static_cast<size_t>(nf), 0.0), y(static_cast<size_t>(m), 0.0);

  int n_total = 0;
  for (int d : p.block_dims) n_total += d;

  auto apply_a = [&](const std::vector<ComplexMatrix>& xs, const std::vector<double>& ts) {
    std::vector<double> out(static_cast<size_t>(m), 0.0);
    for (int i = 0; i < m; ++i) {
      double v = 0.0;
      const auto& c = p.constraints[static_cast<size_t>(i)];
      for (int k = 0; k < nb; ++k)
        if (c.A[static_cast<size_t>(k)].dim() != 0) v += detail::block_inner(c.A[static_cast<size_t>(k)], xs[static_cast<size_t>(k)]);
      for (int j = 0; j < nf; ++j) v += c.g[static_cast<size_t>(j)] * ts[static_cast<size_t>(j)];
      out[static_cast<size_t>(i)] = v;
    }
    return out;
  };

  auto apply_a_adj = [&](const std::vector<double>& ys, int k) {
    ComplexMatrix out = ComplexMatrix::zero(p.block_dims[static_cast<size_t>(k)]);
    for (int i = 0; i < m; ++i) {
      const auto& a = p.constraints[static_cast<size_t>(i)].A[static_cast<size_t>(k)];
      if (a.dim() != 0 && ys[static_cast<size_t>(i)] != 0.0) out += ys[static_cast<size_t>(i)] * a;
    }
    return out;
  };

  SdpSolution sol;
  auto finalize = [&](SdpStatus st, int iter) {
    sol.status = st;
    sol.blocks = X;
    sol.free_vars = t;
    sol.y = y;
    sol.dual_blocks = S;
    sol.iterations = iter;
    double pobj = 0.0;
    for (int k = 0; k < nb; ++k) pobj += detail::block_inner(obj_block(k), X[static_cast<size_t>(k)]);
    for (int j = 0; j < nf; ++j) pobj += p.c_free[static_cast<size_t>(j)] * t[static_cast<size_t>(j)];
    sol.optimal_value = pobj;
    const auto ax = apply_a(X, t);
    double pinf = 0.0;
    for (int i = 0; i < m; ++i) pinf = std::max(pinf, std::abs(ax[static_cast<size_t>(i)] - p.constraints[static_cast<size_t>(i)].rhs));
    double dinf = 0.0;
    for (int k = 0; k < nb; ++k)
      dinf = std::max(dinf, (obj_block(k) - S[static_cast<size_t>(k)] - apply_a_adj(y, k)).max_abs());
    for (int j = 0; j < nf; ++j) {
      double gty = 0.0;
      for (int i = 0; i < m; ++i) gty += p.constraints[static_cast<size_t>(i)].g[static_cast<size_t>(j)] * y[static_cast<size_t>(i)];
      dinf = std::max(dinf, std::abs(p.c_free[static_cast<size_t>(j)] - gty));
    }
    double gap = 0.0;
    for (int k = 0; k < nb; ++k) gap += detail::block_inner(X[static_cast<size_t>(k)], S[static_cast<size_t>(k)]);
    sol.residuals = {pinf, dinf, gap};
    // The contract is the residual bundle, not the iteration path: accept the
    // iterate whenever it certifies the solution, whatever the loop thought.
    if (pinf <= 1e-9 * data_scale && dinf <= 1e-9 * data_scale && gap <= 1e-9 * std::max(1.0, data_scale))
      sol.status = SdpStatus::Optimal;
    return sol;
  };

  const double tol_feas = 1e-11 * data_scale;
  const double tol_gap = 5e-11 * std::max(1.0, data_scale);

  // Best iterate seen, by worst residual; restored on stall or breakdown.
  double best_merit = 1e300;
  std::vector<ComplexMatrix> bestX = X, bestS = S;
  std::vector<double> best_t = t, best_y = y;
  std::vector<double> merit_history;
  auto restore_best = [&]() {
    X = bestX;
    S = bestS;
    t = best_t;
    y = best_y;
  };

  for (int iter = 0; iter < max_iterations; ++iter) {
    // residuals
    const auto ax = apply_a(X, t);
    std::vector<double> rp(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) rp[static_cast<size_t>(i)] = p.constraints[static_cast<size_t>(i)].rhs - ax[static_cast<size_t>(i)];
    std::vector<ComplexMatrix> Rd;
    for (int k = 0; k < nb; ++k) Rd.push_back((obj_block(k) - S[static_cast<size_t>(k)] - apply_a_adj(y, k)).hermitian_part());
    std::vector<double> rf(static_cast<size_t>(nf), 0.0);
    for (int j = 0; j < nf; ++j) {
      double gty = 0.0;
      for (int i = 0; i < m; ++i) gty += p.constraints[static_cast<size_t>(i)].g[static_cast<size_t>(j)] * y[static_cast<size_t>(i)];
      rf[static_cast<size_t>(j)] = p.c_free[static_cast<size_t>(j)] - gty;
    }
    double mu = 0.0;
    for (int k = 0; k < nb; ++k) mu += detail::block_inner(X[static_cast<size_t>(k)], S[static_cast<size_t>(k)]);
    const double gap_abs = mu;
    mu /= std::max(1, n_total);

    double rp_norm = 0.0, rd_norm = 0.0;
    for (double v : rp) rp_norm = std::max(rp_norm, std::abs(v));
    for (const auto& r : Rd) rd_norm = std::max(rd_norm, r.max_abs());
    for (double v : rf) rd_norm = std::max(rd_norm, std::abs(v));
    if (rp_norm <= tol_feas && rd_norm <= tol_feas && gap_abs <= tol_gap) return finalize(SdpStatus::Optimal, iter);

    const double merit = std::max({rp_norm, rd_norm, gap_abs});
    if (!std::isfinite(merit)) {
      restore_best();
      return finalize(SdpStatus::NumericalFailure, iter);
    }
    if (merit < best_merit) {
      best_merit = merit;
      bestX = X;
      bestS = S;
      best_t = t;
      best_y = y;
    }
    merit_history.push_back(merit);
    // stalled: no meaningful progress over the last several iterations
    if (merit_history.size() > 8 && best_merit > 0.5 * merit_history[merit_history.size() - 9]) {
      restore_best();
      return finalize(SdpStatus::MaxIterations, iter);
    }

    // NT scaling per block
    std::vector<ComplexMatrix> W(static_cast<size_t>(nb)), Sinv(static_cast<size_t>(nb));
    auto build_scaling = [&]() -> bool {
      try {
        for (int k = 0; k < nb; ++k) {
          const ComplexMatrix xs = psd_sqrt(X[static_cast<size_t>(k)]);
          const ComplexMatrix mid = (xs * S[static_cast<size_t>(k)] * xs).hermitian_part();
          W[static_cast<size_t>(k)] = (xs * psd_inv_sqrt(mid) * xs).hermitian_part();
          Sinv[static_cast<size_t>(k)] = hermitian_inverse(S[static_cast<size_t>(k)]);
        }
      } catch (const std::exception&) {
        return false;
      }
      return true;
    };
    if (!build_scaling()) {
      // An aggressive step left an iterate on (or numerically past) the cone
      // boundary. Project back and shift into the interior, then rebuild.
      for (int k = 0; k < nb; ++k) {
        const double shift = 1e-8 * std::max(1.0, data_scale);
        const auto interior = [&](const ComplexMatrix& v) {
          return (hermitian_function(v, [](double l) { return std::max(l, 0.0); }) +
                  shift * ComplexMatrix::identity(v.dim()))
              .hermitian_part();
        };
        X[static_cast<size_t>(k)] = interior(X[static_cast<size_t>(k)]);
        S[static_cast<size_t>(k)] = interior(S[static_cast<size_t>(k)]);
      }
      if (!build_scaling()) {
        restore_best();
        return finalize(SdpStatus::NumericalFailure, iter);
      }
    }

    // Schur system K = [[M, G],[G^T, 0]]
    std::vector<double> K(static_cast<size_t>(ksys) * ksys, 0.0);
    std::vector<std::vector<ComplexMatrix>> WAW(static_cast<size_t>(m));  // W A_i W per block
    for (int i = 0; i < m; ++i) {
      WAW[static_cast<size_t>(i)].resize(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        const auto& a = p.constraints[static_cast<size_t>(i)].A[static_cast<size_t>(k)];
        if (a.dim() != 0)
          WAW[static_cast<size_t>(i)][static_cast<size_t>(k)] =
              (W[static_cast<size_t>(k)] * a * W[static_cast<size_t>(k)]).hermitian_part();
      }
    }
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double v = 0.0;
        for (int k = 0; k < nb; ++k) {
          const auto& ai = p.constraints[static_cast<size_t>(i)].A[static_cast<size_t>(k)];
          const auto& wjw = WAW[static_cast<size_t>(j)][static_cast<size_t>(k)];
          if (ai.dim() != 0 && wjw.dim() != 0) v += detail::block_inner(ai, wjw);
        }
        K[static_cast<size_t>(i) * ksys + j] = v;
        K[static_cast<size_t>(j) * ksys + i] = v;
      }
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < nf; ++j) {
        const double v = p.constraints[static_cast<size_t>(i)].g[static_cast<size_t>(j)];
        K[static_cast<size_t>(i) * ksys + (m + j)] = v;
        K[static_cast<size_t>(m + j) * ksys + i] = v;
      }

    auto solve_direction = [&](double sigma_mu, std::vector<double>& dy, std::vector<double>& dt,
                               std::vector<ComplexMatrix>& dS, std::vector<ComplexMatrix>& dX) -> bool {
      // Rc_k = sigma_mu * S^-1 - X
      std::vector<ComplexMatrix> Rc(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k)
        Rc[static_cast<size_t>(k)] = (sigma_mu * Sinv[static_cast<size_t>(k)] - X[static_cast<size_t>(k)]).hermitian_part();
      std::vector<double> rhs(static_cast<size_t>(ksys), 0.0);
      for (int i = 0; i < m; ++i) {
        double v = rp[static_cast<size_t>(i)];
        for (int k = 0; k < nb; ++k) {
          const auto& a = p.constraints[static_cast<size_t>(i)].A[static_cast<size_t>(k)];
          if (a.dim() == 0) continue;
          v -= detail::block_inner(a, Rc[static_cast<size_t>(k)]);
          v += detail::block_inner(a, (W[static_cast<size_t>(k)] * Rd[static_cast<size_t>(k)] * W[static_cast<size_t>(k)]).hermitian_part());
        }
        rhs[static_cast<size_t>(i)] = v;
      }
      for (int j = 0; j < nf; ++j) rhs[static_cast<size_t>(m + j)] = rf[static_cast<size_t>(j)];

      std::vector<double> kcopy = K;
      std::vector<double> sol_vec = rhs;
      if (!detail::lu_solve(kcopy, sol_vec, ksys)) return false;
      // one step of iterative refinement
      {
        std::vector<double> resid(static_cast<size_t>(ksys), 0.0);
        for (int i = 0; i < ksys; ++i) {
          double v = rhs[static_cast<size_t>(i)];
          for (int j = 0; j < ksys; ++j) v -= K[static_cast<size_t>(i) * ksys + j] * sol_vec[static_cast<size_t>(j)];
          resid[static_cast<size_t>(i)] = v;
        }
        std::vector<double> kcopy2 = K;
        if (detail::lu_solve(kcopy2, resid, ksys))
          for (int i = 0; i < ksys; ++i) sol_vec[static_cast<size_t>(i)] += resid[static_cast<size_t>(i)];
      }
      dy.assign(sol_vec.begin(), sol_vec.begin() + m);
      dt.assign(sol_vec.begin() + m, sol_vec.end());
      dS.resize(static_cast<size_t>(nb));
      dX.resize(static_cast<size_t>(nb));
      for (int k = 0; k < nb; ++k) {
        dS[static_cast<size_t>(k)] = (Rd[static_cast<size_t>(k)] - apply_a_adj(dy, k)).hermitian_part();
        dX[static_cast<size_t>(k)] =
            (Rc[static_cast<size_t>(k)] -
             (W[static_cast<size_t>(k)] * dS[static_cast<size_t>(k)] * W[static_cast<size_t>(k)]).hermitian_part())
                .hermitian_part();
      }
      return true;
    };

    auto step_lengths = [&](const std::vector<ComplexMatrix>& dX, const std::vector<ComplexMatrix>& dS) {
      double ap = 1e18, ad = 1e18;
      for (int k = 0; k < nb; ++k) {
        ap = std::min(ap, detail::max_step_psd(X[static_cast<size_t>(k)], dX[static_cast<size_t>(k)]));
        ad = std::min(ad, detail::max_step_psd(S[static_cast<size_t>(k)], dS[static_cast<size_t>(k)]));
      }
      return std::pair<double, double>{std::min(1.0, 0.98 * ap), std::min(1.0, 0.98 * ad)};
    };

    std::vector<double> dy_a, dt_a;
    std::vector<ComplexMatrix> dS_a, dX_a;
    if (!solve_direction(0.0, dy_a, dt_a, dS_a, dX_a)) {
      restore_best();
      return finalize(SdpStatus::NumericalFailure, iter);
    }
    const auto [apa, ada] = step_lengths(dX_a, dS_a);
    double mu_aff = 0.0;
    for (int k = 0; k < nb; ++k)
      mu_aff += detail::block_inner((X[static_cast<size_t>(k)] + apa * dX_a[static_cast<size_t>(k)]).hermitian_part(),
                                    (S[static_cast<size_t>(k)] + ada * dS_a[static_cast<size_t>(k)]).hermitian_part());
    mu_aff /= std::max(1, n_total);
    double sigma = std::pow(std::max(0.0, mu_aff) / std::max(mu, 1e-300), 3.0);
    sigma = std::min(0.9, std::max(1e-8, sigma));

    std::vector<double> dy, dt;
    std::vector<ComplexMatrix> dS, dX;
    if (!solve_direction(sigma * mu, dy, dt, dS, dX)) {
      restore_best();
      return finalize(SdpStatus::NumericalFailure, iter);
    }
    const auto [ap, ad] = step_lengths(dX, dS);

    for (int k = 0; k < nb; ++k) {
      X[static_cast<size_t>(k)] = (X[static_cast<size_t>(k)] + ap * dX[static_cast<size_t>(k)]).hermitian_part();
      S[static_cast<size_t>(k)] = (S[static_cast<size_t>(k)] + ad * dS[static_cast<size_t>(k)]).hermitian_part();
    }
    for (int j = 0; j < nf; ++j) t[static_cast<size_t>(j)] += ap * dt[static_cast<size_t>(j)];
    for (int i = 0; i < m; ++i) y[static_cast<size_t>(i)] += ad * dy[static_cast<size_t>(i)];
  }
  restore_best();
  return finalize(SdpStatus::MaxIterations, max_iterations);
}

// All 2^X deterministic click/null strategies for X settings.
struct DeterministicStrategySet {
  int X = 2;

  int size() const { return 1 << X; }
  // D_lambda(+|x)
  bool clicks(int lambda, int x) const { return ((lambda >> x) & 1) != 0; }
};

}  // namespace steering
