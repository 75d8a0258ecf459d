// Dense complex linear algebra for small Hermitian matrices (dim <= 8).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace steering {

using cplx = std::complex<double>;

// Shared tolerances. Tests and solvers read the same values.
namespace tol {
inline constexpr double hermiticity = 1e-12;
inline constexpr double eig_reconstruction = 1e-10;
inline constexpr double unit_norm = 1e-12;
inline constexpr double psd = 1e-10;
inline constexpr double non_signalling = 1e-10;
inline constexpr double jacobi_off = 1e-14;
inline constexpr int jacobi_max_sweeps = 100;
inline constexpr double sdp_gap = 1e-9;
inline constexpr double duality_gap = 1e-7;
}  // namespace tol

class ComplexMatrix {
 public:
  ComplexMatrix() : dim_(0) {}
  explicit ComplexMatrix(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim, cplx{0.0, 0.0}) {
    if (dim < 1 || dim > 8) throw std::invalid_argument("ComplexMatrix: dim must be in 1..8");
  }

  static ComplexMatrix identity(int dim) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }
  static ComplexMatrix zero(int dim) { return ComplexMatrix(dim); }

  // Rank-one |v><w|.
  static ComplexMatrix outer(const std::vector<cplx>& v, const std::vector<cplx>& w) {
    if (v.size() != w.size()) throw std::invalid_argument("outer: size mismatch");
    ComplexMatrix m(static_cast<int>(v.size()));
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j) m(i, j) = v[static_cast<size_t>(i)] * std::conj(w[static_cast<size_t>(j)]);
    return m;
  }

  int dim() const { return dim_; }
  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * dim_ + j]; }
  const cplx& operator()(int i, int j) const { return a_[static_cast<size_t>(i) * dim_ + j]; }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    check_same_dim(o);
    for (size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    check_same_dim(o);
    for (size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  ComplexMatrix& operator*=(cplx s) {
    for (auto& v : a_) v *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(ComplexMatrix a, double s) { return a *= cplx{s, 0.0}; }
  friend ComplexMatrix operator*(double s, ComplexMatrix a) { return a *= cplx{s, 0.0}; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    a.check_same_dim(b);
    ComplexMatrix c(a.dim_);
    for (int i = 0; i < a.dim_; ++i)
      for (int k = 0; k < a.dim_; ++k) {
        const cplx aik = a(i, k);
        if (aik == cplx{0.0, 0.0}) continue;
        for (int j = 0; j < a.dim_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix m(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = std::conj((*this)(j, i));
    return m;
  }

  ComplexMatrix transpose() const {
    ComplexMatrix m(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = (*this)(j, i);
    return m;
  }

  cplx trace() const {
    cplx t{0.0, 0.0};
    for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m = std::max(m, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return m;
  }

  bool is_hermitian(double eps = tol::hermiticity) const { return max_asymmetry() <= eps; }

  // Symmetrize; removes rounding-level anti-Hermitian parts.
  ComplexMatrix hermitian_part() const {
    ComplexMatrix m(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) m(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : a_) s += std::norm(v);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  void check_same_dim(const ComplexMatrix& o) const {
    if (dim_ != o.dim_) throw std::invalid_argument("ComplexMatrix: dimension mismatch");
  }
  int dim_;
  std::vector<cplx> a_;
};

struct EigenResult {
  std::vector<double> eigenvalues;             // descending
  std::vector<std::vector<cplx>> eigenvectors;  // orthonormal columns, eigenvectors[k] pairs with eigenvalues[k]
};

namespace detail {

inline void fix_vector_phase(std::vector<cplx>& v) {
  size_t imax = 0;
  double best = 0.0;
  for (size_t i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > best + 1e-15) {
      best = std::abs(v[i]);
      imax = i;
    }
  if (best > 0.0) {
    cplx phase = v[imax] / best;
    for (auto& c : v) c /= phase;
  }
}

inline bool lex_less_real(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].real() < b[i].real() - 1e-12) return true;
    if (a[i].real() > b[i].real() + 1e-12) return false;
  }
  return false;
}

}  // namespace detail

// Hermitian eigendecomposition. 2x2 in closed form, larger by cyclic Jacobi.
inline EigenResult eig_hermitian(const ComplexMatrix& m_in) {
  const double asym = m_in.max_asymmetry();
  if (asym > tol::hermiticity)
    throw std::invalid_argument("eig_hermitian: input not Hermitian, max asymmetry " + std::to_string(asym));
  const int n = m_in.dim();
  ComplexMatrix a = m_in.hermitian_part();
  ComplexMatrix v = ComplexMatrix::identity(n);

  if (n == 1) {
    return {{a(0, 0).real()}, {{cplx{1.0, 0.0}}}};
  }
  if (n == 2) {
    const double p = a(0, 0).real(), q = a(1, 1).real();
    const cplx b = a(0, 1);
    const double r = std::abs(b);
    const double mean = 0.5 * (p + q);
    const double disc = std::sqrt(0.25 * (p - q) * (p - q) + r * r);
    const double l0 = mean + disc, l1 = mean - disc;
    std::vector<cplx> v0(2), v1(2);
    if (r < 1e-300) {
      if (p >= q) {
        v0 = {1.0, 0.0};
        v1 = {0.0, 1.0};
      } else {
        v0 = {0.0, 1.0};
        v1 = {1.0, 0.0};
      }
    } else {
      // (A - l1 I) columns span the l0 eigenspace
      v0 = {b, cplx{l0 - p, 0.0}};
      double n0 = std::sqrt(std::norm(v0[0]) + std::norm(v0[1]));
      v0[0] /= n0;
      v0[1] /= n0;
      v1 = {-std::conj(v0[1]), std::conj(v0[0])};
    }
    detail::fix_vector_phase(v0);
    detail::fix_vector_phase(v1);
    EigenResult res{{l0, l1}, {v0, v1}};
    if (std::abs(l0 - l1) <= 1e-12 && detail::lex_less_real(res.eigenvectors[1], res.eigenvectors[0])) {
      std::swap(res.eigenvectors[0], res.eigenvectors[1]);
      std::swap(res.eigenvalues[0], res.eigenvalues[1]);
    }
    return res;
  }

  const double scale = std::max(1.0, a.frobenius_norm());
  for (int sweep = 0; sweep < tol::jacobi_max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += 2.0 * std::norm(a(i, j));
    if (std::sqrt(off) <= tol::jacobi_off * scale) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        const cplx apq = a(p, q);
        if (std::abs(apq) <= tol::jacobi_off * scale * 1e-2) continue;
        // Phase removal then a real Jacobi rotation in the (p,q) plane.
        const cplx phase = apq / std::abs(apq);
        const double app = a(p, p).real(), aqq = a(q, q).real();
        const double theta = 0.5 * std::atan2(2.0 * std::abs(apq), aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        // J acts on columns p,q: col_p' = c*col_p + s*conj(phase)... build explicitly.
        const cplx jp_p = c, jq_p = -s * std::conj(phase);
        const cplx jp_q = s * phase, jq_q = c;
        // A <- J^dag A J and V <- V J with J = [[jp_p, jp_q],[jq_p... indices: J(p,p)=jp_p etc.
        for (int i = 0; i < n; ++i) {
          const cplx aip = a(i, p), aiq = a(i, q);
          a(i, p) = aip * jp_p + aiq * jq_p;
          a(i, q) = aip * jp_q + aiq * jq_q;
        }
        for (int i = 0; i < n; ++i) {
          const cplx api = a(p, i), aqi = a(q, i);
          a(p, i) = std::conj(jp_p) * api + std::conj(jq_p) * aqi;
          a(q, i) = std::conj(jp_q) * api + std::conj(jq_q) * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const cplx vip = v(i, p), viq = v(i, q);
          v(i, p) = vip * jp_p + viq * jq_p;
          v(i, q) = vip * jp_q + viq * jq_q;
        }
      }
  }

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> evals(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) evals[static_cast<size_t>(i)] = a(i, i).real();
  std::vector<std::vector<cplx>> evecs(static_cast<size_t>(n), std::vector<cplx>(static_cast<size_t>(n)));
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) evecs[static_cast<size_t>(k)][static_cast<size_t>(i)] = v(i, k);
    detail::fix_vector_phase(evecs[static_cast<size_t>(k)]);
  }
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    const double li = evals[static_cast<size_t>(i)], lj = evals[static_cast<size_t>(j)];
    if (std::abs(li - lj) > 1e-12) return li > lj;
    return detail::lex_less_real(evecs[static_cast<size_t>(i)], evecs[static_cast<size_t>(j)]);
  });
  EigenResult res;
  for (int k : order) {
    res.eigenvalues.push_back(evals[static_cast<size_t>(k)]);
    res.eigenvectors.push_back(evecs[static_cast<size_t>(k)]);
  }
  return res;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int da = a.dim(), db = b.dim();
  if (da * db > 8) throw std::invalid_argument("kron: result dimension exceeds 8");
  ComplexMatrix c(da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      for (int k = 0; k < db; ++k)
        for (int l = 0; l < db; ++l) c(i * db + k, j * db + l) = a(i, j) * b(k, l);
  return c;
}

inline ComplexMatrix partial_trace_A(const ComplexMatrix& m, int d_a, int d_b) {
  if (m.dim() != d_a * d_b) throw std::invalid_argument("partial_trace_A: dimension mismatch");
  ComplexMatrix r(d_b);
  for (int k = 0; k < d_b; ++k)
    for (int l = 0; l < d_b; ++l)
      for (int i = 0; i < d_a; ++i) r(k, l) += m(i * d_b + k, i * d_b + l);
  return r;
}

inline ComplexMatrix partial_trace_B(const ComplexMatrix& m, int d_a, int d_b) {
  if (m.dim() != d_a * d_b) throw std::invalid_argument("partial_trace_B: dimension mismatch");
  ComplexMatrix r(d_a);
  for (int i = 0; i < d_a; ++i)
    for (int j = 0; j < d_a; ++j)
      for (int k = 0; k < d_b; ++k) r(i, j) += m(i * d_b + k, j * d_b + k);
  return r;
}

// Tr[A^dag B]
inline cplx hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("hs_inner: dimension mismatch");
  cplx s{0.0, 0.0};
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) s += std::conj(a(i, j)) * b(i, j);
  return s;
}

inline double min_eigenvalue(const ComplexMatrix& m) { return eig_hermitian(m).eigenvalues.back(); }
inline double max_eigenvalue(const ComplexMatrix& m) { return eig_hermitian(m).eigenvalues.front(); }

// f(M) for Hermitian M through its spectrum.
template <typename F>
inline ComplexMatrix hermitian_function(const ComplexMatrix& m, F&& f) {
  const auto e = eig_hermitian(m);
  ComplexMatrix r(m.dim());
  for (size_t k = 0; k < e.eigenvalues.size(); ++k) {
    const double fv = f(e.eigenvalues[k]);
    for (int i = 0; i < m.dim(); ++i)
      for (int j = 0; j < m.dim(); ++j)
        r(i, j) += fv * e.eigenvectors[k][static_cast<size_t>(i)] * std::conj(e.eigenvectors[k][static_cast<size_t>(j)]);
  }
  return r;
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  return hermitian_function(m, [](double l) { return std::sqrt(std::max(0.0, l)); });
}

inline ComplexMatrix psd_inv_sqrt(const ComplexMatrix& m) {
  return hermitian_function(m, [](double l) {
    if (l <= 0.0) throw std::runtime_error("psd_inv_sqrt: non-positive eigenvalue");
    return 1.0 / std::sqrt(l);
  });
}

inline ComplexMatrix hermitian_inverse(const ComplexMatrix& m) {
  return hermitian_function(m, [](double l) {
    if (l == 0.0) throw std::runtime_error("hermitian_inverse: singular");
    return 1.0 / l;
  });
}

}  // namespace steering
