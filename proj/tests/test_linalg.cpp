#include <doctest.h>

#include <random>

#include "steering/linalg.hpp"

using namespace steering;

namespace {

ComplexMatrix random_hermitian(std::mt19937_64& rng, int d) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx{u(rng), u(rng)};
  return m.hermitian_part();
}

}  // namespace

TEST_CASE("eigendecomposition reconstructs random Hermitian matrices") {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 100; ++t) {
    const int d = 2 + static_cast<int>(rng() % 7);  // 2..8
    const ComplexMatrix m = random_hermitian(rng, d);
    const auto e = eig_hermitian(m);
    REQUIRE(static_cast<int>(e.eigenvalues.size()) == d);
    ComplexMatrix rec(d);
    for (int k = 0; k < d; ++k)
      rec += e.eigenvalues[static_cast<size_t>(k)] *
             ComplexMatrix::outer(e.eigenvectors[static_cast<size_t>(k)], e.eigenvectors[static_cast<size_t>(k)]);
    CHECK((rec - m).max_abs() <= tol::eig_reconstruction);
    // descending order and orthonormal eigenvectors
    for (int k = 1; k < d; ++k) CHECK(e.eigenvalues[static_cast<size_t>(k)] <= e.eigenvalues[static_cast<size_t>(k - 1)] + 1e-12);
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        cplx ip{0.0, 0.0};
        for (int i = 0; i < d; ++i)
          ip += std::conj(e.eigenvectors[static_cast<size_t>(k)][static_cast<size_t>(i)]) *
                e.eigenvectors[static_cast<size_t>(l)][static_cast<size_t>(i)];
        CHECK(std::abs(ip - (k == l ? cplx{1.0, 0.0} : cplx{0.0, 0.0})) <= 1e-10);
      }
  }
}

TEST_CASE("2x2 closed-form eigensolver agrees with trace and determinant") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 200; ++t) {
    const ComplexMatrix m = random_hermitian(rng, 2);
    const auto e = eig_hermitian(m);
    const double tr = m.trace().real();
    const double det = (m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0)).real();
    CHECK(e.eigenvalues[0] + e.eigenvalues[1] == doctest::Approx(tr).epsilon(1e-12));
    CHECK(e.eigenvalues[0] * e.eigenvalues[1] == doctest::Approx(det).epsilon(1e-10));
  }
}

TEST_CASE("psd_sqrt squares back to the original matrix") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const int d = 2 + static_cast<int>(rng() % 3);
    ComplexMatrix m = random_hermitian(rng, d);
    m = m * m;  // PSD
    const ComplexMatrix r = psd_sqrt(m);
    CHECK((r * r - m).max_abs() <= 1e-10);
    CHECK(min_eigenvalue(r) >= -1e-12);
  }
}

TEST_CASE("hermitian_inverse and psd_inv_sqrt behave as inverses") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const int d = 2 + static_cast<int>(rng() % 3);
    ComplexMatrix m = random_hermitian(rng, d);
    m = m * m + 0.1 * ComplexMatrix::identity(d);  // strictly PD
    CHECK((hermitian_inverse(m) * m - ComplexMatrix::identity(d)).max_abs() <= 1e-10);
    const ComplexMatrix is = psd_inv_sqrt(m);
    CHECK((is * m * is - ComplexMatrix::identity(d)).max_abs() <= 1e-9);
  }
}

TEST_CASE("psd_inv_sqrt rejects singular input") {
  ComplexMatrix m(2);
  m(0, 0) = 1.0;  // rank one
  CHECK_THROWS(psd_inv_sqrt(m));
}

TEST_CASE("kron and partial traces are mutually consistent") {
  std::mt19937_64 rng(7);
  const ComplexMatrix a = random_hermitian(rng, 2);
  const ComplexMatrix b = random_hermitian(rng, 2);
  const ComplexMatrix k = kron(a, b);
  REQUIRE(k.dim() == 4);
  CHECK(k.trace().real() == doctest::Approx(a.trace().real() * b.trace().real()).epsilon(1e-12));
  // partial_trace_A traces out subsystem A, partial_trace_B traces out B
  CHECK((partial_trace_A(k, 2, 2) - a.trace().real() * b).max_abs() <= 1e-12);
  CHECK((partial_trace_B(k, 2, 2) - b.trace().real() * a).max_abs() <= 1e-12);
}

TEST_CASE("hs_inner is the Frobenius inner product") {
  std::mt19937_64 rng(8);
  const ComplexMatrix a = random_hermitian(rng, 3);
  const ComplexMatrix b = random_hermitian(rng, 3);
  cplx direct{0.0, 0.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) direct += std::conj(a(i, j)) * b(i, j);
  CHECK(std::abs(hs_inner(a, b) - direct) <= 1e-13);
  CHECK(std::abs(hs_inner(a, b).imag()) <= 1e-12);  // real for Hermitian args
}

TEST_CASE("dimension bounds are enforced") {
  CHECK_THROWS(ComplexMatrix(0));
  CHECK_THROWS(ComplexMatrix(9));
}
