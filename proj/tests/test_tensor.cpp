#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hessiansys/error.hpp"
#include "hessiansys/tensor.hpp"

using namespace hessiansys;

namespace {

// Random tensor A = S^T S + shift I over the flattened (alpha, i) index.
SymTensor4 random_tensor(Dims d, std::mt19937_64& rng, double shift) {
  std::normal_distribution<double> g;
  const int k = d.n * d.N;
  Matrix S(k, k);
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c) S(r, c) = g(rng);
  return SymTensor4::from_matrix(d, S.transpose() * S / k + shift * Matrix::Identity(k, k));
}

// Direct evaluation of sum A eta a eta a from the raw entries.
double form(const SymTensor4& A, const Vector& eta, const Vector& a) {
  double s = 0.0;
  for (int al = 0; al < A.dims().N; ++al)
    for (int i = 0; i < A.dims().n; ++i)
      for (int be = 0; be < A.dims().N; ++be)
        for (int j = 0; j < A.dims().n; ++j) s += A(al, i, be, j) * eta[al] * a[i] * eta[be] * a[j];
  return s;
}

// Brute-force minimum over a 1000 x 1000 grid of half-circle angles (n = N = 2).
double brute_nu_2x2(const SymTensor4& A) {
  constexpr int steps = 1000;
  double best = std::numeric_limits<double>::infinity();
  for (int p = 0; p < steps; ++p) {
    const double phi = std::numbers::pi * p / steps;
    const Vector eta = Eigen::Vector2d(std::cos(phi), std::sin(phi));
    for (int t = 0; t < steps; ++t) {
      const double th = std::numbers::pi * t / steps;
      best = std::min(best, form(A, eta, Eigen::Vector2d(std::cos(th), std::sin(th))));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("identity tensor has nu exactly one") {
  for (Dims d : {Dims{2, 1}, Dims{2, 2}, Dims{3, 2}, Dims{3, 3}}) {
    const EllipticityResult r = ellipticity_constant(SymTensor4::identity(d));
    CHECK(r.nu == 1.0);
    CHECK(r.argmin_eta.norm() == doctest::Approx(1.0));
    CHECK(r.argmin_a.norm() == doctest::Approx(1.0));
  }
}

TEST_CASE("monotone tensor: nu is the smallest eigenvalue of S") {
  Matrix S(2, 2);
  S << 3.0, 1.0, 1.0, 2.0;
  const double lmin = (5.0 - std::sqrt(5.0)) / 2.0;
  CHECK(ellipticity_constant(SymTensor4::monotone(2, S)).nu == doctest::Approx(lmin).epsilon(1e-10));
}

TEST_CASE("nu agrees with a brute-force angular scan") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 3; ++t) {
    const SymTensor4 A = random_tensor({2, 2}, rng, 0.05);
    const EllipticityResult r = ellipticity_constant(A);
    const double brute = brute_nu_2x2(A);
    CHECK(r.nu <= brute + 1e-12);
    CHECK(brute - r.nu <= 1e-4 * frobenius4(A));
    CHECK(form(A, r.argmin_eta, r.argmin_a) == doctest::Approx(r.nu).epsilon(1e-9));
  }
}

TEST_CASE("N = 1: nu is the smallest eigenvalue of the n x n coefficient matrix") {
  std::mt19937_64 rng(8);
  for (int n : {2, 3}) {
    const SymTensor4 A = random_tensor({n, 1}, rng, 0.1);
    Eigen::SelfAdjointEigenSolver<Matrix> es(A.as_matrix());
    CHECK(ellipticity_constant(A).nu == doctest::Approx(es.eigenvalues()[0]).epsilon(1e-8));
  }
}

TEST_CASE("n = 3, N = 2: nu matches a random-search upper bound") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  const SymTensor4 A = random_tensor({3, 2}, rng, 0.05);
  const EllipticityResult r = ellipticity_constant(A);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 200000; ++s) {
    Vector eta(2), a(3);
    for (int k = 0; k < 2; ++k) eta[k] = g(rng);
    for (int k = 0; k < 3; ++k) a[k] = g(rng);
    best = std::min(best, form(A, eta.normalized(), a.normalized()));
  }
  CHECK(r.nu <= best + 1e-12);
  CHECK(best - r.nu <= 5e-3 * frobenius4(A));
}

TEST_CASE("rank-one positivity and witness") {
  Matrix M = Matrix::Identity(4, 4);
  M(0, 0) = -0.5;  // (alpha, i) = (1, 1): eta = e1, a = e1 is negative
  const RankOnePositivity r = is_rank_one_positive(SymTensor4::from_matrix({2, 2}, M));
  CHECK_FALSE(r.positive);
  CHECK(r.ellipticity.nu == doctest::Approx(-0.5));
  CHECK(rank_one_form(SymTensor4::from_matrix({2, 2}, M), r.ellipticity.argmin_eta,
                      r.ellipticity.argmin_a) <= 0.0);
  CHECK(is_rank_one_positive(SymTensor4::identity({2, 2})).positive);
  CHECK_THROWS_AS(ellipticity_constant(SymTensor4::identity({2, 2}), 0.0), PreconditionError);
}

TEST_CASE("contraction by hand") {
  // A = identity: (A:Z)_alpha = trace of block alpha.
  Matrix Z1(2, 2), Z2(2, 2);
  Z1 << 1.0, 2.0, 2.0, 3.0;
  Z2 << -1.0, 0.5, 0.5, 4.0;
  const HessianValue Z = HessianValue::from_blocks({Z1, Z2});
  const Vector v = contract_hess(SymTensor4::identity({2, 2}), Z);
  CHECK(v[0] == 4.0);
  CHECK(v[1] == 3.0);
  // Single coupling entry A_{1,1,2,2} and its mirror: (A:Z)_1 = Z2_{12}, (A:Z)_2 = Z1_{21}.
  std::vector<double> e(16, 0.0);
  e[(0 * 2 + 0) * 4 + 1 * 2 + 1] = 1.0;
  e[(1 * 2 + 1) * 4 + 0 * 2 + 0] = 1.0;
  const Vector w = contract_hess(SymTensor4({2, 2}, e), Z);
  CHECK(w[0] == 0.5);
  CHECK(w[1] == 2.0);
  CHECK(frobenius(Z) == doctest::Approx(std::sqrt(1 + 8 + 9 + 1 + 0.5 + 16.0)));
}

TEST_CASE("constructors symmetrize and validate") {
  std::vector<double> e(16, 0.0);
  e[1] = 2.0;  // A_{1,1,1,2} only
  const SymTensor4 A({2, 2}, e);
  CHECK(A(0, 0, 0, 1) == 1.0);
  CHECK(A(0, 1, 0, 0) == 1.0);
  CHECK(SymTensor4::max_asymmetry({2, 2}, e) == 2.0);
  CHECK_THROWS_AS(SymTensor4({2, 2}, std::vector<double>(15, 0.0)), DimensionError);
  const HessianValue X({2, 1}, {0.0, 2.0, 0.0, 0.0});
  CHECK(X(0, 0, 1) == 1.0);
  CHECK(X(0, 1, 0) == 1.0);
  CHECK_THROWS_AS(require_same_dims({2, 1}, {2, 2}, "test"), DimensionError);
}

TEST_CASE("JSON round trip and asymmetry rejection") {
  std::mt19937_64 rng(3);
  const SymTensor4 A = random_tensor({2, 2}, rng, 0.0);
  const SymTensor4 B = tensor_from_json(to_json(A));
  CHECK(A.entries() == B.entries());
  nlohmann::json bad = to_json(A);
  bad["entries"][1] = bad["entries"][1].get<double>() + 1e-6;
  CHECK_THROWS_AS(tensor_from_json(bad), FormatError);
  CHECK_THROWS_AS(tensor_from_json(nlohmann::json{{"n", 2}}), FormatError);
}
