#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "hessiansys/error.hpp"
#include "hessiansys/mt_verify.hpp"
#include "hessiansys/operator_catalog.hpp"
#include "test_support.hpp"

using namespace hessiansys;

namespace {

const double pi = std::numbers::pi;

// Golub-Welsch nodes and weights, independent of the library rule.
std::pair<Vector, Vector> golub_welsch(int n) {
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  return {es.eigenvalues(), 2.0 * es.eigenvectors().row(0).transpose().array().square().matrix()};
}

// Integral of |D^2v|^2 - (Delta v)^2 over the ellipse by iterated quadrature
// in (x, y) = (a sin th, s b cos th), which removes the endpoint square root.
double cartesian_lhs(const TestFunction& v, double a, double b, int n) {
  const auto [t, w] = golub_welsch(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    const double th = 0.5 * pi * t[i];
    const double x = a * std::sin(th);
    const double half = b * std::cos(th);
    for (int j = 0; j < n; ++j) {
      Vector p(2);
      p << x, half * t[j];
      const Matrix H = v.hessian(p);
      total += 0.5 * pi * a * std::cos(th) * w[i] * half * w[j] *
               (H.squaredNorm() - H.trace() * H.trace());
    }
  }
  return total;
}

Matrix random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.2, 4.0);
  const Matrix O = test_support::random_rotation(2, rng);
  Vector l(2);
  l << U(rng), U(rng);
  return O * l.asDiagonal() * O.transpose();
}

}  // namespace

TEST_CASE("signed curvature matches a finite-difference oracle") {
  const SmoothDomain2D e = SmoothDomain2D::ellipse(2.0, 1.0);
  const double h = 1e-4;
  for (double t = 0.05; t < 2 * pi; t += 0.37) {
    const Vector d1 = (e.point(t + h) - e.point(t - h)) / (2 * h);
    const Vector d2 = (e.point(t + h) - 2 * e.point(t) + e.point(t - h)) / (h * h);
    const double kappa = (d1[0] * d2[1] - d1[1] * d2[0]) / std::pow(d1.norm(), 3);
    CHECK(mean_curvature_signed(e, t) == doctest::Approx(-kappa).epsilon(1e-6));
    CHECK(e.speed(t) == doctest::Approx(d1.norm()).epsilon(1e-7));
  }
  CHECK(mean_curvature_signed(SmoothDomain2D::disk(2.0), 1.0) == doctest::Approx(-0.5));
  CHECK(SmoothDomain2D::disk(1.0).is_disk());
  CHECK_THROWS_AS(SmoothDomain2D::ellipse(0.0, 1.0), PreconditionError);
}

TEST_CASE("Gauss-Legendre rule") {
  const auto [x2, w2] = gauss_legendre(2);
  CHECK(x2[0] == doctest::Approx(-1 / std::sqrt(3.0)));
  CHECK(x2[1] == doctest::Approx(1 / std::sqrt(3.0)));
  CHECK(w2[0] == doctest::Approx(1.0));
  for (int n : {3, 7, 16, 64}) {
    const auto [x, w] = gauss_legendre(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double q = 0.0;
      for (int k = 0; k < n; ++k) q += w[k] * std::pow(x[k], deg);
      const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      CHECK(q == doctest::Approx(exact).epsilon(1e-12).scale(1.0));
    }
  }
  CHECK_THROWS_AS(gauss_legendre(0), PreconditionError);
}

TEST_CASE("boundary identity on the disk and the ellipse") {
  const SmoothDomain2D disk = SmoothDomain2D::disk(1.0);
  const MTIdentityReport d = mt_identity(make_test_function("bubble", disk), disk, 64);
  CHECK(d.lhs == doctest::Approx(-8 * pi).epsilon(1e-6));
  CHECK(d.rhs == doctest::Approx(-8 * pi).epsilon(1e-6));

  const SmoothDomain2D ell = SmoothDomain2D::ellipse(2.0, 1.0);
  const TestFunction v = make_test_function("bubble", ell);
  CHECK(v.value(Vector::Unit(2, 0) * 2.0) == doctest::Approx(0.0));
  const MTIdentityReport e = mt_identity(v, ell, 64);
  CHECK(e.lhs == doctest::Approx(-4 * pi).epsilon(1e-6));
  CHECK(e.rhs == doctest::Approx(-4 * pi).epsilon(1e-6));
  CHECK(cartesian_lhs(v, 2.0, 1.0, 40) == doctest::Approx(-4 * pi).epsilon(1e-6));

  const MTIdentityReport sq = mt_identity(make_test_function("bubble-squared", ell), ell, 32);
  CHECK(std::abs(sq.lhs) < 1e-10);
  CHECK(std::abs(sq.rhs) < 1e-12);
}

TEST_CASE("identity holds for richer test functions and converges with the order") {
  const SmoothDomain2D ell = SmoothDomain2D::ellipse(2.0, 1.0);
  for (const std::string& kind : test_function_kinds()) {
    const TestFunction v = make_test_function(kind, ell);
    const MTIdentityReport r = mt_identity(v, ell, 64);
    CHECK(r.rhs <= 1e-14);
    CHECK(r.mismatch <= 1e-9 * std::max(1.0, std::abs(r.lhs)));
    CHECK(std::abs(r.lhs - cartesian_lhs(v, 2.0, 1.0, 60)) <= 1e-9 * std::max(1.0, std::abs(r.lhs)));
  }
  const TestFunction v = make_test_function("bubble-cubic", ell);
  const double e4 = mt_identity(v, ell, 4).mismatch;
  const double e8 = mt_identity(v, ell, 8).mismatch;
  const double e16 = mt_identity(v, ell, 16).mismatch;
  CHECK((e8 <= e4 / 4 || e8 < 1e-12));
  CHECK((e16 <= e8 / 4 || e16 < 1e-12));
  CHECK_THROWS_AS(make_test_function("nope", ell), PreconditionError);
}

TEST_CASE("functions that do not vanish on the boundary are rejected") {
  const SmoothDomain2D disk = SmoothDomain2D::disk(1.0);
  const TestFunction bad{"shifted", Polynomial2::constant(1.0) + Polynomial2::monomial(1, 0)};
  CHECK_THROWS_AS(mt_identity(bad, disk, 16), PreconditionError);
}

TEST_CASE("polynomial algebra") {
  const Polynomial2 p = Polynomial2::monomial(2, 1, 3.0) + Polynomial2::monomial(0, 3, -1.0);
  CHECK(p(2.0, -1.0) == doctest::Approx(3 * 4 * -1 + 1));
  CHECK(p.dx()(2.0, -1.0) == doctest::Approx(6 * 2 * -1));
  CHECK(p.dy()(2.0, -1.0) == doctest::Approx(12 - 3));
  CHECK(p.degree() == 3);
  Matrix K(2, 2);
  K << 1.0, 2.0, -0.5, 3.0;
  const Polynomial2 q = p.compose_linear(K);
  CHECK(q(0.3, 0.7) == doctest::Approx(p(0.3 + 1.4, -0.15 + 2.1)));
  CHECK((p * p)(0.4, 0.9) == doctest::Approx(p(0.4, 0.9) * p(0.4, 0.9)));
}

TEST_CASE("sandwich inequality and identity") {
  Matrix L = Vector(Eigen::Vector2d(1.0, 2.0)).asDiagonal();
  Matrix X(2, 2);
  X << 0.0, 1.0, 1.0, 0.0;
  SandwichReport r = lambda_sandwich_inequality(L, X);
  CHECK(r.holds);
  CHECK(r.identity_lhs == doctest::Approx(2 * 4.0));
  CHECK(r.identity_rhs == doctest::Approx(r.identity_lhs));
  CHECK(r.rhs == doctest::Approx(std::sqrt(2.0)));

  X << 1.0, 0.0, 0.0, 0.0;  // equality case
  r = lambda_sandwich_inequality(L, X);
  CHECK(r.holds);
  CHECK(r.lhs == doctest::Approx(r.rhs));

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(0.05, 10.0);
  std::normal_distribution<double> G;
  for (int s = 0; s < 1000; ++s) {
    const int n = 2 + s % 2;
    Vector lam(n);
    for (int i = 0; i < n; ++i) lam[i] = U(rng);
    std::sort(lam.begin(), lam.end());
    Matrix Y(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) Y(i, j) = G(rng);
    const SandwichReport q = lambda_sandwich_inequality(Matrix(lam.cwiseSqrt().asDiagonal()), Y + Y.transpose());
    CHECK(q.holds);
    CHECK(std::abs(q.identity_lhs - q.identity_rhs) <= 1e-12 * std::max(1.0, q.identity_lhs));
  }
  Matrix descending = Vector(Eigen::Vector2d(2.0, 1.0)).asDiagonal();
  CHECK_THROWS_AS(lambda_sandwich_inequality(descending, X), PreconditionError);
  Matrix asym(2, 2);
  asym << 0.0, 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(lambda_sandwich_inequality(L, asym), PreconditionError);
}

TEST_CASE("spectral pullback") {
  const SmoothDomain2D disk = SmoothDomain2D::disk(1.0);
  const TestFunction v = make_test_function("bubble-cubic", disk);
  std::vector<Vector> pts;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.6, 0.6);
  for (int k = 0; k < 20; ++k) pts.push_back(Vector(Eigen::Vector2d(U(rng), U(rng))));

  const PullbackReport id = pullback_checks(Matrix::Identity(2, 2), v, pts);
  CHECK(id.pass);
  CHECK(id.reconstruction_error == 0.0);

  Matrix D = Matrix::Zero(2, 2);
  D.diagonal() << 4.0, 1.0;
  const SpectralFactor f = spectral_factor(D);
  CHECK(f.Lambda(0, 0) == doctest::Approx(1.0));
  CHECK(f.Lambda(1, 1) == doctest::Approx(2.0));
  CHECK(pullback_checks(D, v, pts).pass);

  for (int k = 0; k < 100; ++k) {
    const Matrix A = random_spd(rng);
    const SpectralFactor s = spectral_factor(A);
    CHECK((s.K * s.K.transpose() - A).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, A.norm()));
    CHECK((s.O.transpose() * s.O - Matrix::Identity(2, 2)).norm() <= 1e-12);
    const PullbackReport r = pullback_checks(A, v, pts);
    CHECK(r.pass);
    CHECK(r.laplace_error <= 1e-10);
    CHECK(r.min_hessian_margin >= -1e-10);
  }
  Matrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(spectral_factor(indefinite), PreconditionError);
}

TEST_CASE("discrete generalized MT inequality") {
  const BoxDomain dom = BoxDomain::unit(2, 32);
  SHDecomposition scalar;
  scalar.dims = {2, 1};
  scalar.B = {Matrix::Identity(1, 1)};
  scalar.A = {Matrix::Identity(2, 2)};
  const MTInequalityReport a =
      generalized_mt_inequality(SymTensor4::identity({2, 1}), scalar, random_probe_fields(dom, 1, 40, 8));
  CHECK(a.pass);
  CHECK(a.nu == doctest::Approx(1.0));
  CHECK(a.bound == doctest::Approx(1 + 10.0 / 33));
  CHECK(a.worst_ratio <= a.bound);

  const SHDecomposition dec = sh_diag_example();
  const MTInequalityReport b = generalized_mt_inequality(assemble(dec), dec, random_probe_fields(dom, 2, 40, 9));
  CHECK(b.pass);
  CHECK(b.probes_used == 40);

  const DiscreteField sharp = DiscreteField::sample(dom, 1, [](const Vector& x) -> Vector {
    return Vector::Constant(1, std::sin(8 * pi * x[0]) * std::sin(pi * x[1]));
  });
  const MTInequalityReport c = generalized_mt_inequality(SymTensor4::identity({2, 1}), scalar, {sharp});
  CHECK(c.worst_ratio >= 0.95);
  CHECK(c.worst_ratio <= c.bound);

  CHECK_THROWS_AS(generalized_mt_inequality(SymTensor4::identity({2, 2}), dec, {}), PreconditionError);
}

TEST_CASE("SH projections split the hessian norm") {
  std::mt19937_64 rng(21);
  const BoxDomain dom = BoxDomain::unit(2, 12);
  for (int k = 0; k < 5; ++k) {
    SHDecomposition dec = test_support::random_sh(2, 2, rng);
    const DiscreteField u = random_smooth_field(dom, 2, 100 + k);
    CHECK(sh_projection_identity(dec, u) <= 1e-12);
  }
  CHECK(sh_projection_identity(sh_diag_example(), random_probe_fields(dom, 2, 2, 3)[1]) <= 1e-12);
}

TEST_CASE("reports serialize") {
  const SmoothDomain2D disk = SmoothDomain2D::disk(1.0);
  const nlohmann::json j = to_json(mt_identity(make_test_function("bubble", disk), disk, 8));
  CHECK(j.at("quad_order") == 8);
  CHECK(j.contains("mismatch"));
}
