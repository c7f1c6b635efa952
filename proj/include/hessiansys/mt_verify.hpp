#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hessiansys/grid.hpp"
#include "hessiansys/sh_structure.hpp"

namespace hessiansys {

/// Ellipse {x^2/a^2 + y^2/b^2 < 1} parametrized by X(t) = (a cos t, b sin t).
class SmoothDomain2D {
public:
  static SmoothDomain2D disk(double R);
  static SmoothDomain2D ellipse(double a, double b);

  bool is_disk() const noexcept { return a_ == b_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  Vector point(double t) const;
  Vector tangent(double t) const;  // X'(t)
  double speed(double t) const;    // |X'(t)|

private:
  SmoothDomain2D(double a, double b);
  double a_ = 1.0, b_ = 1.0;
};

/// sigma(t) = H.N at X(t); negative on these convex domains.
double mean_curvature_signed(const SmoothDomain2D& dom, double t);

/// Real polynomial in (x, y) stored as {(i, j) -> c} for c x^i y^j.
class Polynomial2 {
public:
  Polynomial2() = default;
  static Polynomial2 constant(double c);
  static Polynomial2 monomial(int i, int j, double c = 1.0);

  double operator()(double x, double y) const;
  Polynomial2 dx() const;
  Polynomial2 dy() const;
  /// p(K00 x + K01 y, K10 x + K11 y).
  Polynomial2 compose_linear(const Matrix& K) const;
  int degree() const;
  const std::map<std::pair<int, int>, double>& terms() const noexcept { return terms_; }

  Polynomial2& operator+=(const Polynomial2& o);
  Polynomial2& operator*=(double s);
  friend Polynomial2 operator+(Polynomial2 p, const Polynomial2& q) { return p += q; }
  friend Polynomial2 operator-(Polynomial2 p, const Polynomial2& q) { return p += -1.0 * q; }
  friend Polynomial2 operator*(double s, Polynomial2 p) { return p *= s; }
  friend Polynomial2 operator*(const Polynomial2& p, const Polynomial2& q);

private:
  void add(int i, int j, double c);
  std::map<std::pair<int, int>, double> terms_;
};

/// Scalar test function with analytic derivatives.
struct TestFunction {
  std::string name;
  Polynomial2 v;

  double value(const Vector& x) const { return v(x[0], x[1]); }
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
};

/// 1 - x^2/a^2 - y^2/b^2, vanishing on the boundary of dom.
Polynomial2 boundary_factor(const SmoothDomain2D& dom);

/// Named polynomials times the boundary factor phi of dom:
/// "bubble" (phi), "bubble-squared" (phi^2), "bubble-linear" (phi (1 + x/2 - y/3)),
/// "bubble-cubic" (phi (1 + x y + x^3/4 - y^2/2)).
TestFunction make_test_function(const std::string& kind, const SmoothDomain2D& dom);
std::vector<std::string> test_function_kinds();

struct MTIdentityReport {
  double lhs = 0.0;  // integral of |D^2v|^2 - (Delta v)^2
  double rhs = 0.0;  // (n-1) boundary integral of |Dv|^2 sigma
  double mismatch = 0.0;  // |lhs - rhs| over the integral of |D^2v|^2 + (Delta v)^2
  int quad_order = 0;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order);

/// Interior: Gauss-Legendre in the radial variable times the trapezoid rule
/// with 2 quad_order angles. Boundary: trapezoid rule with 2 quad_order angles.
/// Throws PreconditionError if v does not vanish on the boundary.
MTIdentityReport mt_identity(const TestFunction& v, const SmoothDomain2D& dom, int quad_order);

struct SandwichReport {
  double lhs = 0.0;           // |Lambda X Lambda|
  double rhs = 0.0;           // lambda_1 |X|
  double identity_lhs = 0.0;  // |Lambda X Lambda|^2
  double identity_rhs = 0.0;  // sum_ij X_ij^2 lambda_i lambda_j
  bool holds = false;         // lhs >= rhs up to round-off
};

/// Lambda = diag(sqrt(lambda_i)) with ascending positive entries, X symmetric.
SandwichReport lambda_sandwich_inequality(const Matrix& Lambda, const Matrix& X);

struct SpectralFactor {
  Matrix O;       // orthogonal eigenvectors
  Matrix Lambda;  // diag(sqrt(lambda_i)), ascending
  Matrix K;       // O Lambda, so A = K K^T
};

SpectralFactor spectral_factor(const Matrix& A);

struct PullbackReport {
  double reconstruction_error = 0.0;  // max |K K^T - A|
  double laplace_error = 0.0;         // max |Delta(v o K) - A : D^2v(K x)| relative
  double min_hessian_margin = 0.0;    // min |D^2(v o K)| - nu |D^2v(Kx)|, relative
  int points = 0;
  bool pass = false;
};

/// Checks the chain rule identities for v o K at the given points, with v o K
/// formed by exact polynomial composition.
PullbackReport pullback_checks(const Matrix& A, const TestFunction& v,
                               const std::vector<Vector>& points);

struct MTInequalityReport {
  double nu = 0.0;
  double worst_ratio = 0.0;  // max nu ||D^2u|| / ||A:D^2u||
  double bound = 0.0;        // 1 + 10 h
  int probes_used = 0;
  int probes_skipped = 0;
  bool pass = false;
};

/// Discrete generalized Miranda-Talenti ratio. Requires dec to pass verify_sh
/// and to assemble to A.
MTInequalityReport generalized_mt_inequality(const SymTensor4& A, const SHDecomposition& dec,
                                             const std::vector<DiscreteField>& probes);

/// max over nodes of |sum_g |D^2 (P^g u)|^2 - |D^2 u|^2| relative to |D^2u|^2.
double sh_projection_identity(const SHDecomposition& dec, const DiscreteField& u);

nlohmann::json to_json(const MTIdentityReport& r);
nlohmann::json to_json(const SandwichReport& r);
nlohmann::json to_json(const PullbackReport& r);
nlohmann::json to_json(const MTInequalityReport& r);

}  // namespace hessiansys
