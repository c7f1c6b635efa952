#include "hessiansys/mt_verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hessiansys/error.hpp"

namespace hessiansys {

// ---------------------------------------------------------------------------
// Domain geometry

SmoothDomain2D::SmoothDomain2D(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw PreconditionError("SmoothDomain2D: semi-axes must be positive and finite");
}

SmoothDomain2D SmoothDomain2D::disk(double R) { return SmoothDomain2D(R, R); }
SmoothDomain2D SmoothDomain2D::ellipse(double a, double b) { return SmoothDomain2D(a, b); }

Vector SmoothDomain2D::point(double t) const { return Eigen::Vector2d(a_ * std::cos(t), b_ * std::sin(t)); }
Vector SmoothDomain2D::tangent(double t) const {
  return Eigen::Vector2d(-a_ * std::sin(t), b_ * std::cos(t));
}
double SmoothDomain2D::speed(double t) const { return tangent(t).norm(); }

double mean_curvature_signed(const SmoothDomain2D& dom, double t) {
  const double a = dom.a(), b = dom.b();
  const double s = std::sin(t), c = std::cos(t);
  return -a * b / std::pow(a * a * s * s + b * b * c * c, 1.5);
}

// ---------------------------------------------------------------------------
// Polynomials

Polynomial2 Polynomial2::constant(double c) { return monomial(0, 0, c); }

Polynomial2 Polynomial2::monomial(int i, int j, double c) {
  if (i < 0 || j < 0) throw PreconditionError("Polynomial2: negative exponent");
  Polynomial2 p;
  p.add(i, j, c);
  return p;
}

void Polynomial2::add(int i, int j, double c) {
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(std::make_pair(i, j), c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial2::operator()(double x, double y) const {
  double s = 0.0;
  for (const auto& [e, c] : terms_) s += c * std::pow(x, e.first) * std::pow(y, e.second);
  return s;
}

Polynomial2 Polynomial2::dx() const {
  Polynomial2 p;
  for (const auto& [e, c] : terms_)
    if (e.first > 0) p.add(e.first - 1, e.second, c * e.first);
  return p;
}

Polynomial2 Polynomial2::dy() const {
  Polynomial2 p;
  for (const auto& [e, c] : terms_)
    if (e.second > 0) p.add(e.first, e.second - 1, c * e.second);
  return p;
}

int Polynomial2::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) d = std::max(d, e.first + e.second);
  return d;
}

Polynomial2& Polynomial2::operator+=(const Polynomial2& o) {
  for (const auto& [e, c] : o.terms_) add(e.first, e.second, c);
  return *this;
}

Polynomial2& Polynomial2::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial2 operator*(const Polynomial2& p, const Polynomial2& q) {
  Polynomial2 r;
  for (const auto& [ep, cp] : p.terms_)
    for (const auto& [eq, cq] : q.terms_) r.add(ep.first + eq.first, ep.second + eq.second, cp * cq);
  return r;
}

Polynomial2 Polynomial2::compose_linear(const Matrix& K) const {
  if (K.rows() != 2 || K.cols() != 2) throw DimensionError("compose_linear: K must be 2 x 2");
  const Polynomial2 X = Polynomial2::monomial(1, 0, K(0, 0)) + Polynomial2::monomial(0, 1, K(0, 1));
  const Polynomial2 Y = Polynomial2::monomial(1, 0, K(1, 0)) + Polynomial2::monomial(0, 1, K(1, 1));
  const int deg = degree();
  std::vector<Polynomial2> xp{constant(1.0)}, yp{constant(1.0)};
  for (int k = 1; k <= deg; ++k) {
    xp.push_back(xp.back() * X);
    yp.push_back(yp.back() * Y);
  }
  Polynomial2 r;
  for (const auto& [e, c] : terms_) r += c * (xp[e.first] * yp[e.second]);
  return r;
}

Vector TestFunction::gradient(const Vector& x) const {
  return Eigen::Vector2d(v.dx()(x[0], x[1]), v.dy()(x[0], x[1]));
}

Matrix TestFunction::hessian(const Vector& x) const {
  const Polynomial2 vx = v.dx(), vy = v.dy();
  Matrix H(2, 2);
  H(0, 0) = vx.dx()(x[0], x[1]);
  H(0, 1) = H(1, 0) = vx.dy()(x[0], x[1]);
  H(1, 1) = vy.dy()(x[0], x[1]);
  return H;
}

Polynomial2 boundary_factor(const SmoothDomain2D& dom) {
  return Polynomial2::constant(1.0) + Polynomial2::monomial(2, 0, -1.0 / (dom.a() * dom.a())) +
         Polynomial2::monomial(0, 2, -1.0 / (dom.b() * dom.b()));
}

std::vector<std::string> test_function_kinds() {
  return {"bubble", "bubble-squared", "bubble-linear", "bubble-cubic"};
}

TestFunction make_test_function(const std::string& kind, const SmoothDomain2D& dom) {
  const Polynomial2 phi = boundary_factor(dom);
  using P = Polynomial2;
  if (kind == "bubble") return {kind, phi};
  if (kind == "bubble-squared") return {kind, phi * phi};
  if (kind == "bubble-linear")
    return {kind, phi * (P::constant(1.0) + P::monomial(1, 0, 0.5) + P::monomial(0, 1, -1.0 / 3.0))};
  if (kind == "bubble-cubic")
    return {kind, phi * (P::constant(1.0) + P::monomial(1, 1) + P::monomial(3, 0, 0.25) +
                         P::monomial(0, 2, -0.5))};
  throw PreconditionError("unknown test function '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Quadrature and the identity

namespace {

// P_n(z) and P_n'(z) by the three-term recurrence.
std::pair<double, double> legendre(int n, double z) {
  double p0 = 1.0, p1 = z;
  for (int l = 2; l <= n; ++l) {
    const double p2 = ((2.0 * l - 1.0) * z * p1 - (l - 1.0) * p0) / l;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (z * p1 - p0) / (z * z - 1.0)};
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  if (order < 1) throw PreconditionError("gauss_legendre: order must be >= 1");
  std::vector<double> x(order), w(order);
  for (int k = 0; k < order; ++k) {
    double z = std::cos(std::numbers::pi * (k + 0.75) / (order + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(order, z);
      const double dz = p / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const double dp = legendre(order, z).second;
    x[order - 1 - k] = z;
    w[order - 1 - k] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

MTIdentityReport mt_identity(const TestFunction& v, const SmoothDomain2D& dom, int quad_order) {
  if (quad_order < 2) throw PreconditionError("mt_identity: quad_order must be >= 2");
  const int angles = 2 * quad_order;
  const double dt = 2.0 * std::numbers::pi / angles;
  const auto [xr, wr] = gauss_legendre(quad_order);
  const double a = dom.a(), b = dom.b();

  const Polynomial2 vx = v.v.dx(), vy = v.v.dy();
  const Polynomial2 vxx = vx.dx(), vxy = vx.dy(), vyy = vy.dy();

  double lhs = 0.0, mass = 0.0, vmax = 0.0;
  for (int k = 0; k < angles; ++k) {
    const double t = k * dt, c = std::cos(t), s = std::sin(t);
    double ring = 0.0, ring_mass = 0.0;
    for (int q = 0; q < quad_order; ++q) {
      const double r = 0.5 * (xr[q] + 1.0);
      const double x = a * r * c, y = b * r * s;
      const double hxx = vxx(x, y), hxy = vxy(x, y), hyy = vyy(x, y);
      const double lap = hxx + hyy;
      const double hess2 = hxx * hxx + 2.0 * hxy * hxy + hyy * hyy;
      ring += 0.5 * wr[q] * r * (hess2 - lap * lap);
      ring_mass += 0.5 * wr[q] * r * (hess2 + lap * lap);
      vmax = std::max(vmax, std::abs(v.v(x, y)));
    }
    lhs += ring;
    mass += ring_mass;
  }
  lhs *= a * b * dt;
  mass *= a * b * dt;

  double rhs = 0.0;
  for (int k = 0; k < angles; ++k) {
    const double t = k * dt;
    const Vector X = dom.point(t);
    if (std::abs(v.v(X[0], X[1])) > 1e-12 * std::max(1.0, vmax))
      throw PreconditionError("mt_identity: test function '" + v.name +
                              "' does not vanish on the boundary");
    const double gx = vx(X[0], X[1]), gy = vy(X[0], X[1]);
    rhs += (gx * gx + gy * gy) * mean_curvature_signed(dom, t) * dom.speed(t);
  }
  rhs *= dt;  // (n - 1) = 1

  MTIdentityReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  // Relative to the integral of |D^2v|^2 + (Delta v)^2, which stays positive when both sides vanish.
  r.mismatch = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), mass, 1e-300});
  r.quad_order = quad_order;
  return r;
}

// ---------------------------------------------------------------------------
// Matrix identities

SandwichReport lambda_sandwich_inequality(const Matrix& Lambda, const Matrix& X) {
  const Eigen::Index n = Lambda.rows();
  if (Lambda.cols() != n || X.rows() != n || X.cols() != n)
    throw DimensionError("lambda_sandwich_inequality: need square matrices of equal size");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && Lambda(i, j) != 0.0)
        throw PreconditionError("lambda_sandwich_inequality: Lambda must be diagonal");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(Lambda(i, i) > 0.0)) throw PreconditionError("lambda_sandwich_inequality: Lambda must be positive");
    if (i > 0 && Lambda(i, i) < Lambda(i - 1, i - 1))
      throw PreconditionError("lambda_sandwich_inequality: Lambda must be sorted ascending");
  }
  if ((X - X.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, X.norm()))
    throw PreconditionError("lambda_sandwich_inequality: X must be symmetric");

  SandwichReport r;
  const Matrix S = Lambda * X * Lambda;
  r.lhs = S.norm();
  r.rhs = Lambda(0, 0) * Lambda(0, 0) * X.norm();
  r.identity_lhs = S.squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double li = Lambda(i, i) * Lambda(i, i), lj = Lambda(j, j) * Lambda(j, j);
      r.identity_rhs += X(i, j) * X(i, j) * li * lj;
    }
  r.holds = r.lhs >= r.rhs * (1.0 - 1e-12);
  return r;
}

SpectralFactor spectral_factor(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionError("spectral_factor: A must be square");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, A.norm()))
    throw PreconditionError("spectral_factor: A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw PreconditionError("spectral_factor: A must be positive definite");
  SpectralFactor f;
  f.O = es.eigenvectors();
  f.Lambda = es.eigenvalues().cwiseSqrt().asDiagonal();
  f.K = f.O * f.Lambda;
  return f;
}

PullbackReport pullback_checks(const Matrix& A, const TestFunction& v,
                               const std::vector<Vector>& points) {
  if (A.rows() != 2) throw DimensionError("pullback_checks: test functions are bivariate");
  const SpectralFactor sf = spectral_factor(A);
  const double nu = sf.Lambda(0, 0) * sf.Lambda(0, 0);
  const TestFunction vt{v.name + "-pullback", v.v.compose_linear(sf.K)};
  PullbackReport r;
  r.reconstruction_error = (sf.K * sf.K.transpose() - A).cwiseAbs().maxCoeff();
  r.min_hessian_margin = std::numeric_limits<double>::infinity();
  for (const Vector& x : points) {
    const Vector y = sf.K * x;
    const Matrix H = v.hessian(y);
    const Matrix Ht = vt.hessian(x);
    const double lap_t = Ht.trace();
    const double contraction = A.cwiseProduct(H).sum();
    const double scale = std::max(A.norm() * H.norm(), 1e-300);
    r.laplace_error = std::max(r.laplace_error, std::abs(lap_t - contraction) / scale);
    const double margin = (Ht.norm() - nu * H.norm()) / std::max(Ht.norm(), 1e-300);
    r.min_hessian_margin = std::min(r.min_hessian_margin, margin);
    ++r.points;
  }
  if (points.empty()) r.min_hessian_margin = 0.0;
  r.pass = r.reconstruction_error <= 1e-12 * std::max(1.0, A.norm()) && r.laplace_error <= 1e-10 &&
           r.min_hessian_margin >= -1e-12;
  return r;
}

MTInequalityReport generalized_mt_inequality(const SymTensor4& A, const SHDecomposition& dec,
                                             const std::vector<DiscreteField>& probes) {
  if (!verify_sh(dec).pass)
    throw PreconditionError("generalized_mt_inequality: decomposition fails the structural hypothesis");
  require_same_dims(A.dims(), dec.dims, "generalized_mt_inequality");
  const SymTensor4 S = assemble(dec);
  double diff = 0.0;
  for (std::size_t k = 0; k < A.entries().size(); ++k)
    diff = std::max(diff, std::abs(A.entries()[k] - S.entries()[k]));
  if (diff > 1e-10 * std::max(1.0, frobenius4(A)))
    throw PreconditionError("generalized_mt_inequality: decomposition does not assemble to A");

  MTInequalityReport r;
  r.nu = ellipticity_constant(A).nu;
  r.pass = true;
  double bound = std::numeric_limits<double>::infinity();
  for (const DiscreteField& u : probes) {
    if (u.components() != A.dims().N || u.domain().n() != A.dims().n)
      throw DimensionError("generalized_mt_inequality: probe does not match the tensor");
    const DiscreteHessian H = discrete_hessian(u);
    const double nH = hessian_l2_norm(H, u.domain());
    if (nH == 0.0) {
      ++r.probes_skipped;
      continue;
    }
    const double nA = l2_norm(contract_field(A, H, u.domain()));
    const double ratio = nA > 0.0 ? r.nu * nH / nA : std::numeric_limits<double>::infinity();
    const double b = 1.0 + 10.0 * u.domain().max_h();
    bound = std::min(bound, b);
    r.worst_ratio = std::max(r.worst_ratio, ratio);
    if (!(ratio <= b)) r.pass = false;
    ++r.probes_used;
  }
  r.bound = r.probes_used > 0 ? bound : 0.0;
  return r;
}

double sh_projection_identity(const SHDecomposition& dec, const DiscreteField& u) {
  const std::vector<Matrix> P = range_projections(dec);
  const DiscreteHessian H = discrete_hessian(u);
  const Dims d = H.dims();
  double worst = 0.0, scale = 0.0;
  Matrix Hp(d.N, d.n * d.n);
  for (std::size_t p = 0; p < H.node_count(); ++p) {
    for (int a = 0; a < d.N; ++a)
      for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) Hp(a, i * d.n + j) = H.entry(p, a, i, j);
    const double full = Hp.squaredNorm();
    double split = 0.0;
    for (const Matrix& Pg : P) split += (Pg * Hp).squaredNorm();
    worst = std::max(worst, std::abs(split - full));
    scale = std::max(scale, full);
  }
  return scale > 0.0 ? worst / scale : worst;
}

nlohmann::json to_json(const MTIdentityReport& r) {
  return {{"lhs", r.lhs}, {"rhs", r.rhs}, {"mismatch", r.mismatch}, {"quad_order", r.quad_order}};
}

nlohmann::json to_json(const SandwichReport& r) {
  return {{"lhs", r.lhs},
          {"rhs", r.rhs},
          {"identity_lhs", r.identity_lhs},
          {"identity_rhs", r.identity_rhs},
          {"holds", r.holds}};
}

nlohmann::json to_json(const PullbackReport& r) {
  return {{"reconstruction_error", r.reconstruction_error},
          {"laplace_error", r.laplace_error},
          {"min_hessian_margin", r.min_hessian_margin},
          {"points", r.points},
          {"pass", r.pass}};
}

nlohmann::json to_json(const MTInequalityReport& r) {
  return {{"nu", r.nu},
          {"worst_ratio", r.worst_ratio},
          {"bound", r.bound},
          {"probes_used", r.probes_used},
          {"probes_skipped", r.probes_skipped},
          {"pass", r.pass}};
}

}  // namespace hessiansys
