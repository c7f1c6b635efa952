#include "hessiansys/operator_catalog.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "hessiansys/error.hpp"

namespace hessiansys {

namespace {

constexpr double tiny = 1e-9;

// Reads numeric overrides and rejects any key that no entry consumed.
class Params {
public:
  Params(const std::string& id, const nlohmann::json& j) : id_(id), j_(j) {
    if (!j_.is_object()) throw PreconditionError("catalog '" + id_ + "': parameters must be a table");
  }

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_number())
      throw PreconditionError("catalog '" + id_ + "': parameter '" + key + "' must be a number");
    return j_.at(key).get<double>();
  }

  int integer(const std::string& key, int fallback) {
    used_.insert(key);
    if (!j_.contains(key)) return fallback;
    if (!j_.at(key).is_number_integer())
      throw PreconditionError("catalog '" + id_ + "': parameter '" + key + "' must be an integer");
    return j_.at(key).get<int>();
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key))
        throw PreconditionError("catalog '" + id_ + "': unknown parameter '" + key + "'");
  }

private:
  std::string id_;
  const nlohmann::json& j_;
  std::set<std::string> used_;
};

double require_lipschitz(const std::string& id, double L) {
  if (!(L > 0.0) || !(L < 1.0))
    throw PreconditionError("catalog '" + id + "': L must lie in (0, 1)");
  return L;
}

const std::vector<CatalogListing>& listings() {
  static const std::vector<CatalogListing> l = {
      {"linear-laplace", "componentwise Laplacian, alpha = 1"},
      {"linear-sh-diag", "linear operator with the diagonal SH example tensor"},
      {"tanh-perturbed", "Laplacian plus L nu tanh(|X|) times the unit diagonal (L = 0.2)"},
      {"g2A-plus-G", "g^2 A:X + L nu g^2 tanh(|X|) with alpha = 1/g^2, g = 1 + sin(2 pi x1)/2 (L = 0.3)"},
      {"strictly-convex-not-CT", "linear, positive definite on R^{2x2}, not Campanato-Tarsia elliptic"},
      {"tanh-plus-sin", "tanh-perturbed plus s sin(|X|) times the unit diagonal (s = 0.05)"},
  };
  return l;
}

// F(x, X) = s(x) (A:X + L nu tanh(|X|) e) with e the unit diagonal.
NonlinearOperator tanh_operator(const std::string& name, const SymTensor4& A, double nu, double L,
                                std::function<double(const Vector&)> s) {
  NonlinearOperator op = linear_operator(A, L, tiny, name);
  const Vector e = unit_diagonal(A.dims().N);
  op.F = [A, nu, L, e, s](const Vector& x, const HessianValue& X) -> Vector {
    const double w = s ? s(x) : 1.0;
    return w * (contract_hess(A, X) + L * nu * std::tanh(frobenius(X)) * e);
  };
  return op;
}

}  // namespace

Vector unit_diagonal(int N) { return Vector::Constant(N, 1.0 / std::sqrt(static_cast<double>(N))); }

SHDecomposition sh_diag_example() {
  SHDecomposition d;
  d.dims = {2, 2};
  Matrix B1 = Matrix::Zero(2, 2), B2 = Matrix::Zero(2, 2), A1 = Matrix::Zero(2, 2),
         A2 = Matrix::Zero(2, 2);
  B1(0, 0) = 1.0;
  B2(1, 1) = 2.0;
  A1(0, 0) = 1.0;
  A1(1, 1) = 2.0;
  A2(0, 0) = 1.0;
  A2(1, 1) = 3.0;
  d.B = {B1, B2};
  d.A = {A1, A2};
  return d;
}

SymTensor4 strictly_convex_not_ct_tensor(double rho, double D) {
  if (!(rho > 0.0 && rho < 1.0) || !(D > 0.0))
    throw PreconditionError("strictly_convex_not_ct_tensor: need 0 < rho < 1 and D > 0");
  // Flattened (alpha, i) order: 11, 12, 21, 22.
  const double s = 1.0 / std::sqrt(2.0);
  Vector p(4), q(4), d1(4), d2(4);
  p << s, 0, s, 0;
  q << 0, s, 0, s;
  d1 << 0, s, 0, -s;
  d2 << s, 0, -s, 0;
  Matrix block(2, 2);
  block << 1.0, -rho * std::sqrt(D), -rho * std::sqrt(D), D;
  Matrix U1(4, 2), U2(4, 2);
  U1 << p, d1;
  U2 << q, d2;
  const Matrix M = U1 * block * U1.transpose() + U2 * block * U2.transpose();
  return SymTensor4::from_matrix({2, 2}, M);
}

ClosedFormField sine_product(Dims dims, std::vector<double> lower, std::vector<double> upper) {
  if (lower.empty() && upper.empty()) {
    lower.assign(dims.n, 0.0);
    upper.assign(dims.n, 1.0);
  }
  if (static_cast<int>(lower.size()) != dims.n || static_cast<int>(upper.size()) != dims.n)
    throw DimensionError("sine_product: box corners must have n entries");
  std::vector<double> w(dims.n);
  for (int k = 0; k < dims.n; ++k) w[k] = std::numbers::pi / (upper[k] - lower[k]);
  ClosedFormField u;
  u.dims = dims;
  u.value = [dims, lower, w](const Vector& x) {
    double v = 1.0;
    for (int k = 0; k < dims.n; ++k) v *= std::sin(w[k] * (x[k] - lower[k]));
    return Vector::Constant(dims.N, v);
  };
  u.hessian = [dims, lower, w](const Vector& x) {
    const int n = dims.n;
    std::vector<double> s(n), c(n);
    for (int k = 0; k < n; ++k) {
      s[k] = std::sin(w[k] * (x[k] - lower[k]));
      c[k] = std::cos(w[k] * (x[k] - lower[k]));
    }
    Matrix H(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = i == j ? -w[i] * w[i] * s[i] : w[i] * w[j] * c[i] * c[j];
        for (int k = 0; k < n; ++k)
          if (k != i && k != j) v *= s[k];
        H(i, j) = v;
      }
    return HessianValue::from_blocks(std::vector<Matrix>(dims.N, H));
  };
  return u;
}

std::vector<CatalogListing> catalog_list() { return listings(); }

CatalogEntry catalog_get(const std::string& id, const nlohmann::json& params,
                         std::vector<double> lower, std::vector<double> upper) {
  Params P(id, params);
  CatalogEntry e;
  e.id = id;
  for (const auto& l : listings())
    if (l.id == id) e.description = l.description;
  if (e.description.empty()) throw PreconditionError("unknown catalog entry '" + id + "'");

  if (id == "linear-laplace") {
    const int n = P.integer("n", 2), N = P.integer("N", 2);
    if (n < 2 || n > 3 || N < 1) throw PreconditionError("catalog 'linear-laplace': need n in {2,3}, N >= 1");
    e.op = linear_operator(SymTensor4::identity({n, N}), tiny, tiny, id);
    e.parameters = {{"n", n}, {"N", N}};
  } else if (id == "linear-sh-diag") {
    e.sh = sh_diag_example();
    e.op = linear_operator(assemble(*e.sh), tiny, tiny, id);
    e.parameters = nlohmann::json::object();
  } else if (id == "tanh-perturbed") {
    const double L = require_lipschitz(id, P.number("L", 0.2));
    const SymTensor4 A = SymTensor4::identity({2, 2});
    e.op = tanh_operator(id, A, 1.0, L, nullptr);
    e.def1 = Def1Parameters{1.0 - L / 2.0, L / 2.0};
    e.parameters = {{"L", L}};
  } else if (id == "g2A-plus-G") {
    const double L = require_lipschitz(id, P.number("L", 0.3));
    e.sh = sh_diag_example();
    const SymTensor4 A = assemble(*e.sh);
    const double nu = nu_from_sh(*e.sh);
    auto g2 = [](const Vector& x) {
      const double g = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x[0]);
      return g * g;
    };
    e.op = tanh_operator(id, A, nu, L, g2);
    e.op.alpha = [g2](const Vector& x) { return 1.0 / g2(x); };
    e.def1 = Def1Parameters{1.0 - L / 2.0, L / 2.0};
    e.parameters = {{"L", L}};
  } else if (id == "strictly-convex-not-CT") {
    const double rho = P.number("rho", 0.9), D = P.number("D", 25.0);
    e.op = linear_operator(strictly_convex_not_ct_tensor(rho, D), tiny, tiny, id);
    e.ct = CTCandidate{P.number("ct_alpha", 0.1), P.number("ct_beta", 0.5),
                       P.number("ct_gamma", 0.45)};
    e.parameters = {{"rho", rho}, {"D", D}, {"ct_alpha", e.ct->alpha}, {"ct_beta", e.ct->beta},
                    {"ct_gamma", e.ct->gamma}};
  } else if (id == "tanh-plus-sin") {
    const double L = require_lipschitz(id, P.number("L", 0.2));
    const double amp = P.number("sin_amplitude", 0.05);
    if (!(amp >= 0.0) || !(L + amp < 1.0))
      throw PreconditionError("catalog 'tanh-plus-sin': need sin_amplitude >= 0 and L + amplitude < 1");
    const SymTensor4 A = SymTensor4::identity({2, 2});
    NonlinearOperator base = tanh_operator(id, A, 1.0, L, nullptr);
    const Vector one = unit_diagonal(2);
    e.op = base;
    e.op.beta = L + amp;
    e.op.F = [F = base.F, amp, one](const Vector& x, const HessianValue& X) -> Vector {
      return F(x, X) + amp * std::sin(frobenius(X)) * one;
    };
    e.parameters = {{"L", L}, {"sin_amplitude", amp}};
  }
  P.finish();
  e.solution = sine_product(e.op.dims, std::move(lower), std::move(upper));
  return e;
}

DiscreteField manufacture_rhs(const CatalogEntry& entry, const BoxDomain& dom) {
  if (!entry.solution) throw PreconditionError("catalog '" + entry.id + "' has no manufactured solution");
  if (dom.n() != entry.op.dims.n)
    throw DimensionError("catalog '" + entry.id + "': domain dimension does not match the operator");
  const ClosedFormField& u = *entry.solution;
  return DiscreteField::sample(dom, entry.op.dims.N,
                               [&](const Vector& x) { return entry.op(x, u.hessian(x)); });
}

DiscreteField manufactured_solution(const CatalogEntry& entry, const BoxDomain& dom) {
  if (!entry.solution) throw PreconditionError("catalog '" + entry.id + "' has no manufactured solution");
  if (dom.n() != entry.op.dims.n)
    throw DimensionError("catalog '" + entry.id + "': domain dimension does not match the operator");
  return DiscreteField::sample(dom, entry.op.dims.N, entry.solution->value);
}

}  // namespace hessiansys
