#include "hessiansys/ellipticity_check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hessiansys/error.hpp"

namespace hessiansys {

namespace {

constexpr int radius_levels = 25;
constexpr double fit_floor = 1e-9;

double log_radius(std::size_t level) {
  return std::pow(10.0, -3.0 + 6.0 * static_cast<double>(level) / (radius_levels - 1));
}

nlohmann::json hessian_json(const HessianValue& X) { return X.entries(); }

// The scale includes |alpha F| at both points since the increment is a
// difference of those values.
Margin k_margin(const Vector& AZ, const Vector& Fxz, const Vector& Fx, double alpha, double nu,
                double normZ, double beta, double gamma) {
  const double nAZ = AZ.norm();
  const double lhs = (AZ - alpha * (Fxz - Fx)).norm();
  return {beta * nu * normZ + gamma * nAZ - lhs,
          nu * normZ + nAZ + std::abs(alpha) * (Fxz.norm() + Fx.norm())};
}

Vector increment(const NonlinearOperator& F, const Vector& x, const HessianValue& X,
                 const HessianValue& Z) {
  return F(x, X + Z) - F(x, X);
}

// Accumulates relative margins with the lowest-index tie-break.
class MarginTracker {
public:
  void add(std::size_t s, const Margin& m) {
    const double rel = m.scale > 0.0 ? m.value / m.scale : m.value;
    if (!witness_ || rel < worst_) {
      worst_ = rel;
      absolute_ = m.value;
      witness_ = s;
    }
  }

  ConditionReport finish(std::string name, std::size_t samples, nlohmann::json params) const {
    ConditionReport r;
    r.condition = std::move(name);
    r.samples = samples;
    r.parameters = std::move(params);
    double worst = witness_ ? worst_ : 0.0;
    if (worst < 0.0 && worst >= -margin_round_off) worst = 0.0;
    r.worst_margin = worst;
    r.worst_absolute = witness_ ? absolute_ : 0.0;
    r.pass = worst >= 0.0;
    r.witness = witness_;
    return r;
  }

private:
  double worst_ = 0.0;
  double absolute_ = 0.0;
  std::optional<std::size_t> witness_;
};

void require_cloud(const SampleCloud& cloud, const Dims& d, const char* where) {
  require_same_dims(cloud.dims, d, where);
  if (cloud.size() == 0) throw PreconditionError(std::string(where) + ": empty sample cloud");
}

ConditionReport k_condition(const NonlinearOperator& F, const SymTensor4& A, double nu,
                            double beta, double gamma, const SampleCloud& cloud,
                            const std::function<double(const Vector&)>& alpha, std::string name,
                            nlohmann::json params) {
  require_cloud(cloud, A.dims(), "check_k_condition");
  require_same_dims(F.dims, A.dims(), "check_k_condition");
  MarginTracker t;
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    const Vector AZ = contract_hess(A, cloud.Z[s]);
    const Vector Fxz = F(cloud.x[s], cloud.X[s] + cloud.Z[s]);
    const Vector Fx = F(cloud.x[s], cloud.X[s]);
    t.add(s, k_margin(AZ, Fxz, Fx, alpha(cloud.x[s]), nu, frobenius(cloud.Z[s]), beta, gamma));
  }
  return t.finish(std::move(name), cloud.size(), std::move(params));
}

}  // namespace

HessianValue random_unit_hessian(Dims dims, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::vector<double> e(static_cast<std::size_t>(dims.N) * dims.n * dims.n, 0.0);
  double norm2 = 0.0;
  for (int a = 0; a < dims.N; ++a)
    for (int i = 0; i < dims.n; ++i)
      for (int j = i; j < dims.n; ++j) {
        const double g = gauss(rng);
        norm2 += g * g;
        const double v = i == j ? g : g / std::sqrt(2.0);
        e[(a * dims.n + i) * dims.n + j] = v;
        e[(a * dims.n + j) * dims.n + i] = v;
      }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : e) v *= inv;
  return HessianValue(dims, std::move(e));
}

SampleCloud SampleCloud::generate(Dims dims, std::size_t count, std::uint64_t seed,
                                  std::vector<double> lower, std::vector<double> upper) {
  if (count == 0) throw PreconditionError("SampleCloud: count must be positive");
  if (lower.empty() && upper.empty()) {
    lower.assign(dims.n, 0.0);
    upper.assign(dims.n, 1.0);
  }
  if (static_cast<int>(lower.size()) != dims.n || static_cast<int>(upper.size()) != dims.n)
    throw DimensionError("SampleCloud: box corners must have n entries");
  SampleCloud c;
  c.seed = seed;
  c.dims = dims;
  c.x.reserve(count);
  c.X.reserve(count);
  c.Z.reserve(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t s = 0; s < count; ++s) {
    Vector x(dims.n);
    for (int k = 0; k < dims.n; ++k) x[k] = lower[k] + (upper[k] - lower[k]) * unif(rng);
    c.x.push_back(std::move(x));
    HessianValue X = log_radius((s / radius_levels) % radius_levels) * random_unit_hessian(dims, rng);
    if (s % 8 == 0) X = HessianValue(dims);
    c.X.push_back(std::move(X));
    c.Z.push_back(log_radius(s % radius_levels) * random_unit_hessian(dims, rng));
  }
  return c;
}

Margin k_condition_margin(const NonlinearOperator& F, const SymTensor4& A, double nu, double beta,
                          double gamma, const Vector& x, const HessianValue& X,
                          const HessianValue& Z) {
  return k_margin(contract_hess(A, Z), F(x, X + Z), F(x, X), F.scaling(x), nu, frobenius(Z), beta,
                  gamma);
}

ConditionReport check_k_condition(const NonlinearOperator& F, const SymTensor4& A, double beta,
                                  double gamma, const SampleCloud& cloud) {
  return check_k_condition(F, A, ellipticity_constant(A).nu, beta, gamma, cloud);
}

ConditionReport check_k_condition(const NonlinearOperator& F, const SymTensor4& A, double nu,
                                  double beta, double gamma, const SampleCloud& cloud) {
  if (!(beta > 0.0) || !(gamma > 0.0))
    throw PreconditionError("check_k_condition: beta and gamma must be positive");
  return k_condition(F, A, nu, beta, gamma, cloud,
                     [&F](const Vector& x) { return F.scaling(x); }, "k-condition",
                     {{"beta", beta}, {"gamma", gamma}, {"nu", nu}});
}

ConditionReport check_def1(const NonlinearOperator& F, const SymTensor4& A, double lambda,
                           double kappa, const SampleCloud& cloud) {
  if (!(lambda > kappa) || !(kappa > 0.0))
    throw PreconditionError("check_def1: need lambda > kappa > 0");
  require_cloud(cloud, A.dims(), "check_def1");
  require_same_dims(F.dims, A.dims(), "check_def1");
  const double nu = ellipticity_constant(A).nu;
  MarginTracker t;
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    const Vector AZ = contract_hess(A, cloud.Z[s]);
    const Vector Fxz = F(cloud.x[s], cloud.X[s] + cloud.Z[s]);
    const Vector Fx = F(cloud.x[s], cloud.X[s]);
    const double a = F.scaling(cloud.x[s]);
    const double nZ = frobenius(cloud.Z[s]);
    const double lam = lambda / a * AZ.squaredNorm();
    const double kap = kappa / a * nu * nu * nZ * nZ;
    t.add(s, {AZ.dot(Fxz - Fx) - lam + kap, AZ.norm() * (Fxz.norm() + Fx.norm()) + lam + kap});
  }
  return t.finish("def1", cloud.size(), {{"lambda", lambda}, {"kappa", kappa}, {"nu", nu}});
}

Margin campanato_tarsia_margin(const NonlinearOperator& F, double alpha, double beta, double gamma,
                              const Vector& x, const HessianValue& X, const HessianValue& Z) {
  const int N = Z.dims().N, n = Z.dims().n;
  Vector ZI(N);
  for (int a = 0; a < N; ++a) {
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += Z(a, i, i);
    ZI[a] = t;
  }
  const Vector Fxz = F(x, X + Z), Fx = F(x, X);
  const double normZ = frobenius(Z), nZI = ZI.norm();
  const double lhs = (ZI - alpha * (Fxz - Fx)).norm();
  return {beta * normZ + gamma * nZI - lhs, normZ + nZI + std::abs(alpha) * (Fxz.norm() + Fx.norm())};
}

ConditionReport check_campanato_tarsia(const NonlinearOperator& F, double alpha_const, double beta,
                                       double gamma, const SampleCloud& cloud) {
  if (!(alpha_const > 0.0)) throw PreconditionError("check_campanato_tarsia: alpha must be positive");
  if (!(beta > 0.0) || !(gamma > 0.0))
    throw PreconditionError("check_campanato_tarsia: beta and gamma must be positive");
  require_cloud(cloud, F.dims, "check_campanato_tarsia");
  MarginTracker t;
  for (std::size_t s = 0; s < cloud.size(); ++s)
    t.add(s, campanato_tarsia_margin(F, alpha_const, beta, gamma, cloud.x[s], cloud.X[s], cloud.Z[s]));
  return t.finish("campanato-tarsia", cloud.size(),
                  {{"alpha", alpha_const}, {"beta", beta}, {"gamma", gamma}});
}

TwoParameterFit fit_two_parameters(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<double>& c) {
  if (a.size() != b.size() || a.size() != c.size())
    throw DimensionError("fit_two_parameters: constraint arrays differ in length");
  TwoParameterFit fit;
  double beta_lo = 0.0, gamma_lo = 0.0;
  struct Line {
    double slope, intercept;  // gamma >= slope * beta + intercept
  };
  std::vector<Line> lines;
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (!(c[s] > 0.0)) continue;
    ++fit.active;
    if (a[s] > 0.0 && b[s] > 0.0) {
      lines.push_back({-a[s] / b[s], c[s] / b[s]});
    } else if (a[s] > 0.0) {
      beta_lo = std::max(beta_lo, c[s] / a[s]);
    } else if (b[s] > 0.0) {
      gamma_lo = std::max(gamma_lo, c[s] / b[s]);
    } else if (fit.anomaly.empty()) {
      fit.anomaly = "constraint " + std::to_string(s) + " has zero coefficients but positive bound";
    }
  }

  // Upper envelope, slopes ascending; on equal slopes only the highest line matters.
  std::sort(lines.begin(), lines.end(), [](const Line& l, const Line& r) {
    return l.slope < r.slope || (l.slope == r.slope && l.intercept > r.intercept);
  });
  std::vector<Line> hull;
  auto cross = [](const Line& l, const Line& r) {
    return (l.intercept - r.intercept) / (r.slope - l.slope);
  };
  for (const Line& l : lines) {
    if (!hull.empty() && hull.back().slope == l.slope) continue;
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], l) <= cross(hull[hull.size() - 2], hull.back()))
      hull.pop_back();
    hull.push_back(l);
  }

  auto envelope = [&](double beta) {
    double g = gamma_lo;
    for (const Line& l : hull) g = std::max(g, l.slope * beta + l.intercept);
    return g;
  };
  std::vector<double> candidates{beta_lo};
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) candidates.push_back(cross(hull[k], hull[k + 1]));
  for (const Line& l : hull) candidates.push_back((l.intercept - gamma_lo) / -l.slope);

  double best_beta = beta_lo, best_gamma = envelope(beta_lo);
  for (double beta : candidates) {
    if (!(beta >= beta_lo) || !std::isfinite(beta)) continue;
    const double gamma = envelope(beta);
    if (beta + gamma < best_beta + best_gamma) {
      best_beta = beta;
      best_gamma = gamma;
    }
  }
  fit.beta = std::max(best_beta, fit_floor);
  fit.gamma = std::max(best_gamma, fit_floor);
  fit.feasible = fit.anomaly.empty() && fit.beta + fit.gamma < 1.0;
  return fit;
}

TwoParameterFit fit_beta_gamma(const NonlinearOperator& F, const SymTensor4& A,
                               const SampleCloud& cloud) {
  require_cloud(cloud, A.dims(), "fit_beta_gamma");
  const double nu = ellipticity_constant(A).nu;
  std::vector<double> a(cloud.size()), b(cloud.size()), c(cloud.size());
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    const Vector AZ = contract_hess(A, cloud.Z[s]);
    const Vector dF = increment(F, cloud.x[s], cloud.X[s], cloud.Z[s]);
    a[s] = nu * frobenius(cloud.Z[s]);
    b[s] = AZ.norm();
    c[s] = (AZ - F.scaling(cloud.x[s]) * dF).norm();
  }
  return fit_two_parameters(a, b, c);
}

CTFit fit_campanato_tarsia(const NonlinearOperator& F, const SampleCloud& cloud,
                           const std::vector<double>& alphas) {
  if (alphas.empty()) throw PreconditionError("fit_campanato_tarsia: empty alpha grid");
  require_cloud(cloud, F.dims, "fit_campanato_tarsia");
  const SymTensor4 I = SymTensor4::identity(F.dims);
  std::vector<double> a(cloud.size()), b(cloud.size());
  std::vector<Vector> ZI(cloud.size()), dF(cloud.size());
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    ZI[s] = contract_hess(I, cloud.Z[s]);
    dF[s] = increment(F, cloud.x[s], cloud.X[s], cloud.Z[s]);
    a[s] = frobenius(cloud.Z[s]);
    b[s] = ZI[s].norm();
  }
  std::optional<CTFit> best;
  std::vector<double> c(cloud.size());
  for (double alpha : alphas) {
    if (!(alpha > 0.0)) throw PreconditionError("fit_campanato_tarsia: alphas must be positive");
    for (std::size_t s = 0; s < cloud.size(); ++s) c[s] = (ZI[s] - alpha * dF[s]).norm();
    const TwoParameterFit f = fit_two_parameters(a, b, c);
    if (!best || f.beta + f.gamma < best->fit.beta + best->fit.gamma) best = CTFit{alpha, f};
  }
  return *best;
}

double nu_FG(const NonlinearOperator& F, const NonlinearOperator& G, const SampleCloud& cloud) {
  require_same_dims(F.dims, G.dims, "nu_FG");
  require_cloud(cloud, F.dims, "nu_FG");
  double sup = 0.0;
  for (std::size_t s = 0; s < cloud.size(); ++s) {
    const Vector d = increment(F, cloud.x[s], cloud.X[s], cloud.Z[s]) -
                     increment(G, cloud.x[s], cloud.X[s], cloud.Z[s]);
    sup = std::max(sup, d.norm() / frobenius(cloud.Z[s]));
  }
  return sup;
}

nlohmann::json to_json(const ConditionReport& r, const SampleCloud* cloud) {
  nlohmann::json j = {{"condition", r.condition},           {"pass", r.pass},
                      {"worst_margin", r.worst_margin},     {"worst_absolute", r.worst_absolute},
                      {"samples", r.samples},               {"parameters", r.parameters}};
  if (r.witness) {
    nlohmann::json w = {{"index", *r.witness}};
    if (cloud) {
      w["x"] = to_json(cloud->x[*r.witness]);
      w["X"] = hessian_json(cloud->X[*r.witness]);
      w["Z"] = hessian_json(cloud->Z[*r.witness]);
    }
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const TwoParameterFit& f) {
  return {{"beta", f.beta},
          {"gamma", f.gamma},
          {"feasible", f.feasible},
          {"active_constraints", f.active},
          {"anomaly", f.anomaly.empty() ? nlohmann::json(nullptr) : nlohmann::json(f.anomaly)}};
}

}  // namespace hessiansys
