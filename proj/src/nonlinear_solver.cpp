#include "hessiansys/nonlinear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hessiansys/error.hpp"

namespace hessiansys {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + mid));
}

// Appends d to the history and throws once the recent ratios stop contracting.
void record_distance(std::vector<double>& distances, std::vector<double>& ratios, double d,
                     int window, const char* where) {
  if (!std::isfinite(d)) throw NonContractionError(std::string(where) + ": iterates diverged", d);
  if (!distances.empty() && distances.back() > 0.0) ratios.push_back(d / distances.back());
  distances.push_back(d);
  if (window > 0 && static_cast<int>(ratios.size()) >= window) {
    const double med = median(std::vector<double>(ratios.end() - window, ratios.end()));
    if (med > 1.0)
      throw NonContractionError(std::string(where) + ": median ratio " + std::to_string(med) +
                                    " over the last " + std::to_string(window) + " steps exceeds 1",
                                med);
  }
}

void require_field(const DiscreteField& f, const BoxDomain& dom, const Dims& d, const char* where) {
  if (f.components() != d.N || !(f.domain() == dom))
    throw DimensionError(std::string(where) + ": field does not match operator and domain");
}

DiscreteField sine_mode(const BoxDomain& dom, int N, int component, const std::array<int, 3>& k) {
  DiscreteField u(dom, N);
  for (std::size_t p = 0; p < dom.node_count(); ++p) {
    const Vector x = dom.point(p);
    double v = 1.0;
    for (int d = 0; d < dom.n(); ++d)
      v *= std::sin(k[d] * std::numbers::pi * (x[d] - dom.lower()[d]) /
                    (dom.upper()[d] - dom.lower()[d]));
    u(component, p) = v;
  }
  return u;
}

}  // namespace

IterationResult campanato_iterate(const NonlinearOperator& F, const DiscreteField& f,
                                  const BoxDomain& dom, const IterationOptions& opts,
                                  const DiscreteField* initial) {
  validate_operator(F, dom);
  require_field(f, dom, F.dims, "campanato_iterate");
  if (!(opts.tol > 0.0) || opts.max_iter < 1)
    throw PreconditionError("campanato_iterate: need tol > 0 and max_iter >= 1");
  if (!std::isfinite(l2_norm(f))) throw PreconditionError("campanato_iterate: f is not finite");

  const DirichletSolver solver(F.A, dom, opts.linear);
  const SparseMatrix& M = solver.matrix();
  const DiscreteField g = scale_by_alpha(F, f);
  const double root_volume = std::sqrt(dom.cell_volume());

  DiscreteField u(dom, F.dims.N);
  if (initial) {
    require_field(*initial, dom, F.dims, "campanato_iterate");
    u = *initial;
  }
  IterationReport rep;
  rep.contraction_constant = F.beta + F.gamma;
  bool converged = false;
  for (int k = 0; k < opts.max_iter; ++k) {
    const Vector Mu = M * u.values();
    const DiscreteField aF = scale_by_alpha(F, evaluate(F, u));
    DiscreteField rhs(dom, F.dims.N, Vector(Mu - aF.values() + g.values()));
    DiscreteField next = solver.solve(rhs);
    const double d = root_volume * (M * (next.values() - u.values())).norm();
    u = std::move(next);
    record_distance(rep.distances, rep.ratios, d, opts.guard_window, "campanato_iterate");
    if (d <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("campanato_iterate: no convergence within " +
                               std::to_string(opts.max_iter) + " iterations",
                           rep.distances.back());

  rep.iterations = static_cast<int>(rep.distances.size()) - 1;
  rep.median_ratio = median(rep.ratios);
  const DiscreteField Fu = evaluate(F, u);
  rep.residual = l2_norm(Fu - f);
  rep.fixed_point_residual = l2_norm(scale_by_alpha(F, Fu) - g);
  const double K = rep.contraction_constant;
  rep.apriori_bound = std::pow(K, rep.iterations) / (1.0 - K) * rep.distances.front();
  return {std::move(u), std::move(rep)};
}

double mesh_norm_constant(const BoxDomain& dom, int N, int random_probes, std::uint64_t seed) {
  std::vector<DiscreteField> probes;
  const int n = dom.n();
  const int modes = n == 2 ? 9 : 27;
  for (int c = 0; c < N; ++c)
    for (int t = 0; t < modes; ++t) {
      std::array<int, 3> k{1, 1, 1};
      for (int d = 0, r = t; d < n; ++d, r /= 3) k[d] = 1 + r % 3;
      probes.push_back(sine_mode(dom, N, c, k));
    }
  for (auto& p : random_probe_fields(dom, N, random_probes, seed)) probes.push_back(std::move(p));
  double c_mesh = 1.0;
  for (const auto& u : probes) {
    const DiscreteNorms nrm = discrete_norms(u);
    if (nrm.h2_semi > 0.0) c_mesh = std::max(c_mesh, nrm.h2() / nrm.h2_semi);
  }
  return c_mesh;
}

ComparisonResult comparison_check(const NonlinearOperator& F, const DiscreteField& w,
                                  const DiscreteField& v, double c_mesh) {
  require_field(v, w.domain(), F.dims, "comparison_check");
  require_field(w, w.domain(), F.dims, "comparison_check");
  ComparisonResult r;
  r.lhs = discrete_norms(w - v).h2();
  r.rhs = l2_norm(evaluate(F, w) - evaluate(F, v));
  const double nu = ellipticity_constant(F.A).nu;
  if (!(nu > 0.0)) throw PreconditionError("comparison_check: declared tensor is not elliptic");
  r.c_theory = alpha_sup(F, w.domain()) / (nu * (1.0 - F.beta - F.gamma));
  r.c_mesh = c_mesh;
  r.pass = r.lhs <= c_mesh * r.c_theory * r.rhs * (1.0 + 1e-12);
  return r;
}

ComparisonResult comparison_check(const NonlinearOperator& F, const DiscreteField& w,
                                  const DiscreteField& v) {
  return comparison_check(F, w, v, mesh_norm_constant(w.domain(), F.dims.N));
}

double estimate_nu_F(const NonlinearOperator& F, const BoxDomain& dom, int samples,
                     std::uint64_t seed) {
  if (samples < 1) throw PreconditionError("estimate_nu_F: samples must be >= 1");
  const auto probes = random_probe_fields(dom, F.dims.N, 2 * samples, seed);
  double est = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const DiscreteField& w = probes[2 * s];
    const DiscreteField& v = probes[2 * s + 1];
    const double den = hessian_l2_norm(discrete_hessian(w - v), dom);
    if (den == 0.0) continue;
    est = std::min(est, l2_norm(evaluate(F, w) - evaluate(F, v)) / den);
  }
  return est;
}

StabilityResult stability_solve(const NonlinearOperator& F, const NonlinearOperator& G,
                                const DiscreteField& g, const BoxDomain& dom,
                                const StabilityOptions& opts) {
  validate_operator(F, dom);
  require_same_dims(F.dims, G.dims, "stability_solve");
  require_field(g, dom, F.dims, "stability_solve");
  if (!(opts.tol > 0.0) || opts.max_iter < 1)
    throw PreconditionError("stability_solve: need tol > 0 and max_iter >= 1");

  StabilityResult res;
  const SampleCloud cloud =
      SampleCloud::generate(F.dims, opts.cloud_samples, opts.cloud_seed, dom.lower(), dom.upper());
  res.nu_FG = nu_FG(F, G, cloud);
  res.nu_F = estimate_nu_F(F, dom, opts.nu_F_samples);
  if (!(res.nu_FG < res.nu_F))
    throw PreconditionError("stability_solve: sampled nu(F,G) = " + std::to_string(res.nu_FG) +
                            " is not below sampled nu(F) = " + std::to_string(res.nu_F));

  DiscreteField u(dom, F.dims.N);
  DiscreteField Fu = evaluate(F, u);
  bool converged = false;
  for (int k = 0; k < opts.max_iter; ++k) {
    const DiscreteField h = Fu - (evaluate(G, u) - g);
    IterationResult inner = campanato_iterate(F, h, dom, opts.inner, &u);
    res.inner_iterations.push_back(inner.report.iterations);
    DiscreteField Fnext = evaluate(F, inner.u);
    const double d = l2_norm(Fnext - Fu);
    u = std::move(inner.u);
    Fu = std::move(Fnext);
    record_distance(res.distances, res.ratios, d, opts.guard_window, "stability_solve");
    if (d <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("stability_solve: no convergence within " +
                               std::to_string(opts.max_iter) + " outer iterations",
                           res.distances.back());
  res.iterations = static_cast<int>(res.distances.size()) - 1;
  res.median_ratio = median(res.ratios);
  res.residual = l2_norm(evaluate(G, u) - g);
  res.u = std::move(u);
  return res;
}

nlohmann::json to_json(const IterationReport& r) {
  return {{"iterations", r.iterations},
          {"distances", r.distances},
          {"ratios", r.ratios},
          {"median_ratio", r.median_ratio},
          {"residual", r.residual},
          {"fixed_point_residual", r.fixed_point_residual},
          {"contraction_constant", r.contraction_constant},
          {"apriori_bound", r.apriori_bound}};
}

nlohmann::json to_json(const ComparisonResult& r) {
  return {{"lhs", r.lhs},
          {"rhs", r.rhs},
          {"c_theory", r.c_theory},
          {"c_mesh", r.c_mesh},
          {"pass", r.pass}};
}

nlohmann::json to_json(const StabilityResult& r) {
  return {{"nu_FG", r.nu_FG},
          {"nu_F", r.nu_F},
          {"iterations", r.iterations},
          {"distances", r.distances},
          {"ratios", r.ratios},
          {"median_ratio", r.median_ratio},
          {"inner_iterations", r.inner_iterations},
          {"residual", r.residual}};
}

}  // namespace hessiansys
