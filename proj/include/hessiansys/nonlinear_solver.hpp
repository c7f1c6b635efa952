#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hessiansys/ellipticity_check.hpp"
#include "hessiansys/linear_solver.hpp"
#include "hessiansys/operator.hpp"

namespace hessiansys {

struct IterationOptions {
  double tol = 1e-10;
  int max_iter = 200;
  /// Non-contraction is declared when the median of the last `guard_window`
  /// ratios exceeds 1.
  int guard_window = 5;
  LinearSolverOptions linear;
};

struct IterationReport {
  int iterations = 0;
  std::vector<double> distances;  // d_k = ||A:D^2(u_{k+1} - u_k)||_{L^2}
  std::vector<double> ratios;     // d_{k+1} / d_k
  double median_ratio = 0.0;
  double residual = 0.0;             // ||F(., D^2u) - f||_{L^2}
  double fixed_point_residual = 0.0; // ||alpha F(., D^2u) - alpha f||_{L^2}
  double contraction_constant = 0.0; // declared beta + gamma
  double apriori_bound = 0.0;        // K^k / (1 - K) * d_0
};

struct IterationResult {
  DiscreteField u;
  IterationReport report;
};

/// Fixed-point iteration u_{k+1} = A^{-1}(A:D^2u_k - alpha F(., D^2u_k) + alpha f)
/// with zero Dirichlet data, started from zero or from `initial`.
IterationResult campanato_iterate(const NonlinearOperator& F, const DiscreteField& f,
                                  const BoxDomain& dom, const IterationOptions& opts = {},
                                  const DiscreteField* initial = nullptr);

/// max over probe fields of ||u||_{H^2} / ||D^2 u||_{L^2}. The probes are the
/// lowest sine modes of every component plus random fields from `seed`.
double mesh_norm_constant(const BoxDomain& dom, int N, int random_probes = 20,
                          std::uint64_t seed = 17);

struct ComparisonResult {
  double lhs = 0.0;       // ||w - v||_{H^2}
  double rhs = 0.0;       // ||F[w] - F[v]||_{L^2}
  double c_theory = 0.0;  // sup alpha / (nu (1 - beta - gamma))
  double c_mesh = 0.0;
  bool pass = true;       // lhs <= c_mesh c_theory rhs
};

ComparisonResult comparison_check(const NonlinearOperator& F, const DiscreteField& w,
                                  const DiscreteField& v, double c_mesh);
ComparisonResult comparison_check(const NonlinearOperator& F, const DiscreteField& w,
                                  const DiscreteField& v);

/// min over sampled field pairs of ||F[w] - F[v]||_{L^2} / ||D^2w - D^2v||_{L^2}.
/// An upper bound for the infimum it samples.
double estimate_nu_F(const NonlinearOperator& F, const BoxDomain& dom, int samples = 20,
                     std::uint64_t seed = 23);

struct StabilityOptions {
  double tol = 1e-9;
  int max_iter = 100;
  int guard_window = 5;
  IterationOptions inner;
  std::size_t cloud_samples = 10000;
  std::uint64_t cloud_seed = 1;
  int nu_F_samples = 20;
};

struct StabilityResult {
  DiscreteField u;
  double nu_FG = 0.0;
  double nu_F = 0.0;
  int iterations = 0;
  std::vector<double> distances;  // ||F[u_{k+1}] - F[u_k]||_{L^2}
  std::vector<double> ratios;
  double median_ratio = 0.0;
  std::vector<int> inner_iterations;
  double residual = 0.0;  // ||G[u] - g||_{L^2}
};

/// Solves G[u] = g through u_{k+1} = F^{-1}(F[u_k] - (G[u_k] - g)), each F^{-1}
/// an inner campanato_iterate solve. Refuses to start unless the sampled
/// nu(F, G) is below the sampled nu(F).
StabilityResult stability_solve(const NonlinearOperator& F, const NonlinearOperator& G,
                                const DiscreteField& g, const BoxDomain& dom,
                                const StabilityOptions& opts = {});

nlohmann::json to_json(const IterationReport& r);
nlohmann::json to_json(const ComparisonResult& r);
nlohmann::json to_json(const StabilityResult& r);

}  // namespace hessiansys
