#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hessiansys/operator.hpp"

namespace hessiansys {

/// Random (x, X, Z) triples standing in for "all X, Z and a.e. x".
///
/// Directions are uniform on the unit sphere of R^{Nn^2}_s (Frobenius norm),
/// radii cycle through 25 log-spaced values in [1e-3, 1e3]. Every eighth
/// sample has X = 0.
struct SampleCloud {
  std::uint64_t seed = 0;
  Dims dims;
  std::vector<Vector> x;
  std::vector<HessianValue> X;
  std::vector<HessianValue> Z;

  std::size_t size() const noexcept { return Z.size(); }

  /// Points x uniform in the box [lower, upper]; the unit box when both are empty.
  static SampleCloud generate(Dims dims, std::size_t count, std::uint64_t seed,
                              std::vector<double> lower = {}, std::vector<double> upper = {});
};

/// Uniformly distributed unit-Frobenius-norm hessian.
HessianValue random_unit_hessian(Dims dims, std::mt19937_64& rng);

struct ConditionReport {
  std::string condition;
  bool pass = true;
  /// min over samples of margin / scale; tiny negatives (>= -1e-12) are clipped to 0.
  double worst_margin = 0.0;
  double worst_absolute = 0.0;
  std::optional<std::size_t> witness;  // sample with the smallest relative margin
  std::size_t samples = 0;
  nlohmann::json parameters;
};

/// Relative round-off band treated as equality.
inline constexpr double margin_round_off = 1e-12;

struct Margin {
  double value = 0.0;  // absolute margin
  double scale = 0.0;  // magnitude the margin is compared against
};

/// beta nu |Z| + gamma |A:Z| - |A:Z - alpha (F(x,X+Z) - F(x,X))|.
Margin k_condition_margin(const NonlinearOperator& F, const SymTensor4& A, double nu, double beta,
                          double gamma, const Vector& x, const HessianValue& X,
                          const HessianValue& Z);

ConditionReport check_k_condition(const NonlinearOperator& F, const SymTensor4& A, double beta,
                                  double gamma, const SampleCloud& cloud);
/// Same with a precomputed nu(A).
ConditionReport check_k_condition(const NonlinearOperator& F, const SymTensor4& A, double nu,
                                  double beta, double gamma, const SampleCloud& cloud);

/// (A:Z).(F(x,X+Z) - F(x,X)) >= (lambda/alpha)|A:Z|^2 - (kappa/alpha) nu^2 |Z|^2.
ConditionReport check_def1(const NonlinearOperator& F, const SymTensor4& A, double lambda,
                           double kappa, const SampleCloud& cloud);

/// beta |Z| + gamma |Z:I| - |Z:I - alpha (F(x,X+Z) - F(x,X))|, with (Z:I)_a = tr Z_a.
Margin campanato_tarsia_margin(const NonlinearOperator& F, double alpha, double beta, double gamma,
                              const Vector& x, const HessianValue& X, const HessianValue& Z);

/// |Z:I - alpha (F(x,X+Z) - F(x,X))| <= beta |Z| + gamma |Z:I| with constant alpha.
ConditionReport check_campanato_tarsia(const NonlinearOperator& F, double alpha_const, double beta,
                                       double gamma, const SampleCloud& cloud);

/// Minimizer of beta + gamma over {beta, gamma >= 0 : a_s beta + b_s gamma >= c_s}.
struct TwoParameterFit {
  double beta = 0.0;
  double gamma = 0.0;
  bool feasible = false;      // beta + gamma < 1 and no anomaly
  std::string anomaly;        // non-empty when some constraint cannot be met
  std::size_t active = 0;     // constraints with c_s > 0
};

/// Exact solution over the sampled constraints: the lines with a_s, b_s > 0
/// are reduced to their upper envelope and the piecewise linear objective is
/// evaluated at every vertex. Results are floored at 1e-9.
TwoParameterFit fit_two_parameters(const std::vector<double>& a, const std::vector<double>& b,
                                   const std::vector<double>& c);

/// Smallest (beta, gamma) for which the sampled K-condition holds.
TwoParameterFit fit_beta_gamma(const NonlinearOperator& F, const SymTensor4& A,
                               const SampleCloud& cloud);

struct CTFit {
  double alpha = 0.0;
  TwoParameterFit fit;
};

/// Best Campanato-Tarsia (beta, gamma) over a grid of constant alphas.
CTFit fit_campanato_tarsia(const NonlinearOperator& F, const SampleCloud& cloud,
                           const std::vector<double>& alphas);

/// max over samples of |(F(x,X+Z) - F(x,X)) - (G(x,X+Z) - G(x,X))| / |Z|.
/// A lower bound for the supremum it samples.
double nu_FG(const NonlinearOperator& F, const NonlinearOperator& G, const SampleCloud& cloud);

nlohmann::json to_json(const ConditionReport& r, const SampleCloud* cloud = nullptr);
nlohmann::json to_json(const TwoParameterFit& f);

}  // namespace hessiansys
