#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hessiansys/operator.hpp"
#include "hessiansys/sh_structure.hpp"

namespace hessiansys {

/// Constant-alpha (beta, gamma) pair offered as a Campanato-Tarsia candidate.
struct CTCandidate {
  double alpha = 1.0;
  double beta = 0.5;
  double gamma = 0.45;
};

/// Definition-1 parameters (lambda, kappa) known analytically for an entry.
struct Def1Parameters {
  double lambda = 1.0;
  double kappa = 0.5;
};

struct CatalogEntry {
  std::string id;
  std::string description;
  NonlinearOperator op;
  std::optional<ClosedFormField> solution;
  std::optional<SHDecomposition> sh;
  std::optional<CTCandidate> ct;
  std::optional<Def1Parameters> def1;
  nlohmann::json parameters;
};

struct CatalogListing {
  std::string id;
  std::string description;
};

std::vector<CatalogListing> catalog_list();

/// Builds entry `id`. `params` may override the documented numeric parameters;
/// unknown ids or parameter names throw PreconditionError. `lower` and `upper`
/// fix the box the manufactured solution vanishes on (unit box when empty).
CatalogEntry catalog_get(const std::string& id, const nlohmann::json& params = nlohmann::json::object(),
                         std::vector<double> lower = {}, std::vector<double> upper = {});

/// f(p) = F(x_p, D^2 u*(x_p)) with the analytic hessian of u*.
DiscreteField manufacture_rhs(const CatalogEntry& entry, const BoxDomain& dom);
/// u* sampled at the interior nodes.
DiscreteField manufactured_solution(const CatalogEntry& entry, const BoxDomain& dom);

/// prod_k sin(pi (x_k - lower_k) / (upper_k - lower_k)) in every component.
ClosedFormField sine_product(Dims dims, std::vector<double> lower, std::vector<double> upper);

/// B^1 = diag(1, 0), B^2 = diag(0, 2), A^1 = diag(1, 2), A^2 = diag(1, 3); nu = 1.
SHDecomposition sh_diag_example();

/// Linear tensor for N = n = 2, positive definite on R^{2x2} but with a
/// direction Z where Z:I and A:Z point in opposite half-spaces.
SymTensor4 strictly_convex_not_ct_tensor(double rho = 0.9, double D = 25.0);

/// (1, ..., 1) / sqrt(N).
Vector unit_diagonal(int N);

}  // namespace hessiansys
