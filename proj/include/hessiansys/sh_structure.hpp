#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "hessiansys/tensor.hpp"

namespace hessiansys {

/// A = sum_g B^g (x) A^g with B^g symmetric N x N and A^g symmetric n x n,
/// i.e. A_{alpha i beta j} = sum_g B^g_{alpha beta} A^g_{ij}.
struct SHDecomposition {
  Dims dims;
  std::vector<Matrix> B;
  std::vector<Matrix> A;
};

/// Outcome of checking the four structural conditions. Residuals:
///   orthogonality    max_{g != d} max |B^g B^d|        (pass if <= tol)
///   sum_positivity   lambda_min(B^1 + ... + B^K)        (pass if > tol)
///   a_positivity     min_g lambda_min(A^g)              (pass if > tol)
///   common_direction smallest singular value of the stacked (A^g - lambda_1(A^g) I)
///                    (pass if <= 1e-9 * |stack|)
struct SHReport {
  bool pass = false;
  bool orthogonal = false;
  bool sum_positive = false;
  bool a_positive = false;
  bool common_direction = false;
  double orthogonality_residual = 0.0;
  double sum_min_eigenvalue = 0.0;
  double a_min_eigenvalue = 0.0;
  double common_direction_residual = 0.0;
  std::optional<Vector> common_eigendirection;
  double tolerance = 0.0;
};

void validate_shape(const SHDecomposition& dec);

SymTensor4 assemble(const SHDecomposition& dec);
SHReport verify_sh(const SHDecomposition& dec, double tol = 1e-10);

/// {c_g B^g, A^g / c_g} with c_g = lambda_1(A^g): every rescaled A^g has
/// smallest eigenvalue 1 and the assembled tensor is unchanged.
SHDecomposition rescale_common_lambda(const SHDecomposition& dec);

/// (min_g lambda_min(A^g)) * lambda_min(sum_g B^g). Requires the common-lambda
/// normalization: throws if the lambda_1(A^g) differ by more than tol (relative).
double nu_from_sh(const SHDecomposition& dec, double tol = 1e-10);

/// Orthogonal projections onto R(B^g). Rank is read off at the eigenvalue
/// threshold 1e-9 * max |lambda(B^g)|; B^g = 0 yields the zero projection.
/// Throws if the ranks do not add up to N.
std::vector<Matrix> range_projections(const SHDecomposition& dec);

struct MinRangeIdentity {
  double lhs = 0.0;  // lambda_min(sum_g B^g)
  double rhs = 0.0;  // min_g smallest eigenvalue of B^g restricted to R(B^g)
};
MinRangeIdentity min_range_quadratic_identity(const SHDecomposition& dec);

double min_eigenvalue(const Matrix& S);

nlohmann::json to_json(const SHDecomposition& dec);
SHDecomposition sh_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SHReport& r);

}  // namespace hessiansys
