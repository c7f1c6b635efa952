#pragma once

#include <functional>
#include <string>

#include "hessiansys/grid.hpp"
#include "hessiansys/tensor.hpp"

namespace hessiansys {

/// F(x, X) together with the scaling alpha(x) and the declared ellipticity data
/// (A, beta, gamma) under which the operator is claimed to be elliptic.
struct NonlinearOperator {
  using Evaluator = std::function<Vector(const Vector& x, const HessianValue& X)>;
  using Scaling = std::function<double(const Vector& x)>;

  std::string name;
  Dims dims;
  Evaluator F;
  Scaling alpha;  // empty means alpha = 1
  SymTensor4 A;
  double beta = 0.0;
  double gamma = 0.0;

  Vector operator()(const Vector& x, const HessianValue& X) const;
  double scaling(const Vector& x) const { return alpha ? alpha(x) : 1.0; }
};

/// Linear operator A:X with alpha = 1.
NonlinearOperator linear_operator(const SymTensor4& A, double beta = 1e-9, double gamma = 1e-9,
                                  std::string name = "linear");

/// Declared beta, gamma > 0 with beta + gamma < 1, and 0 < alpha < inf at
/// every node of dom. Throws PreconditionError otherwise.
void validate_operator(const NonlinearOperator& F, const BoxDomain& dom);

/// F(x_p, D_h^2 u(p)) at every interior node.
DiscreteField evaluate(const NonlinearOperator& F, const DiscreteField& u);
DiscreteField evaluate(const NonlinearOperator& F, const DiscreteHessian& H, const BoxDomain& dom);

/// Node-wise alpha(x_p) * f(p).
DiscreteField scale_by_alpha(const NonlinearOperator& F, const DiscreteField& f);

/// max and min of alpha over the nodes of dom.
double alpha_sup(const NonlinearOperator& F, const BoxDomain& dom);
double alpha_inf(const NonlinearOperator& F, const BoxDomain& dom);

/// Closed-form R^N-valued map with its analytic hessian.
struct ClosedFormField {
  Dims dims;
  std::function<Vector(const Vector&)> value;
  std::function<HessianValue(const Vector&)> hessian;
};

/// The operator (x, X) -> G(x, X + D^2 g(x)), used to move boundary data g
/// into the equation. A, beta and gamma are carried over unchanged.
NonlinearOperator homogenize_bc(const NonlinearOperator& G, const ClosedFormField& g);

}  // namespace hessiansys
