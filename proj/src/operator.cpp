#include "hessiansys/operator.hpp"

#include <cmath>
#include <limits>

#include "hessiansys/error.hpp"
#include "hessiansys/parallel.hpp"

namespace hessiansys {

Vector NonlinearOperator::operator()(const Vector& x, const HessianValue& X) const {
  Vector v = F(x, X);
  if (v.size() != dims.N) throw DimensionError("operator '" + name + "' returned wrong size");
  return v;
}

NonlinearOperator linear_operator(const SymTensor4& A, double beta, double gamma,
                                  std::string name) {
  NonlinearOperator op;
  op.name = std::move(name);
  op.dims = A.dims();
  op.F = [A](const Vector&, const HessianValue& X) { return contract_hess(A, X); };
  op.A = A;
  op.beta = beta;
  op.gamma = gamma;
  return op;
}

void validate_operator(const NonlinearOperator& F, const BoxDomain& dom) {
  if (!F.F) throw PreconditionError("operator '" + F.name + "' has no evaluator");
  require_same_dims(F.dims, F.A.dims(), "validate_operator");
  if (F.dims.n != dom.n()) throw DimensionError("validate_operator: operator n differs from domain");
  if (!(F.beta > 0.0) || !(F.gamma > 0.0) || !(F.beta + F.gamma < 1.0))
    throw PreconditionError("operator '" + F.name + "': need beta, gamma > 0 and beta + gamma < 1");
  const double lo = alpha_inf(F, dom), hi = alpha_sup(F, dom);
  if (!(lo > 0.0) || !std::isfinite(hi))
    throw PreconditionError("operator '" + F.name + "': alpha must be positive and bounded");
}

DiscreteField evaluate(const NonlinearOperator& F, const DiscreteHessian& H, const BoxDomain& dom) {
  require_same_dims(F.dims, H.dims(), "evaluate");
  DiscreteField out(dom, F.dims.N);
  parallel_for(dom.node_count(), [&](std::size_t p) {
    out.set_node_value(p, F(dom.point(p), H.at(p)));
  });
  return out;
}

DiscreteField evaluate(const NonlinearOperator& F, const DiscreteField& u) {
  return evaluate(F, discrete_hessian(u), u.domain());
}

DiscreteField scale_by_alpha(const NonlinearOperator& F, const DiscreteField& f) {
  DiscreteField out = f;
  if (!F.alpha) return out;
  const BoxDomain& dom = f.domain();
  for (std::size_t p = 0; p < dom.node_count(); ++p) {
    const double a = F.alpha(dom.point(p));
    for (int c = 0; c < f.components(); ++c) out(c, p) *= a;
  }
  return out;
}

double alpha_sup(const NonlinearOperator& F, const BoxDomain& dom) {
  if (!F.alpha) return 1.0;
  double s = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < dom.node_count(); ++p) s = std::max(s, F.alpha(dom.point(p)));
  return s;
}

double alpha_inf(const NonlinearOperator& F, const BoxDomain& dom) {
  if (!F.alpha) return 1.0;
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < dom.node_count(); ++p) s = std::min(s, F.alpha(dom.point(p)));
  return s;
}

NonlinearOperator homogenize_bc(const NonlinearOperator& G, const ClosedFormField& g) {
  require_same_dims(G.dims, g.dims, "homogenize_bc");
  NonlinearOperator F = G;
  F.name = G.name + "+lift";
  F.F = [G, h = g.hessian](const Vector& x, const HessianValue& X) { return G.F(x, X + h(x)); };
  return F;
}

}  // namespace hessiansys
