#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hessiansys/error.hpp"
#include "hessiansys/nonlinear_solver.hpp"
#include "hessiansys/operator_catalog.hpp"

using namespace hessiansys;

namespace {

const Dims d22{2, 2};

DiscreteField linear_baseline(const CatalogEntry& e, const BoxDomain& dom) {
  const DiscreteField f = apply_operator(e.op.A, manufactured_solution(e, dom));
  return solve_dirichlet(e.op.A, f, dom).first;
}

double baseline_error(const BoxDomain& dom) {
  const CatalogEntry lin = catalog_get("linear-laplace");
  DiscreteField exact = manufactured_solution(lin, dom);
  const DiscreteField f = manufacture_rhs(lin, dom);
  return l2_norm(solve_dirichlet(lin.op.A, f, dom).first - exact);
}

NonlinearOperator sin_perturbed(const NonlinearOperator& F, double amp) {
  NonlinearOperator G = F;
  const Vector e = unit_diagonal(F.dims.N);
  G.name = "sin-perturbed";
  G.F = [base = F.F, e, amp](const Vector& x, const HessianValue& X) -> Vector {
    return base(x, X) + amp * std::sin(frobenius(X)) * e;
  };
  return G;
}

}  // namespace

TEST_CASE("linear operators converge in a single step") {
  const BoxDomain dom = BoxDomain::unit(2, 16);
  const CatalogEntry e = catalog_get("linear-laplace");
  const DiscreteField f = manufacture_rhs(e, dom);
  const IterationResult r = campanato_iterate(e.op, f, dom);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.distances.back() <= 1e-10);
  const DiscreteField lin = solve_dirichlet(e.op.A, f, dom).first;
  CHECK((r.u - lin).values().norm() <= 1e-9 * lin.values().norm());
}

TEST_CASE("tanh-perturbed operator contracts and recovers the manufactured solution") {
  const BoxDomain dom = BoxDomain::unit(2, 32);
  const CatalogEntry e = catalog_get("tanh-perturbed");
  CHECK(e.op.beta == doctest::Approx(0.2));
  const IterationResult r = campanato_iterate(e.op, manufacture_rhs(e, dom), dom);
  CHECK(r.report.median_ratio <= 0.25);
  CHECK(r.report.residual <= 1e-8);
  CHECK(r.report.fixed_point_residual <= 2 * 1e-10 * 1.01);
  const double err = l2_norm(r.u - manufactured_solution(e, dom));
  CHECK(err <= 2 * baseline_error(dom));
  const double d0 = r.report.distances.front();
  CHECK(r.report.iterations <= std::ceil(std::log(1e-10 / d0) / std::log(0.25)) + 5);
  for (double q : r.report.ratios) CHECK(std::isfinite(q));
  const double K = r.report.contraction_constant;
  CHECK(K == doctest::Approx(0.2));
  CHECK(r.report.apriori_bound ==
        doctest::Approx(std::pow(K, r.report.iterations) / (1 - K) * d0));

  const BoxDomain coarse = BoxDomain::unit(2, 16);
  const double e16 = l2_norm(campanato_iterate(e.op, manufacture_rhs(e, coarse), coarse).u -
                             manufactured_solution(e, coarse));
  CHECK(e16 / err >= 3.5);
  CHECK(e16 / err <= 4.5);
}

TEST_CASE("f = F(., 0) has the zero solution") {
  const BoxDomain dom = BoxDomain::unit(2, 12);
  const CatalogEntry e = catalog_get("tanh-plus-sin");
  const DiscreteField f = evaluate(e.op, DiscreteField(dom, 2));
  const IterationResult r = campanato_iterate(e.op, f, dom);
  CHECK(r.u.values().norm() == 0.0);
}

TEST_CASE("boundary lifting") {
  const SymTensor4 A = SymTensor4::identity(d22);
  const NonlinearOperator G = linear_operator(A, 0.1, 0.2, "lin");
  ClosedFormField zero{d22, [](const Vector&) -> Vector { return Vector::Zero(2); },
                       [](const Vector&) { return HessianValue(d22); }};
  const NonlinearOperator F0 = homogenize_bc(G, zero);
  HessianValue X(d22, {1, 2, 2, 3, -1, 0.5, 0.5, 4});
  const Vector x = Vector::Constant(2, 0.3);
  CHECK(F0(x, X) == G(x, X));
  CHECK(F0.beta == G.beta);
  CHECK(F0.gamma == G.gamma);
  CHECK(F0.A.entries() == G.A.entries());

  // g = (x1^2 + x2^2, x1 x2): the shift adds A:D^2g = (4, 0).
  ClosedFormField g{d22,
                    [](const Vector& p) -> Vector {
                      Vector v(2);
                      v << p[0] * p[0] + p[1] * p[1], p[0] * p[1];
                      return v;
                    },
                    [](const Vector&) { return HessianValue(d22, {2, 0, 0, 2, 0, 1, 1, 0}); }};
  const NonlinearOperator F = homogenize_bc(G, g);
  const Vector shift = F(x, X) - G(x, X);
  CHECK(shift[0] == doctest::Approx(4.0));
  CHECK(shift[1] == doctest::Approx(0.0));

  // Solve F[w] = rhs with zero data; u = w + g then solves G[u] = rhs with data g.
  const BoxDomain dom = BoxDomain::unit(2, 10);
  const DiscreteField rhs = random_smooth_field(dom, 2, 5);
  const DiscreteField w = campanato_iterate(F, rhs, dom).u;
  const DiscreteField gs = DiscreteField::sample(dom, 2, g.value);
  // (A : D_h^2(g) with exact boundary values) equals (4, 0) since g is quadratic.
  const DiscreteField Gw = apply_operator(A, w);
  for (std::size_t p = 0; p < dom.node_count(); ++p) {
    CHECK(Gw(0, p) + 4.0 == doctest::Approx(rhs(0, p)).epsilon(1e-8));
    CHECK(Gw(1, p) == doctest::Approx(rhs(1, p)).epsilon(1e-8));
  }
  CHECK(gs.values().norm() > 0.0);
}

TEST_CASE("an operator violating the declared contraction is rejected") {
  const SymTensor4 A = SymTensor4::identity(d22);
  NonlinearOperator F = linear_operator(A, 0.5, 0.4, "tripled");
  F.F = [A](const Vector&, const HessianValue& X) -> Vector { return 3.0 * contract_hess(A, X); };
  const BoxDomain dom = BoxDomain::unit(2, 10);
  CHECK_THROWS_AS(campanato_iterate(F, random_smooth_field(dom, 2, 1), dom), NonContractionError);
  NonlinearOperator bad = F;
  bad.beta = 0.7;
  CHECK_THROWS_AS(campanato_iterate(bad, random_smooth_field(dom, 2, 1), dom), PreconditionError);
}

TEST_CASE("iteration limit raises a convergence error") {
  const BoxDomain dom = BoxDomain::unit(2, 12);
  const CatalogEntry e = catalog_get("tanh-perturbed");
  IterationOptions opts;
  opts.max_iter = 2;
  CHECK_THROWS_AS(campanato_iterate(e.op, manufacture_rhs(e, dom), dom, opts), ConvergenceError);
}

TEST_CASE("comparison estimate") {
  const BoxDomain dom = BoxDomain::unit(2, 16);
  const double c_mesh = mesh_norm_constant(dom, 2);
  CHECK(c_mesh >= 1.0);
  const CatalogEntry lin = catalog_get("linear-laplace");
  const CatalogEntry tanh = catalog_get("tanh-perturbed");
  const DiscreteField w0 = random_smooth_field(dom, 2, 3);
  const ComparisonResult same = comparison_check(lin.op, w0, w0, c_mesh);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
  CHECK(same.pass);
  CHECK(same.c_theory == doctest::Approx(1.0 / (1 - 2e-9)));
  const auto probes = random_probe_fields(dom, 2, 100, 61);
  for (int k = 0; k < 50; ++k) {
    const ComparisonResult a = comparison_check(lin.op, probes[2 * k], probes[2 * k + 1], c_mesh);
    CHECK(a.pass);
    CHECK(a.lhs <= c_mesh * a.rhs * (1 + 1e-8));
    const ComparisonResult b = comparison_check(tanh.op, probes[2 * k], probes[2 * k + 1], c_mesh);
    CHECK(b.pass);
    CHECK(b.c_theory == doctest::Approx(1.0 / 0.8));
  }
}

TEST_CASE("sampled nu(F) bounds and homogeneity") {
  const BoxDomain dom = BoxDomain::unit(2, 16);
  const CatalogEntry lin = catalog_get("linear-laplace");
  const double nu = estimate_nu_F(lin.op, dom);
  CHECK(nu >= 1 - 10 * dom.max_h());
  CHECK(nu <= frobenius4(lin.op.A) + 1e-12);
  NonlinearOperator twice = lin.op;
  twice.F = [A = lin.op.A](const Vector&, const HessianValue& X) -> Vector {
    return 2.0 * contract_hess(A, X);
  };
  CHECK(estimate_nu_F(twice, dom) == doctest::Approx(2 * nu).epsilon(1e-12));
  CHECK_THROWS_AS(estimate_nu_F(lin.op, dom, 0), PreconditionError);
}

TEST_CASE("stability transfer") {
  const BoxDomain dom = BoxDomain::unit(2, 32);
  const CatalogEntry e = catalog_get("tanh-perturbed");
  const NonlinearOperator& F = e.op;
  const ClosedFormField& ustar = *e.solution;
  auto rhs_for = [&](const NonlinearOperator& G) {
    DiscreteField g(dom, 2);
    for (std::size_t p = 0; p < dom.node_count(); ++p) {
      const Vector x = dom.point(p);
      g.set_node_value(p, G(x, ustar.hessian(x)));
    }
    return g;
  };

  SUBCASE("G = F needs one outer step") {
    const StabilityResult r = stability_solve(F, F, rhs_for(F), dom);
    CHECK(r.iterations == 1);
    CHECK(r.nu_FG == 0.0);
  }
  SUBCASE("small perturbation is absorbed") {
    const NonlinearOperator G = sin_perturbed(F, 0.05);
    const StabilityResult r = stability_solve(F, G, rhs_for(G), dom);
    CHECK(r.nu_FG <= 0.05 + 1e-12);
    CHECK(r.nu_FG < r.nu_F);
    CHECK(r.median_ratio <= 0.05 / r.nu_F + 0.05);
    CHECK(r.residual <= 1e-8);
    CHECK(l2_norm(r.u - manufactured_solution(e, dom)) <= 2 * baseline_error(dom));
  }
  SUBCASE("large perturbation is refused before iterating") {
    const NonlinearOperator G = sin_perturbed(F, 2.0);
    CHECK_THROWS_AS(stability_solve(F, G, rhs_for(G), dom), PreconditionError);
  }
}

TEST_CASE("uniqueness from different initial guesses") {
  const BoxDomain dom = BoxDomain::unit(2, 16);
  const CatalogEntry e = catalog_get("tanh-plus-sin");
  const DiscreteField f = manufacture_rhs(e, dom);
  const DiscreteField start = 5.0 * random_smooth_field(dom, 2, 77);
  IterationOptions opts;
  const IterationResult a = campanato_iterate(e.op, f, dom, opts);
  const IterationResult b = campanato_iterate(e.op, f, dom, opts, &start);
  CHECK(discrete_norms(a.u - b.u).h2() <= 10 * opts.tol);
}

TEST_CASE("observed a-priori constant is stable under refinement") {
  const CatalogEntry e = catalog_get("tanh-perturbed");
  std::vector<double> c;
  for (int m : {16, 32, 64}) {
    const BoxDomain dom = BoxDomain::unit(2, m);
    const DiscreteField f = manufacture_rhs(e, dom);
    const DiscreteField u = campanato_iterate(e.op, f, dom).u;
    c.push_back(discrete_norms(u).h2() / l2_norm(f));
  }
  for (double v : c) CHECK(v == doctest::Approx(c[0]).epsilon(0.2));
}

TEST_CASE("reports serialize") {
  const BoxDomain dom = BoxDomain::unit(2, 8);
  const CatalogEntry e = catalog_get("tanh-perturbed");
  const IterationResult r = campanato_iterate(e.op, manufacture_rhs(e, dom), dom);
  const nlohmann::json j = to_json(r.report);
  CHECK(j.at("iterations") == r.report.iterations);
  CHECK(j.at("distances").size() == r.report.distances.size());
  CHECK(r.report.distances.size() == static_cast<std::size_t>(r.report.iterations) + 1);
  CHECK(linear_baseline(e, dom).values().size() == r.u.values().size());
}
