#pragma once

#include <memory>
#include <string>

#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "hessiansys/grid.hpp"
#include "hessiansys/tensor.hpp"

namespace hessiansys {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Matrix of u -> A : D_h^2 u on the interior nodes. Row alpha * m^n + p.
SparseMatrix assemble_operator(const SymTensor4& A, const BoxDomain& dom);

/// Matrix-free equivalent of assemble_operator(A, dom) * u.
DiscreteField apply_operator(const SymTensor4& A, const DiscreteField& u);

enum class SolveMethod { automatic, direct, iterative };

struct LinearSolverOptions {
  double tol = 1e-10;
  int max_iter = 2000;
  SolveMethod method = SolveMethod::automatic;
  /// automatic picks the direct factorization up to this many unknowns.
  std::size_t direct_limit = 20000;
};

struct LinearSolveReport {
  double relative_residual = 0.0;
  int iterations = 0;
  std::string method;
  DiscreteNorms norms;
};

/// Factorizes the Dirichlet problem once and solves for many right-hand sides.
class DirichletSolver {
public:
  DirichletSolver(const SymTensor4& A, const BoxDomain& dom, LinearSolverOptions opts = {});
  ~DirichletSolver();
  DirichletSolver(DirichletSolver&&) noexcept;
  DirichletSolver& operator=(DirichletSolver&&) noexcept;

  /// Throws ConvergenceError when the residual contract cannot be met.
  DiscreteField solve(const DiscreteField& f, LinearSolveReport* report = nullptr) const;

  const SymTensor4& tensor() const noexcept { return A_; }
  const BoxDomain& domain() const noexcept { return dom_; }
  const SparseMatrix& matrix() const noexcept { return M_; }
  bool uses_direct() const noexcept { return direct_; }

private:
  struct Impl;
  SymTensor4 A_;
  BoxDomain dom_;
  LinearSolverOptions opts_;
  SparseMatrix M_;
  bool direct_ = true;
  std::unique_ptr<Impl> impl_;
};

std::pair<DiscreteField, LinearSolveReport> solve_dirichlet(const SymTensor4& A,
                                                            const DiscreteField& f,
                                                            const BoxDomain& dom,
                                                            LinearSolverOptions opts = {});

/// ||u||_{H^2} / ||f||_{L^2}; zero when f and u both vanish.
double apriori_estimate_check(const DiscreteField& u, const DiscreteField& f, const SymTensor4& A);

nlohmann::json to_json(const LinearSolveReport& r);

}  // namespace hessiansys
