#include "hessiansys/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hessiansys/error.hpp"

namespace hessiansys {

namespace {

using Triplet = Eigen::Triplet<double>;

// Neighbour of node idx shifted by the given per-axis offsets, or -1 when it
// falls on the boundary.
long neighbour(const BoxDomain& dom, std::array<int, 3> idx, int i, int di, int j, int dj) {
  idx[i] += di;
  idx[j] += dj;
  for (int k = 0; k < dom.n(); ++k)
    if (idx[k] < 0 || idx[k] >= dom.m()) return -1;
  return static_cast<long>(dom.linear_index(idx));
}

// Stencil of D^2_{ij} at a node as (neighbour node, weight) pairs.
std::vector<std::pair<long, double>> stencil(const BoxDomain& dom, std::size_t p, int i, int j) {
  const auto idx = dom.multi_index(p);
  std::vector<std::pair<long, double>> out;
  if (i == j) {
    const double w = 1.0 / (dom.h(i) * dom.h(i));
    out.emplace_back(static_cast<long>(p), -2.0 * w);
    out.emplace_back(neighbour(dom, idx, i, 1, i, 0), w);
    out.emplace_back(neighbour(dom, idx, i, -1, i, 0), w);
  } else {
    const double w = 1.0 / (4.0 * dom.h(i) * dom.h(j));
    out.emplace_back(neighbour(dom, idx, i, 1, j, 1), w);
    out.emplace_back(neighbour(dom, idx, i, 1, j, -1), -w);
    out.emplace_back(neighbour(dom, idx, i, -1, j, 1), -w);
    out.emplace_back(neighbour(dom, idx, i, -1, j, -1), w);
  }
  return out;
}

SparseMatrix scalar_negative_laplacian(const BoxDomain& dom) {
  const long nodes = static_cast<long>(dom.node_count());
  std::vector<Triplet> trips;
  trips.reserve(nodes * (2 * dom.n() + 1));
  for (long p = 0; p < nodes; ++p)
    for (int i = 0; i < dom.n(); ++i)
      for (const auto& [q, w] : stencil(dom, p, i, i))
        if (q >= 0) trips.emplace_back(p, q, -w);
  SparseMatrix L(nodes, nodes);
  L.setFromTriplets(trips.begin(), trips.end());
  return L;
}

// Component-wise c_alpha * Laplacian, inverted through a Cholesky factor of -Delta_h.
class LaplacePreconditioner {
public:
  LaplacePreconditioner() = default;

  void configure(std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> lap,
                 std::vector<double> scale, Eigen::Index nodes) {
    lap_ = std::move(lap);
    scale_ = std::move(scale);
    nodes_ = nodes;
  }

  template <typename M>
  LaplacePreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  LaplacePreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  LaplacePreconditioner& compute(const M&) { return *this; }

  template <typename Rhs>
  Vector solve(const Rhs& b) const {
    Vector z(b.size());
    for (std::size_t a = 0; a < scale_.size(); ++a) {
      const Eigen::Index off = static_cast<Eigen::Index>(a) * nodes_;
      z.segment(off, nodes_) = -lap_->solve(Vector(b.segment(off, nodes_))) / scale_[a];
    }
    return z;
  }

  Eigen::ComputationInfo info() { return Eigen::Success; }

private:
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> lap_;
  std::vector<double> scale_;
  Eigen::Index nodes_ = 0;
};

double relative_residual(const SparseMatrix& M, const Vector& x, const Vector& b) {
  const double nb = b.norm();
  return nb == 0.0 ? (M * x).norm() : (M * x - b).norm() / nb;
}

}  // namespace

SparseMatrix assemble_operator(const SymTensor4& A, const BoxDomain& dom) {
  const Dims d = A.dims();
  if (d.n != dom.n()) throw DimensionError("assemble_operator: tensor n differs from domain n");
  const long nodes = static_cast<long>(dom.node_count());
  std::vector<Triplet> trips;
  for (long p = 0; p < nodes; ++p) {
    for (int a = 0; a < d.N; ++a) {
      const long row = a * nodes + p;
      for (int b = 0; b < d.N; ++b) {
        for (int i = 0; i < d.n; ++i) {
          for (int j = i; j < d.n; ++j) {
            const double c = i == j ? A(a, i, b, j) : A(a, i, b, j) + A(a, j, b, i);
            if (c == 0.0) continue;
            for (const auto& [q, w] : stencil(dom, p, i, j))
              if (q >= 0) trips.emplace_back(row, b * nodes + q, c * w);
          }
        }
      }
    }
  }
  SparseMatrix M(d.N * nodes, d.N * nodes);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

DiscreteField apply_operator(const SymTensor4& A, const DiscreteField& u) {
  if (A.dims().N != u.components()) throw DimensionError("apply_operator: component mismatch");
  return contract_field(A, discrete_hessian(u), u.domain());
}

struct DirichletSolver::Impl {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  Eigen::BiCGSTAB<SparseMatrix, LaplacePreconditioner> krylov;
};

DirichletSolver::DirichletSolver(const SymTensor4& A, const BoxDomain& dom, LinearSolverOptions opts)
    : A_(A), dom_(dom), opts_(opts), impl_(std::make_unique<Impl>()) {
  if (!(opts_.tol > 0.0)) throw PreconditionError("DirichletSolver: tol must be positive");
  if (opts_.max_iter < 1) throw PreconditionError("DirichletSolver: max_iter must be >= 1");
  M_ = assemble_operator(A_, dom_);
  const std::size_t unknowns = static_cast<std::size_t>(M_.rows());
  {
    Vector row_mass = Vector::Zero(M_.rows());
    for (Eigen::Index k = 0; k < M_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(M_, k); it; ++it) row_mass[it.row()] += std::abs(it.value());
    if ((row_mass.array() == 0.0).any())
      throw SingularSystemError("DirichletSolver: assembled system has an empty row");
  }
  direct_ = opts_.method == SolveMethod::direct ||
            (opts_.method == SolveMethod::automatic && unknowns <= opts_.direct_limit);
  if (direct_) {
    impl_->lu.compute(M_);
    if (impl_->lu.info() != Eigen::Success)
      throw SingularSystemError("DirichletSolver: assembled system is singular: " +
                                impl_->lu.lastErrorMessage());
    return;
  }
  auto lap = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(scalar_negative_laplacian(dom_));
  if (lap->info() != Eigen::Success)
    throw SingularSystemError("DirichletSolver: Laplacian preconditioner factorization failed");
  const Dims d = A_.dims();
  std::vector<double> scale(d.N);
  for (int a = 0; a < d.N; ++a) {
    double t = 0.0;
    for (int i = 0; i < d.n; ++i) t += A_(a, i, a, i);
    scale[a] = t > 0.0 ? t / d.n : 1.0;
  }
  impl_->krylov.preconditioner().configure(lap, std::move(scale),
                                           static_cast<Eigen::Index>(dom_.node_count()));
  impl_->krylov.compute(M_);
  impl_->krylov.setMaxIterations(opts_.max_iter);
  impl_->krylov.setTolerance(0.5 * opts_.tol);
}

DirichletSolver::~DirichletSolver() = default;
DirichletSolver::DirichletSolver(DirichletSolver&&) noexcept = default;
DirichletSolver& DirichletSolver::operator=(DirichletSolver&&) noexcept = default;

DiscreteField DirichletSolver::solve(const DiscreteField& f, LinearSolveReport* report) const {
  if (f.components() != A_.dims().N || !(f.domain() == dom_))
    throw DimensionError("DirichletSolver::solve: right-hand side lives on a different grid");
  const Vector& b = f.values();
  Vector x = Vector::Zero(b.size());
  int iterations = 0;
  double res = 0.0;
  constexpr int refinements = 3;
  if (b.norm() > 0.0) {
    if (direct_) {
      x = impl_->lu.solve(b);
      iterations = 1;
      res = relative_residual(M_, x, b);
      for (int r = 0; r < refinements && res > opts_.tol; ++r) {
        x += impl_->lu.solve(Vector(b - M_ * x));
        ++iterations;
        res = relative_residual(M_, x, b);
      }
    } else {
      res = 1.0;
      for (int r = 0; r <= refinements && res > opts_.tol; ++r) {
        x = impl_->krylov.solveWithGuess(b, x);
        iterations += static_cast<int>(impl_->krylov.iterations());
        res = relative_residual(M_, x, b);
      }
    }
    if (!std::isfinite(res)) throw SingularSystemError("DirichletSolver: non-finite solution");
    if (res > opts_.tol)
      throw ConvergenceError("DirichletSolver: relative residual " + std::to_string(res) +
                                 " exceeds tolerance",
                             res);
  }
  DiscreteField u(dom_, f.components(), std::move(x));
  if (report) {
    report->relative_residual = res;
    report->iterations = iterations;
    report->method = direct_ ? "sparse-lu" : "bicgstab-laplace";
    report->norms = discrete_norms(u);
  }
  return u;
}

std::pair<DiscreteField, LinearSolveReport> solve_dirichlet(const SymTensor4& A,
                                                            const DiscreteField& f,
                                                            const BoxDomain& dom,
                                                            LinearSolverOptions opts) {
  DirichletSolver solver(A, dom, opts);
  LinearSolveReport report;
  DiscreteField u = solver.solve(f, &report);
  return {std::move(u), report};
}

double apriori_estimate_check(const DiscreteField& u, const DiscreteField& f, const SymTensor4& A) {
  require_same_dims(A.dims(), Dims{u.domain().n(), u.components()}, "apriori_estimate_check");
  const double nf = l2_norm(f);
  const double nu = discrete_norms(u).h2();
  if (nf == 0.0) {
    if (nu == 0.0) return 0.0;
    throw PreconditionError("apriori_estimate_check: f = 0 but u != 0");
  }
  return nu / nf;
}

nlohmann::json to_json(const LinearSolveReport& r) {
  return {{"relative_residual", r.relative_residual},
          {"iterations", r.iterations},
          {"method", r.method},
          {"norms",
           {{"l2", r.norms.l2},
            {"h1_semi", r.norms.h1_semi},
            {"h2_semi", r.norms.h2_semi},
            {"h2", r.norms.h2()}}}};
}

}  // namespace hessiansys
