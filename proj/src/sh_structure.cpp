#include "hessiansys/sh_structure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hessiansys/error.hpp"

namespace hessiansys {

namespace {

struct RangeBasis {
  Matrix basis;              // N x rank, orthonormal columns
  Vector range_eigenvalues;  // eigenvalues on the range, ascending
};

RangeBasis range_of(const Matrix& B) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(B);
  const Vector& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const double threshold = 1e-9 * scale;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (scale > 0.0 && std::abs(ev[k]) > threshold) keep.push_back(k);
  RangeBasis rb;
  rb.basis.resize(B.rows(), static_cast<Eigen::Index>(keep.size()));
  rb.range_eigenvalues.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    rb.basis.col(c) = es.eigenvectors().col(keep[c]);
    rb.range_eigenvalues[c] = ev[keep[c]];
  }
  return rb;
}

Matrix b_sum(const SHDecomposition& dec) {
  Matrix S = Matrix::Zero(dec.dims.N, dec.dims.N);
  for (const Matrix& B : dec.B) S += B;
  return S;
}

}  // namespace

double min_eigenvalue(const Matrix& S) {
  if (S.size() == 0) throw DimensionError("min_eigenvalue: empty matrix");
  if (S.rows() == 1) return S(0, 0);
  return Eigen::SelfAdjointEigenSolver<Matrix>(S, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

void validate_shape(const SHDecomposition& dec) {
  if (dec.dims.n < 1 || dec.dims.N < 1) throw DimensionError("SH: invalid dims");
  if (dec.B.empty() || dec.B.size() != dec.A.size())
    throw DimensionError("SH: B and A lists must be non-empty and of equal length");
  for (const Matrix& B : dec.B)
    if (B.rows() != dec.dims.N || B.cols() != dec.dims.N)
      throw DimensionError("SH: every B^g must be N x N");
  for (const Matrix& A : dec.A)
    if (A.rows() != dec.dims.n || A.cols() != dec.dims.n)
      throw DimensionError("SH: every A^g must be n x n");
}

SymTensor4 assemble(const SHDecomposition& dec) {
  validate_shape(dec);
  const int n = dec.dims.n, N = dec.dims.N;
  std::vector<double> e(static_cast<std::size_t>(n) * N * n * N, 0.0);
  std::size_t k = 0;
  for (int a = 0; a < N; ++a)
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < N; ++b)
        for (int j = 0; j < n; ++j, ++k) {
          double s = 0.0;
          for (std::size_t g = 0; g < dec.B.size(); ++g) s += dec.B[g](a, b) * dec.A[g](i, j);
          e[k] = s;
        }
  return SymTensor4(dec.dims, std::move(e));
}

SHReport verify_sh(const SHDecomposition& dec, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("verify_sh: tol must be > 0");
  validate_shape(dec);
  SHReport r;
  r.tolerance = tol;
  const std::size_t K = dec.B.size();
  const int n = dec.dims.n;

  for (std::size_t g = 0; g < K; ++g)
    for (std::size_t d = 0; d < K; ++d)
      if (g != d)
        r.orthogonality_residual =
            std::max(r.orthogonality_residual, (dec.B[g] * dec.B[d]).cwiseAbs().maxCoeff());
  r.orthogonal = r.orthogonality_residual <= tol;

  r.sum_min_eigenvalue = min_eigenvalue(b_sum(dec));
  r.sum_positive = r.sum_min_eigenvalue > tol;

  r.a_min_eigenvalue = min_eigenvalue(dec.A.front());
  for (const Matrix& A : dec.A) r.a_min_eigenvalue = std::min(r.a_min_eigenvalue, min_eigenvalue(A));
  r.a_positive = r.a_min_eigenvalue > tol;

  Matrix stack(static_cast<Eigen::Index>(K) * n, n);
  for (std::size_t g = 0; g < K; ++g)
    stack.block(static_cast<Eigen::Index>(g) * n, 0, n, n) =
        dec.A[g] - min_eigenvalue(dec.A[g]) * Matrix::Identity(n, n);
  const double stack_norm = stack.norm();
  Eigen::JacobiSVD<Matrix> svd(stack, Eigen::ComputeFullV);
  const Eigen::Index last = svd.singularValues().size() - 1;
  r.common_direction_residual = svd.singularValues()[last];
  r.common_direction = r.common_direction_residual <= 1e-9 * stack_norm;
  if (r.common_direction) r.common_eigendirection = svd.matrixV().col(n - 1);

  r.pass = r.orthogonal && r.sum_positive && r.a_positive && r.common_direction;
  return r;
}

SHDecomposition rescale_common_lambda(const SHDecomposition& dec) {
  validate_shape(dec);
  SHDecomposition out = dec;
  for (std::size_t g = 0; g < dec.A.size(); ++g) {
    const double c = min_eigenvalue(dec.A[g]);
    if (!(c > 0.0)) {
      std::ostringstream os;
      os << "rescale_common_lambda: lambda_1(A^" << g + 1 << ") = " << c << " is not positive";
      throw PreconditionError(os.str());
    }
    out.B[g] = c * dec.B[g];
    out.A[g] = dec.A[g] / c;
  }
  return out;
}

double nu_from_sh(const SHDecomposition& dec, double tol) {
  validate_shape(dec);
  double lo = min_eigenvalue(dec.A.front()), hi = lo;
  for (const Matrix& A : dec.A) {
    const double l = min_eigenvalue(A);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  if (hi - lo > tol * std::max(1.0, std::abs(hi))) {
    std::ostringstream os;
    os << "nu_from_sh: lambda_1(A^g) range [" << lo << ", " << hi
       << "] is not common; apply rescale_common_lambda first";
    throw PreconditionError(os.str());
  }
  return lo * min_eigenvalue(b_sum(dec));
}

std::vector<Matrix> range_projections(const SHDecomposition& dec) {
  validate_shape(dec);
  std::vector<Matrix> P;
  Eigen::Index total_rank = 0;
  for (const Matrix& B : dec.B) {
    const RangeBasis rb = range_of(B);
    total_rank += rb.basis.cols();
    P.push_back(rb.basis * rb.basis.transpose());
  }
  if (total_rank != dec.dims.N) {
    std::ostringstream os;
    os << "range_projections: ranks of B^g sum to " << total_rank << ", expected N = "
       << dec.dims.N;
    throw PreconditionError(os.str());
  }
  return P;
}

MinRangeIdentity min_range_quadratic_identity(const SHDecomposition& dec) {
  validate_shape(dec);
  MinRangeIdentity r;
  r.lhs = min_eigenvalue(b_sum(dec));
  bool any = false;
  for (const Matrix& B : dec.B) {
    const RangeBasis rb = range_of(B);
    if (rb.range_eigenvalues.size() == 0) continue;
    const double m = rb.range_eigenvalues.minCoeff();
    r.rhs = any ? std::min(r.rhs, m) : m;
    any = true;
  }
  return r;
}

nlohmann::json to_json(const SHDecomposition& dec) {
  nlohmann::json B = nlohmann::json::array(), A = nlohmann::json::array();
  for (const Matrix& m : dec.B) B.push_back(to_json(m));
  for (const Matrix& m : dec.A) A.push_back(to_json(m));
  return {{"n", dec.dims.n}, {"N", dec.dims.N}, {"B", B}, {"A", A}};
}

SHDecomposition sh_from_json(const nlohmann::json& j) {
  try {
    SHDecomposition dec;
    dec.dims = {j.at("n").get<int>(), j.at("N").get<int>()};
    for (const auto& m : j.at("B")) dec.B.push_back(matrix_from_json(m));
    for (const auto& m : j.at("A")) dec.A.push_back(matrix_from_json(m));
    validate_shape(dec);
    return dec;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("SH decomposition JSON: ") + e.what());
  }
}

nlohmann::json to_json(const SHReport& r) {
  nlohmann::json j = {
      {"pass", r.pass},
      {"tolerance", r.tolerance},
      {"conditions",
       {{"range_orthogonality", {{"pass", r.orthogonal}, {"residual", r.orthogonality_residual}}},
        {"sum_positive_definite", {{"pass", r.sum_positive}, {"residual", r.sum_min_eigenvalue}}},
        {"a_positive_definite", {{"pass", r.a_positive}, {"residual", r.a_min_eigenvalue}}},
        {"common_first_eigendirection",
         {{"pass", r.common_direction}, {"residual", r.common_direction_residual}}}}}};
  if (r.common_eigendirection) j["common_eigendirection"] = to_json(*r.common_eigendirection);
  return j;
}

}  // namespace hessiansys
