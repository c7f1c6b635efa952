#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace hessiansys {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Spatial dimension n and number of components N.
struct Dims {
  int n = 2;
  int N = 1;

  friend bool operator==(const Dims&, const Dims&) = default;
};

void require_same_dims(const Dims& a, const Dims& b, const char* where);

/// Fourth-order coefficient tensor A_{alpha i beta j} with the major symmetry
/// A_{alpha i beta j} = A_{beta j alpha i}.
///
/// Entries are stored row-major in (alpha, i, beta, j), i.e. as the
/// Nn x Nn matrix with row index alpha*n + i and column index beta*n + j.
/// The constructor symmetrizes by averaging, so the symmetry is exact.
class SymTensor4 {
public:
  SymTensor4() = default;
  explicit SymTensor4(Dims dims);
  SymTensor4(Dims dims, std::vector<double> entries);

  /// Build from the Nn x Nn matrix form (symmetrized).
  static SymTensor4 from_matrix(Dims dims, const Matrix& m);
  /// delta_{alpha beta} delta_{ij}.
  static SymTensor4 identity(Dims dims);
  /// delta_{alpha beta} S_{ij} for a symmetric n x n matrix S.
  static SymTensor4 monotone(int N, const Matrix& S);

  const Dims& dims() const noexcept { return dims_; }
  double operator()(int alpha, int i, int beta, int j) const {
    return entries_[index(alpha, i, beta, j)];
  }
  const std::vector<double>& entries() const noexcept { return entries_; }
  Matrix as_matrix() const;

  /// Largest |A_{alpha i beta j} - A_{beta j alpha i}| of a raw entry array.
  static double max_asymmetry(Dims dims, const std::vector<double>& raw);

private:
  std::size_t index(int alpha, int i, int beta, int j) const {
    const std::size_t n = dims_.n, N = dims_.N;
    return ((static_cast<std::size_t>(alpha) * n + i) * N + beta) * n + j;
  }

  Dims dims_{};
  std::vector<double> entries_;
};

/// Point value X_{alpha ij} of a hessian, symmetric in (i, j).
/// Stored row-major in (alpha, i, j); the constructor symmetrizes.
class HessianValue {
public:
  HessianValue() = default;
  explicit HessianValue(Dims dims);
  HessianValue(Dims dims, std::vector<double> entries);

  /// Component alpha set to the symmetric n x n matrix blocks[alpha].
  static HessianValue from_blocks(const std::vector<Matrix>& blocks);

  const Dims& dims() const noexcept { return dims_; }
  double operator()(int alpha, int i, int j) const {
    return entries_[index(alpha, i, j)];
  }
  const std::vector<double>& entries() const noexcept { return entries_; }
  Matrix block(int alpha) const;

  HessianValue& operator+=(const HessianValue& o);
  HessianValue& operator-=(const HessianValue& o);
  HessianValue& operator*=(double s);
  friend HessianValue operator+(HessianValue a, const HessianValue& b) { return a += b; }
  friend HessianValue operator-(HessianValue a, const HessianValue& b) { return a -= b; }
  friend HessianValue operator*(double s, HessianValue a) { return a *= s; }

private:
  std::size_t index(int alpha, int i, int j) const {
    const std::size_t n = dims_.n;
    return (static_cast<std::size_t>(alpha) * n + i) * n + j;
  }

  Dims dims_{};
  std::vector<double> entries_;
};

/// (A:Z)_alpha = sum_{i,beta,j} A_{alpha i beta j} Z_{beta ij}.
Vector contract_hess(const SymTensor4& A, const HessianValue& Z);

/// sum A_{alpha i beta j} eta_alpha a_i eta_beta a_j.
double rank_one_form(const SymTensor4& A, const Vector& eta, const Vector& a);

/// The N x N matrix M(a)_{alpha beta} = sum_{ij} A_{alpha i beta j} a_i a_j.
Matrix acoustic_matrix(const SymTensor4& A, const Vector& a);

struct EllipticityResult {
  double nu = 0.0;
  Vector argmin_eta;
  Vector argmin_a;
  double tolerance = 0.0;
};

/// nu(A) = min over unit (eta, a) of the rank-one form.
///
/// The inner minimum over eta is the smallest eigenvalue of M(a); the outer
/// minimum over the unit sphere in R^n is a dense scan (n = 2: 3600 angles
/// on a half circle, n >= 3: 10^4 quasi-uniform points) followed by local
/// refinement. The result may be <= 0; that is reported, not thrown.
EllipticityResult ellipticity_constant(const SymTensor4& A, double tol = 1e-8);

struct RankOnePositivity {
  bool positive = false;
  EllipticityResult ellipticity;
};

/// positive iff nu(A) > tol; ellipticity.argmin_* is the witness otherwise.
RankOnePositivity is_rank_one_positive(const SymTensor4& A, double tol = 1e-8);

double frobenius(const HessianValue& X);
double frobenius4(const SymTensor4& A);

/// {"n":..,"N":..,"entries":[...]} in (alpha, i, beta, j) row-major order.
nlohmann::json to_json(const SymTensor4& A);
/// Rejects input whose asymmetry exceeds 1e-12.
SymTensor4 tensor_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Vector& v);

}  // namespace hessiansys
