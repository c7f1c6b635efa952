#include "hessiansys/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hessiansys/error.hpp"

namespace hessiansys {

void require_same_dims(const Dims& a, const Dims& b, const char* where) {
  if (a != b) {
    std::ostringstream os;
    os << where << ": incompatible dims (n=" << a.n << ", N=" << a.N << ") vs (n=" << b.n
       << ", N=" << b.N << ")";
    throw DimensionError(os.str());
  }
}

namespace {

void require_valid(const Dims& d) {
  if (d.n < 1 || d.N < 1) throw DimensionError("dims require n >= 1 and N >= 1");
}

std::size_t tensor_size(const Dims& d) {
  const std::size_t nN = static_cast<std::size_t>(d.n) * d.N;
  return nN * nN;
}

}  // namespace

// ---------------------------------------------------------------------------
// SymTensor4

SymTensor4::SymTensor4(Dims dims) : dims_(dims) {
  require_valid(dims);
  entries_.assign(tensor_size(dims), 0.0);
}

SymTensor4::SymTensor4(Dims dims, std::vector<double> entries)
    : dims_(dims), entries_(std::move(entries)) {
  require_valid(dims);
  if (entries_.size() != tensor_size(dims))
    throw DimensionError("SymTensor4: entry count does not match N*n*N*n");
  const std::size_t size = static_cast<std::size_t>(dims.n) * dims.N;
  for (std::size_t r = 0; r < size; ++r) {
    for (std::size_t c = r + 1; c < size; ++c) {
      const double mean = 0.5 * (entries_[r * size + c] + entries_[c * size + r]);
      entries_[r * size + c] = mean;
      entries_[c * size + r] = mean;
    }
  }
}

SymTensor4 SymTensor4::from_matrix(Dims dims, const Matrix& m) {
  const Eigen::Index size = static_cast<Eigen::Index>(dims.n) * dims.N;
  if (m.rows() != size || m.cols() != size)
    throw DimensionError("SymTensor4::from_matrix: matrix must be Nn x Nn");
  std::vector<double> e(tensor_size(dims));
  for (Eigen::Index r = 0; r < size; ++r)
    for (Eigen::Index c = 0; c < size; ++c) e[r * size + c] = m(r, c);
  return SymTensor4(dims, std::move(e));
}

SymTensor4 SymTensor4::identity(Dims dims) {
  const int size = dims.n * dims.N;
  return from_matrix(dims, Matrix::Identity(size, size));
}

SymTensor4 SymTensor4::monotone(int N, const Matrix& S) {
  if (S.rows() != S.cols()) throw DimensionError("SymTensor4::monotone: S must be square");
  const Dims dims{static_cast<int>(S.rows()), N};
  Matrix m = Matrix::Zero(dims.n * N, dims.n * N);
  for (int a = 0; a < N; ++a) m.block(a * dims.n, a * dims.n, dims.n, dims.n) = S;
  return from_matrix(dims, m);
}

Matrix SymTensor4::as_matrix() const {
  const int size = dims_.n * dims_.N;
  Matrix m(size, size);
  for (int r = 0; r < size; ++r)
    for (int c = 0; c < size; ++c) m(r, c) = entries_[static_cast<std::size_t>(r) * size + c];
  return m;
}

double SymTensor4::max_asymmetry(Dims dims, const std::vector<double>& raw) {
  const std::size_t size = static_cast<std::size_t>(dims.n) * dims.N;
  if (raw.size() != size * size) throw DimensionError("max_asymmetry: entry count mismatch");
  double worst = 0.0;
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = r + 1; c < size; ++c)
      worst = std::max(worst, std::abs(raw[r * size + c] - raw[c * size + r]));
  return worst;
}

// ---------------------------------------------------------------------------
// HessianValue

HessianValue::HessianValue(Dims dims) : dims_(dims) {
  require_valid(dims);
  entries_.assign(static_cast<std::size_t>(dims.N) * dims.n * dims.n, 0.0);
}

HessianValue::HessianValue(Dims dims, std::vector<double> entries)
    : dims_(dims), entries_(std::move(entries)) {
  require_valid(dims);
  if (entries_.size() != static_cast<std::size_t>(dims.N) * dims.n * dims.n)
    throw DimensionError("HessianValue: entry count does not match N*n*n");
  for (int a = 0; a < dims.N; ++a) {
    for (int i = 0; i < dims.n; ++i) {
      for (int j = i + 1; j < dims.n; ++j) {
        const double mean = 0.5 * (entries_[index(a, i, j)] + entries_[index(a, j, i)]);
        entries_[index(a, i, j)] = mean;
        entries_[index(a, j, i)] = mean;
      }
    }
  }
}

HessianValue HessianValue::from_blocks(const std::vector<Matrix>& blocks) {
  if (blocks.empty()) throw DimensionError("HessianValue::from_blocks: no components");
  const int n = static_cast<int>(blocks.front().rows());
  const Dims dims{n, static_cast<int>(blocks.size())};
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(dims.N) * n * n);
  for (const Matrix& b : blocks) {
    if (b.rows() != n || b.cols() != n)
      throw DimensionError("HessianValue::from_blocks: blocks must all be n x n");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) e.push_back(b(i, j));
  }
  return HessianValue(dims, std::move(e));
}

Matrix HessianValue::block(int alpha) const {
  Matrix m(dims_.n, dims_.n);
  for (int i = 0; i < dims_.n; ++i)
    for (int j = 0; j < dims_.n; ++j) m(i, j) = (*this)(alpha, i, j);
  return m;
}

HessianValue& HessianValue::operator+=(const HessianValue& o) {
  require_same_dims(dims_, o.dims_, "HessianValue::operator+=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] += o.entries_[k];
  return *this;
}

HessianValue& HessianValue::operator-=(const HessianValue& o) {
  require_same_dims(dims_, o.dims_, "HessianValue::operator-=");
  for (std::size_t k = 0; k < entries_.size(); ++k) entries_[k] -= o.entries_[k];
  return *this;
}

HessianValue& HessianValue::operator*=(double s) {
  for (double& e : entries_) e *= s;
  return *this;
}

// ---------------------------------------------------------------------------
// Contractions

Vector contract_hess(const SymTensor4& A, const HessianValue& Z) {
  require_same_dims(A.dims(), Z.dims(), "contract_hess");
  const int n = A.dims().n, N = A.dims().N;
  Vector v = Vector::Zero(N);
  for (int a = 0; a < N; ++a) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int b = 0; b < N; ++b)
        for (int j = 0; j < n; ++j) s += A(a, i, b, j) * Z(b, i, j);
    v[a] = s;
  }
  return v;
}

Matrix acoustic_matrix(const SymTensor4& A, const Vector& a) {
  const int n = A.dims().n, N = A.dims().N;
  if (a.size() != n) throw DimensionError("acoustic_matrix: |a| must equal n");
  Matrix M(N, N);
  for (int al = 0; al < N; ++al) {
    for (int be = 0; be < N; ++be) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += A(al, i, be, j) * a[i] * a[j];
      M(al, be) = s;
    }
  }
  return M;
}

double rank_one_form(const SymTensor4& A, const Vector& eta, const Vector& a) {
  if (eta.size() != A.dims().N || a.size() != A.dims().n)
    throw DimensionError("rank_one_form: vector sizes must match (N, n)");
  return eta.dot(acoustic_matrix(A, a) * eta);
}

namespace {

struct InnerMin {
  double value;
  Vector eta;
};

// Smallest eigenvalue of M(a)/|a|^2 with its eigenvector. Diagonal M(a) is
// read off directly so that e.g. the identity tensor yields exactly 1.
InnerMin inner_minimum(const SymTensor4& A, const Vector& a) {
  const Matrix M = acoustic_matrix(A, a);
  const double aa = a.dot(a);
  const int N = static_cast<int>(M.rows());
  bool diagonal = true;
  for (int r = 0; r < N && diagonal; ++r)
    for (int c = 0; c < N; ++c)
      if (r != c && M(r, c) != 0.0) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    Eigen::Index k = 0;
    M.diagonal().minCoeff(&k);
    Vector eta = Vector::Zero(N);
    eta[k] = 1.0;
    return {M(k, k) / aa, eta};
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  return {es.eigenvalues()[0] / aa, es.eigenvectors().col(0)};
}

double inner_value(const SymTensor4& A, const Vector& a) { return inner_minimum(A, a).value; }

Vector circle_point(double theta) {
  Vector a(2);
  a << std::cos(theta), std::sin(theta);
  return a;
}

struct Candidate {
  double value;
  Vector a;
};

// Golden-section refinement of theta -> inner_value on [lo, hi].
Candidate refine_circle(const SymTensor4& A, double lo, double hi, double tol) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
  double f1 = inner_value(A, circle_point(x1)), f2 = inner_value(A, circle_point(x2));
  while (hi - lo > tol) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = inner_value(A, circle_point(x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = inner_value(A, circle_point(x2));
    }
  }
  return f1 < f2 ? Candidate{f1, circle_point(x1)} : Candidate{f2, circle_point(x2)};
}

// Pattern search on the unit sphere in tangent directions.
Candidate refine_sphere(const SymTensor4& A, Candidate start, double step) {
  const int n = static_cast<int>(start.a.size());
  Vector w = start.a.normalized();
  double fw = start.value;
  while (step > 1e-10) {
    // Tangent basis: the last n-1 columns of a Householder Q with first column w.
    Eigen::HouseholderQR<Matrix> qr(w);
    const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
    bool improved = false;
    for (int k = 1; k < n && !improved; ++k) {
      for (double sign : {1.0, -1.0}) {
        Vector trial = (w + sign * step * Q.col(k)).normalized();
        const double ft = inner_value(A, trial);
        if (ft < fw) {
          w = trial;
          fw = ft;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return {fw, w};
}

std::vector<Vector> sphere_samples(int n) {
  std::vector<Vector> pts;
  if (n == 3) {
    constexpr int count = 20000;  // full sphere, i.e. 10^4 per antipodal half
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / count;
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vector a(3);
      a << r * std::cos(golden * k), r * std::sin(golden * k), z;
      pts.push_back(a);
    }
    return pts;
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  const int count = 10000 * (n - 1);
  pts.reserve(count);
  for (int k = 0; k < count; ++k) {
    Vector a(n);
    for (int i = 0; i < n; ++i) a[i] = g(rng);
    pts.push_back(a.normalized());
  }
  return pts;
}

}  // namespace

EllipticityResult ellipticity_constant(const SymTensor4& A, double tol) {
  if (!(tol > 0.0)) throw PreconditionError("ellipticity_constant: tol must be > 0");
  const int n = A.dims().n;
  Candidate best{0.0, Vector()};

  if (n == 1) {
    Vector a(1);
    a << 1.0;
    best = {inner_value(A, a), a};
  } else if (n == 2) {
    constexpr int samples = 3600;
    const double dtheta = std::numbers::pi / samples;
    std::vector<double> values(samples);
    for (int k = 0; k < samples; ++k) values[k] = inner_value(A, circle_point(k * dtheta));
    // Cyclic local minima of the scan, best first.
    std::vector<int> minima;
    for (int k = 0; k < samples; ++k) {
      const double prev = values[(k + samples - 1) % samples];
      const double next = values[(k + 1) % samples];
      if (values[k] <= prev && values[k] <= next) minima.push_back(k);
    }
    std::sort(minima.begin(), minima.end(),
              [&](int l, int r) { return values[l] < values[r] || (values[l] == values[r] && l < r); });
    if (minima.size() > 8) minima.resize(8);
    best = {values[minima.front()], circle_point(minima.front() * dtheta)};
    for (int k : minima) {
      if (values[k] < best.value) best = {values[k], circle_point(k * dtheta)};
      Candidate c = refine_circle(A, (k - 1) * dtheta, (k + 1) * dtheta, 1e-11);
      if (c.value < best.value) best = c;
    }
  } else {
    const std::vector<Vector> pts = sphere_samples(n);
    std::vector<double> values(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) values[k] = inner_value(A, pts[k]);
    std::vector<std::size_t> order(pts.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    const std::size_t keep = std::min<std::size_t>(8, order.size());
    std::partial_sort(order.begin(), order.begin() + keep, order.end(), [&](auto l, auto r) {
      return values[l] < values[r] || (values[l] == values[r] && l < r);
    });
    best = {values[order.front()], pts[order.front()]};
    for (std::size_t c = 0; c < keep; ++c) {
      Candidate r = refine_sphere(A, {values[order[c]], pts[order[c]]}, 0.03);
      if (r.value < best.value) best = r;
    }
  }

  EllipticityResult res;
  res.argmin_a = best.a.normalized();
  res.argmin_eta = inner_minimum(A, best.a).eta.normalized();
  res.nu = best.value;
  res.tolerance = tol;
  return res;
}

RankOnePositivity is_rank_one_positive(const SymTensor4& A, double tol) {
  RankOnePositivity r;
  r.ellipticity = ellipticity_constant(A, tol);
  r.positive = r.ellipticity.nu > tol;
  return r;
}

double frobenius(const HessianValue& X) {
  double s = 0.0;
  for (double e : X.entries()) s += e * e;
  return std::sqrt(s);
}

double frobenius4(const SymTensor4& A) {
  double s = 0.0;
  for (double e : A.entries()) s += e * e;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const SymTensor4& A) {
  return {{"n", A.dims().n}, {"N", A.dims().N}, {"entries", A.entries()}};
}

SymTensor4 tensor_from_json(const nlohmann::json& j) {
  try {
    const Dims dims{j.at("n").get<int>(), j.at("N").get<int>()};
    auto raw = j.at("entries").get<std::vector<double>>();
    const double asym = SymTensor4::max_asymmetry(dims, raw);
    if (asym > 1e-12) {
      std::ostringstream os;
      os << "tensor JSON violates major symmetry (max asymmetry " << asym << ")";
      throw FormatError(os.str());
    }
    return SymTensor4(dims, std::move(raw));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("tensor JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  try {
    const auto rows = j.get<std::vector<std::vector<double>>>();
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows.front().size()) throw FormatError("ragged matrix in JSON");
      for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("matrix JSON: ") + e.what());
  }
}

nlohmann::json to_json(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace hessiansys
