#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hessiansys/tensor.hpp"

namespace hessiansys {

/// Axis-aligned box with m interior nodes per axis; spacing h_k = L_k / (m + 1).
///
/// Interior nodes are numbered lexicographically with the first axis fastest:
/// p = i_1 + m i_2 + m^2 i_3 with 0-based i_k in [0, m).
class BoxDomain {
public:
  BoxDomain() = default;
  BoxDomain(std::vector<double> lower, std::vector<double> upper, int m);
  static BoxDomain unit(int n, int m);

  int n() const noexcept { return static_cast<int>(lower_.size()); }
  int m() const noexcept { return m_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  double h(int k) const { return (upper_[k] - lower_[k]) / (m_ + 1); }
  double max_h() const;
  double cell_volume() const;
  std::size_t node_count() const noexcept { return nodes_; }

  std::array<int, 3> multi_index(std::size_t p) const;
  std::size_t linear_index(const std::array<int, 3>& idx) const;
  /// Physical coordinates of interior node p (idx_k + 1 steps from the lower corner).
  Vector point(std::size_t p) const;

  friend bool operator==(const BoxDomain&, const BoxDomain&) = default;

private:
  std::vector<double> lower_, upper_;
  int m_ = 0;
  std::size_t nodes_ = 0;
};

/// Values of an R^N-valued map at the interior nodes; boundary values are
/// implicitly zero. Storage is component-major: value(alpha, p) lives at
/// alpha * node_count + p.
class DiscreteField {
public:
  DiscreteField() = default;
  DiscreteField(BoxDomain domain, int N);
  DiscreteField(BoxDomain domain, int N, Vector values);

  const BoxDomain& domain() const noexcept { return domain_; }
  int components() const noexcept { return N_; }
  std::size_t node_count() const noexcept { return domain_.node_count(); }

  double operator()(int alpha, std::size_t p) const { return values_[alpha * nodes() + p]; }
  double& operator()(int alpha, std::size_t p) { return values_[alpha * nodes() + p]; }
  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }
  Vector node_value(std::size_t p) const;
  void set_node_value(std::size_t p, const Vector& v);

  DiscreteField& operator+=(const DiscreteField& o);
  DiscreteField& operator-=(const DiscreteField& o);
  DiscreteField& operator*=(double s);
  friend DiscreteField operator+(DiscreteField a, const DiscreteField& b) { return a += b; }
  friend DiscreteField operator-(DiscreteField a, const DiscreteField& b) { return a -= b; }
  friend DiscreteField operator*(double s, DiscreteField a) { return a *= s; }

  /// Samples f at every interior node.
  static DiscreteField sample(const BoxDomain& dom, int N,
                              const std::function<Vector(const Vector&)>& f);

private:
  Eigen::Index nodes() const { return static_cast<Eigen::Index>(domain_.node_count()); }
  void require_compatible(const DiscreteField& o, const char* where) const;

  BoxDomain domain_;
  int N_ = 0;
  Vector values_;
};

/// Per-node hessians produced by the finite-difference stencil.
class DiscreteHessian {
public:
  DiscreteHessian() = default;
  DiscreteHessian(Dims dims, std::size_t nodes);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t node_count() const noexcept { return nodes_; }
  HessianValue at(std::size_t p) const;
  double& entry(std::size_t p, int alpha, int i, int j) {
    return data_[((p * dims_.N + alpha) * dims_.n + i) * dims_.n + j];
  }
  double entry(std::size_t p, int alpha, int i, int j) const {
    return data_[((p * dims_.N + alpha) * dims_.n + i) * dims_.n + j];
  }

private:
  Dims dims_{};
  std::size_t nodes_ = 0;
  std::vector<double> data_;
};

/// Central differences: (u_{k+1} - 2u_k + u_{k-1}) / h^2 on the diagonal and the
/// four-point cross stencil / (4 h_i h_j) off it, with zero boundary values.
DiscreteHessian discrete_hessian(const DiscreteField& u);

/// Node-wise contraction A : D^2u, returned as a field.
DiscreteField contract_field(const SymTensor4& A, const DiscreteHessian& H, const BoxDomain& dom);

struct DiscreteNorms {
  double l2 = 0.0;
  double h1_semi = 0.0;  // forward differences, boundary edges included
  double h2_semi = 0.0;  // discrete_hessian
  double h2() const { return l2 + h1_semi + h2_semi; }
};

DiscreteNorms discrete_norms(const DiscreteField& u);
double l2_norm(const DiscreteField& u);
/// sqrt(h^n sum_p |H(p)|^2).
double hessian_l2_norm(const DiscreteHessian& H, const BoxDomain& dom);

/// Random zero-boundary probe fields: smooth sine-mode mixtures alternating
/// with node-wise uniform noise. Deterministic in seed.
std::vector<DiscreteField> random_probe_fields(const BoxDomain& dom, int N, int count,
                                               std::uint64_t seed);
/// Random smooth zero-boundary fields (sine modes up to frequency max_mode).
DiscreteField random_smooth_field(const BoxDomain& dom, int N, std::uint64_t seed,
                                  int max_mode = 4);

nlohmann::json to_json(const BoxDomain& dom);
BoxDomain box_from_json(const nlohmann::json& j);

/// CSV: one header line "# {json}" with domain, m, N, then "node,component,value" rows.
void write_field_csv(std::ostream& os, const DiscreteField& u);
DiscreteField read_field_csv(std::istream& is);

}  // namespace hessiansys
