#include "hessiansys/grid.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "hessiansys/error.hpp"

namespace hessiansys {

// ---------------------------------------------------------------------------
// BoxDomain

BoxDomain::BoxDomain(std::vector<double> lower, std::vector<double> upper, int m)
    : lower_(std::move(lower)), upper_(std::move(upper)), m_(m) {
  if (lower_.size() != upper_.size()) throw DimensionError("BoxDomain: corner sizes differ");
  if (n() < 2 || n() > 3) throw PreconditionError("BoxDomain: n must be 2 or 3");
  if (m_ < 3) throw PreconditionError("BoxDomain: m must be >= 3");
  for (int k = 0; k < n(); ++k)
    if (!(upper_[k] > lower_[k])) throw PreconditionError("BoxDomain: upper must exceed lower");
  nodes_ = 1;
  for (int k = 0; k < n(); ++k) nodes_ *= static_cast<std::size_t>(m_);
}

BoxDomain BoxDomain::unit(int n, int m) {
  return BoxDomain(std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), m);
}

double BoxDomain::max_h() const {
  double h_max = 0.0;
  for (int k = 0; k < n(); ++k) h_max = std::max(h_max, h(k));
  return h_max;
}

double BoxDomain::cell_volume() const {
  double v = 1.0;
  for (int k = 0; k < n(); ++k) v *= h(k);
  return v;
}

std::array<int, 3> BoxDomain::multi_index(std::size_t p) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < n(); ++k) {
    idx[k] = static_cast<int>(p % m_);
    p /= m_;
  }
  return idx;
}

std::size_t BoxDomain::linear_index(const std::array<int, 3>& idx) const {
  std::size_t p = 0;
  for (int k = n() - 1; k >= 0; --k) p = p * m_ + idx[k];
  return p;
}

Vector BoxDomain::point(std::size_t p) const {
  const auto idx = multi_index(p);
  Vector x(n());
  for (int k = 0; k < n(); ++k) x[k] = lower_[k] + (idx[k] + 1) * h(k);
  return x;
}

// ---------------------------------------------------------------------------
// DiscreteField

DiscreteField::DiscreteField(BoxDomain domain, int N)
    : domain_(std::move(domain)), N_(N),
      values_(Vector::Zero(static_cast<Eigen::Index>(domain_.node_count()) * N)) {
  if (N < 1) throw DimensionError("DiscreteField: N must be >= 1");
}

DiscreteField::DiscreteField(BoxDomain domain, int N, Vector values)
    : domain_(std::move(domain)), N_(N), values_(std::move(values)) {
  if (N < 1) throw DimensionError("DiscreteField: N must be >= 1");
  if (values_.size() != static_cast<Eigen::Index>(domain_.node_count()) * N)
    throw DimensionError("DiscreteField: value count must be m^n * N");
  if (!values_.allFinite()) throw PreconditionError("DiscreteField: non-finite value");
}

Vector DiscreteField::node_value(std::size_t p) const {
  Vector v(N_);
  for (int a = 0; a < N_; ++a) v[a] = (*this)(a, p);
  return v;
}

void DiscreteField::set_node_value(std::size_t p, const Vector& v) {
  for (int a = 0; a < N_; ++a) (*this)(a, p) = v[a];
}

void DiscreteField::require_compatible(const DiscreteField& o, const char* where) const {
  if (N_ != o.N_ || !(domain_ == o.domain_))
    throw DimensionError(std::string(where) + ": fields live on different grids");
}

DiscreteField& DiscreteField::operator+=(const DiscreteField& o) {
  require_compatible(o, "DiscreteField::operator+=");
  values_ += o.values_;
  return *this;
}

DiscreteField& DiscreteField::operator-=(const DiscreteField& o) {
  require_compatible(o, "DiscreteField::operator-=");
  values_ -= o.values_;
  return *this;
}

DiscreteField& DiscreteField::operator*=(double s) {
  values_ *= s;
  return *this;
}

DiscreteField DiscreteField::sample(const BoxDomain& dom, int N,
                                    const std::function<Vector(const Vector&)>& f) {
  DiscreteField u(dom, N);
  for (std::size_t p = 0; p < dom.node_count(); ++p) {
    const Vector v = f(dom.point(p));
    if (v.size() != N) throw DimensionError("DiscreteField::sample: f returned wrong size");
    u.set_node_value(p, v);
  }
  return u;
}

// ---------------------------------------------------------------------------
// DiscreteHessian

DiscreteHessian::DiscreteHessian(Dims dims, std::size_t nodes)
    : dims_(dims), nodes_(nodes),
      data_(nodes * static_cast<std::size_t>(dims.N) * dims.n * dims.n, 0.0) {}

HessianValue DiscreteHessian::at(std::size_t p) const {
  const std::size_t block = static_cast<std::size_t>(dims_.N) * dims_.n * dims_.n;
  return HessianValue(dims_, std::vector<double>(data_.begin() + p * block,
                                                 data_.begin() + (p + 1) * block));
}

namespace {

// Value of component alpha at interior multi-index idx shifted by (di, dj) along
// axes (i, j); zero when the shifted index is a boundary node.
double shifted(const DiscreteField& u, int alpha, std::array<int, 3> idx, int i, int di, int j,
               int dj) {
  const int m = u.domain().m();
  idx[i] += di;
  idx[j] += dj;
  for (int k = 0; k < u.domain().n(); ++k)
    if (idx[k] < 0 || idx[k] >= m) return 0.0;
  return u(alpha, u.domain().linear_index(idx));
}

}  // namespace

DiscreteHessian discrete_hessian(const DiscreteField& u) {
  const BoxDomain& dom = u.domain();
  const int n = dom.n(), N = u.components();
  DiscreteHessian H({n, N}, dom.node_count());
  for (std::size_t p = 0; p < dom.node_count(); ++p) {
    const auto idx = dom.multi_index(p);
    for (int a = 0; a < N; ++a) {
      const double c = u(a, p);
      for (int i = 0; i < n; ++i) {
        const double hi = dom.h(i);
        H.entry(p, a, i, i) =
            (shifted(u, a, idx, i, 1, i, 0) - 2.0 * c + shifted(u, a, idx, i, -1, i, 0)) / (hi * hi);
        for (int j = i + 1; j < n; ++j) {
          const double v = (shifted(u, a, idx, i, 1, j, 1) - shifted(u, a, idx, i, 1, j, -1) -
                            shifted(u, a, idx, i, -1, j, 1) + shifted(u, a, idx, i, -1, j, -1)) /
                           (4.0 * hi * dom.h(j));
          H.entry(p, a, i, j) = v;
          H.entry(p, a, j, i) = v;
        }
      }
    }
  }
  return H;
}

DiscreteField contract_field(const SymTensor4& A, const DiscreteHessian& H, const BoxDomain& dom) {
  require_same_dims(A.dims(), H.dims(), "contract_field");
  DiscreteField out(dom, A.dims().N);
  for (std::size_t p = 0; p < H.node_count(); ++p) out.set_node_value(p, contract_hess(A, H.at(p)));
  return out;
}

// ---------------------------------------------------------------------------
// Norms

double l2_norm(const DiscreteField& u) {
  return std::sqrt(u.domain().cell_volume() * u.values().squaredNorm());
}

double hessian_l2_norm(const DiscreteHessian& H, const BoxDomain& dom) {
  double s = 0.0;
  const Dims d = H.dims();
  for (std::size_t p = 0; p < H.node_count(); ++p)
    for (int a = 0; a < d.N; ++a)
      for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j) {
          const double e = H.entry(p, a, i, j);
          s += e * e;
        }
  return std::sqrt(dom.cell_volume() * s);
}

DiscreteNorms discrete_norms(const DiscreteField& u) {
  const BoxDomain& dom = u.domain();
  const int n = dom.n(), N = u.components(), m = dom.m();
  DiscreteNorms r;
  r.l2 = l2_norm(u);

  // Forward differences along axis k over the m+1 edges between consecutive
  // nodes (boundary nodes included, where u = 0), interior in the other axes.
  double grad = 0.0;
  for (int a = 0; a < N; ++a) {
    for (int k = 0; k < n; ++k) {
      const double hk = dom.h(k);
      for (std::size_t p = 0; p < dom.node_count(); ++p) {
        auto idx = dom.multi_index(p);
        if (idx[k] != 0) continue;
        double prev = 0.0;
        for (int s = 0; s < m; ++s) {
          idx[k] = s;
          const double cur = u(a, dom.linear_index(idx));
          grad += (cur - prev) * (cur - prev) / (hk * hk);
          prev = cur;
        }
        grad += prev * prev / (hk * hk);
      }
    }
  }
  r.h1_semi = std::sqrt(dom.cell_volume() * grad);
  r.h2_semi = hessian_l2_norm(discrete_hessian(u), dom);
  return r;
}

// ---------------------------------------------------------------------------
// Probe fields

DiscreteField random_smooth_field(const BoxDomain& dom, int N, std::uint64_t seed, int max_mode) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(1, max_mode);
  const int n = dom.n();
  struct Term {
    int alpha;
    std::array<int, 3> k;
    double c;
  };
  std::vector<Term> terms;
  for (int a = 0; a < N; ++a)
    for (int t = 0; t < 4; ++t) {
      Term term{a, {1, 1, 1}, coef(rng)};
      for (int d = 0; d < n; ++d) term.k[d] = mode(rng);
      terms.push_back(term);
    }
  DiscreteField u(dom, N);
  for (std::size_t p = 0; p < dom.node_count(); ++p) {
    const Vector x = dom.point(p);
    for (const Term& t : terms) {
      double v = t.c;
      for (int d = 0; d < n; ++d)
        v *= std::sin(t.k[d] * std::numbers::pi * (x[d] - dom.lower()[d]) /
                      (dom.upper()[d] - dom.lower()[d]));
      u(t.alpha, p) += v;
    }
  }
  return u;
}

std::vector<DiscreteField> random_probe_fields(const BoxDomain& dom, int N, int count,
                                               std::uint64_t seed) {
  std::vector<DiscreteField> probes;
  probes.reserve(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int c = 0; c < count; ++c) {
    if (c % 2 == 0) {
      probes.push_back(random_smooth_field(dom, N, rng(), 2 + c % 7));
    } else {
      DiscreteField u(dom, N);
      for (Eigen::Index k = 0; k < u.values().size(); ++k) u.values()[k] = unif(rng);
      probes.push_back(std::move(u));
    }
  }
  return probes;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const BoxDomain& dom) {
  return {{"kind", "box"}, {"lower", dom.lower()}, {"upper", dom.upper()}, {"m", dom.m()}};
}

BoxDomain box_from_json(const nlohmann::json& j) {
  try {
    return BoxDomain(j.at("lower").get<std::vector<double>>(),
                     j.at("upper").get<std::vector<double>>(), j.at("m").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("box domain JSON: ") + e.what());
  }
}

void write_field_csv(std::ostream& os, const DiscreteField& u) {
  const nlohmann::json header = {
      {"domain", to_json(u.domain())}, {"m", u.domain().m()}, {"N", u.components()}};
  os << "# " << header.dump() << "\n";
  os << "node,component,value\n";
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int a = 0; a < u.components(); ++a)
    for (std::size_t p = 0; p < u.node_count(); ++p) os << p << ',' << a << ',' << u(a, p) << '\n';
}

DiscreteField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0)
    throw FormatError("field CSV: missing '# {json}' header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("field CSV header: ") + e.what());
  }
  const BoxDomain dom = box_from_json(header.at("domain"));
  const int N = header.at("N").get<int>();
  if (header.at("m").get<int>() != dom.m()) throw FormatError("field CSV: header m mismatch");
  if (!std::getline(is, line) || line != "node,component,value")
    throw FormatError("field CSV: missing column header");
  DiscreteField u(dom, N);
  std::vector<bool> seen(static_cast<std::size_t>(u.values().size()), false);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t p = 0;
    int a = 0;
    double v = 0.0;
    char c1 = 0, c2 = 0;
    if (!(row >> p >> c1 >> a >> c2 >> v) || c1 != ',' || c2 != ',')
      throw FormatError("field CSV: malformed row '" + line + "'");
    if (a < 0 || a >= N || p >= dom.node_count()) throw FormatError("field CSV: index out of range");
    u(a, p) = v;
    seen[a * dom.node_count() + p] = true;
  }
  for (bool s : seen)
    if (!s) throw FormatError("field CSV: missing entries");
  return u;
}

}  // namespace hessiansys
