#include "hessiansys/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "hessiansys/config.hpp"
#include "hessiansys/ellipticity_check.hpp"
#include "hessiansys/error.hpp"
#include "hessiansys/mt_verify.hpp"
#include "hessiansys/nonlinear_solver.hpp"
#include "hessiansys/operator_catalog.hpp"

namespace hessiansys {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr const char* version = "1.0.0";

json module_versions() {
  return {{"tensor_core", version},      {"sh_structure", version},     {"linear_solver", version},
          {"nonlinear_solver", version}, {"ellipticity_check", version}, {"mt_verify", version},
          {"operator_catalog", version}, {"cli_runner", version}};
}

// Read-only view of one config section with defaults.
class Section {
public:
  Section(const json& cfg, const char* name)
      : name_(name), body_(cfg.contains(name) ? cfg.at(name) : json::object()) {}

  bool present() const { return !body_.empty(); }
  bool has(const char* key) const { return body_.contains(key); }
  const json& at(const char* key) const { return body_.at(key); }
  double number(const char* key, double fallback) const {
    return has(key) ? body_.at(key).get<double>() : fallback;
  }
  long long integer(const char* key, long long fallback) const {
    return has(key) ? body_.at(key).get<long long>() : fallback;
  }
  std::string string(const char* key, const std::string& fallback) const {
    return has(key) ? body_.at(key).get<std::string>() : fallback;
  }
  bool boolean(const char* key, bool fallback) const {
    return has(key) ? body_.at(key).get<bool>() : fallback;
  }
  std::vector<double> numbers(const char* key) const {
    try {
      return body_.at(key).get<std::vector<double>>();
    } catch (const json::exception&) {
      throw FormatError(std::string("[") + name_ + "] " + key + " must be an array of numbers");
    }
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError(std::string("[") + name_ + "] " + msg);
  }

private:
  const char* name_;
  json body_;
};

struct Context {
  json cfg;
  std::string hash;
  fs::path out_dir;
  bool write_json = true;
  bool write_csv = true;
  std::ostream& out;
};

// --- config interpretation --------------------------------------------------

int positive_int(const Section& s, const char* key, long long fallback, long long lo = 1) {
  const long long v = s.integer(key, fallback);
  if (v < lo || v > std::numeric_limits<int>::max())
    s.fail(std::string(key) + " must be an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

double positive_number(const Section& s, const char* key, double fallback) {
  const double v = s.number(key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) s.fail(std::string(key) + " must be positive");
  return v;
}

BoxDomain box_for(const Context& c, int m, int n_default) {
  const Section d(c.cfg, "domain");
  if (d.string("kind", "box") != "box") d.fail("kind must be \"box\"");
  const int n = positive_int(d, "n", n_default, 2);
  std::vector<double> lower = d.has("lower") ? d.numbers("lower") : std::vector<double>(n, 0.0);
  std::vector<double> upper = d.has("upper") ? d.numbers("upper") : std::vector<double>(n, 1.0);
  try {
    return BoxDomain(lower, upper, m);
  } catch (const Error& e) {
    d.fail(e.what());
  }
}

int mesh_size(const Context& c) { return positive_int(Section(c.cfg, "domain"), "m", 32, 3); }

CatalogEntry entry_from(const json& cfg, const char* section, const BoxDomain* dom,
                        const std::string& fallback_id = "") {
  const Section s(cfg, section);
  const std::string id = s.string("id", fallback_id);
  if (id.empty()) s.fail("id is required");
  const json params = s.has("params") ? s.at("params") : json::object();
  try {
    if (dom) return catalog_get(id, params, dom->lower(), dom->upper());
    return catalog_get(id, params);
  } catch (const PreconditionError& e) {
    s.fail(e.what());
  }
}

LinearSolverOptions linear_options(const Context& c) {
  const Section s(c.cfg, "solver");
  LinearSolverOptions o;
  o.tol = positive_number(s, "linear_tol", 1e-10);
  const std::string m = s.string("method", "auto");
  if (m == "auto") o.method = SolveMethod::automatic;
  else if (m == "direct") o.method = SolveMethod::direct;
  else if (m == "iterative") o.method = SolveMethod::iterative;
  else s.fail("method must be \"auto\", \"direct\" or \"iterative\"");
  return o;
}

IterationOptions iteration_options(const Context& c) {
  const Section s(c.cfg, "solver");
  IterationOptions o;
  o.tol = positive_number(s, "tol", 1e-10);
  o.max_iter = positive_int(s, "max_iter", 200);
  o.guard_window = positive_int(s, "guard_window", 5);
  o.linear = linear_options(c);
  return o;
}

std::uint64_t cert_seed(const Context& c) {
  return static_cast<std::uint64_t>(positive_int(Section(c.cfg, "certification"), "seed", 1, 0));
}

// --- output -------------------------------------------------------------------

json envelope(const Context& c, const std::string& command, json result) {
  return {{"command", command},
          {"config_hash", c.hash},
          {"versions", module_versions()},
          {"result", std::move(result)}};
}

void write_text(const Context& c, const std::string& name, const std::string& text) {
  fs::create_directories(c.out_dir);
  std::ofstream f(c.out_dir / name, std::ios::binary);
  if (!f) throw Error("cannot write '" + (c.out_dir / name).string() + "'");
  f << text;
}

void write_report(const Context& c, const std::string& command, json result) {
  if (!c.write_json) return;
  write_text(c, command + ".json", envelope(c, command, std::move(result)).dump(2) + "\n");
}

void write_field(const Context& c, const std::string& name, const DiscreteField& u) {
  if (!c.write_csv) return;
  std::ostringstream ss;
  write_field_csv(ss, u);
  write_text(c, name, ss.str());
}

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return ss.str();
}

std::string short_num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

void write_ratio_table(const Context& c, const std::string& name, const std::vector<double>& d) {
  if (!c.write_csv) return;
  std::ostringstream ss;
  ss << "k,d_k,ratio\n";
  for (std::size_t k = 0; k < d.size(); ++k) {
    ss << k << ',' << num(d[k]) << ',';
    if (k > 0 && d[k - 1] > 0.0) ss << num(d[k] / d[k - 1]);
    ss << '\n';
  }
  write_text(c, name, ss.str());
}

// --- commands -------------------------------------------------------------------

int cmd_list(Context& c) {
  for (const auto& l : catalog_list()) c.out << l.id << "  " << l.description << "\n";
  return exit_ok;
}

SymTensor4 tensor_from_config(const Context& c) {
  const Section t(c.cfg, "tensor");
  if (!t.present()) return entry_from(c.cfg, "operator", nullptr).op.A;
  const int n = positive_int(t, "n", 2), N = positive_int(t, "N", 1);
  try {
    if (t.has("entries"))
      return tensor_from_json({{"n", n}, {"N", N}, {"entries", t.at("entries")}});
    if (t.has("matrix")) {
      const Matrix M = matrix_from_json(t.at("matrix"));
      if (M.rows() != n * N || M.cols() != n * N) t.fail("matrix must be Nn x Nn");
      if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12) t.fail("matrix must be symmetric");
      return SymTensor4::from_matrix({n, N}, M);
    }
  } catch (const DimensionError& e) {
    t.fail(e.what());
  }
  t.fail("needs entries or matrix");
}

int cmd_check_tensor(Context& c) {
  const SymTensor4 A = tensor_from_config(c);
  const double tol = positive_number(Section(c.cfg, "tensor"), "tol", 1e-8);
  const RankOnePositivity r = is_rank_one_positive(A, tol);
  json result = {{"tensor", to_json(A)},
                 {"nu", r.ellipticity.nu},
                 {"argmin_eta", to_json(r.ellipticity.argmin_eta)},
                 {"argmin_a", to_json(r.ellipticity.argmin_a)},
                 {"tolerance", r.ellipticity.tolerance},
                 {"rank_one_positive", r.positive}};
  write_report(c, "check-tensor", result);
  c.out << "check-tensor " << (r.positive ? "PASS" : "FAIL") << " nu=" << short_num(r.ellipticity.nu)
        << "\n";
  return r.positive ? exit_ok : exit_failure;
}

int cmd_verify_sh(Context& c) {
  const Section s(c.cfg, "sh");
  SHDecomposition dec;
  if (s.present() && (s.has("B") || s.has("A"))) {
    json j = {{"n", positive_int(s, "n", 2)}, {"N", positive_int(s, "N", 2)},
              {"B", s.has("B") ? s.at("B") : json::array()},
              {"A", s.has("A") ? s.at("A") : json::array()}};
    try {
      dec = sh_from_json(j);
    } catch (const Error& e) {
      s.fail(e.what());
    }
  } else {
    const CatalogEntry e = entry_from(c.cfg, "operator", nullptr);
    if (!e.sh) throw FormatError("catalog entry '" + e.id + "' has no SH decomposition; give [sh]");
    dec = *e.sh;
  }
  const double tol = positive_number(s, "tol", 1e-10);
  const SHReport rep = verify_sh(dec, tol);
  json result = {{"decomposition", to_json(dec)}, {"report", to_json(rep)}};
  if (rep.pass) {
    const SHDecomposition scaled = s.boolean("rescale", true) ? rescale_common_lambda(dec) : dec;
    const double nu_sh = nu_from_sh(scaled, 1e-8);
    const double nu_num = ellipticity_constant(assemble(scaled)).nu;
    result["nu_from_sh"] = nu_sh;
    result["nu_numerical"] = nu_num;
    const MinRangeIdentity id = min_range_quadratic_identity(scaled);
    result["min_range_identity"] = {{"lhs", id.lhs}, {"rhs", id.rhs}};
  }
  write_report(c, "verify-sh", result);
  c.out << "verify-sh " << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? exit_ok : exit_failure;
}

int cmd_solve_linear(Context& c) {
  const Section d(c.cfg, "domain");
  std::vector<int> meshes;
  if (d.has("refine")) {
    for (double m : d.numbers("refine")) {
      if (m < 3 || m != std::floor(m)) d.fail("refine entries must be integers >= 3");
      meshes.push_back(static_cast<int>(m));
    }
    if (meshes.empty()) d.fail("refine must not be empty");
  } else {
    meshes.push_back(mesh_size(c));
  }
  const BoxDomain first = box_for(c, meshes.front(), 2);
  const CatalogEntry e = entry_from(c.cfg, "operator", &first);
  const SymTensor4& A = e.op.A;
  const LinearSolverOptions opts = linear_options(c);

  json runs = json::array();
  std::ostringstream table;
  table << "m,error,order\n";
  double prev_err = 0.0, prev_h = 0.0;
  DiscreteField last;
  LinearSolveReport last_report;
  for (int m : meshes) {
    const BoxDomain dom = box_for(c, m, A.dims().n);
    const DiscreteField exact = manufactured_solution(e, dom);
    const DiscreteField f = DiscreteField::sample(dom, A.dims().N, [&](const Vector& x) {
      return contract_hess(A, e.solution->hessian(x));
    });
    auto [u, rep] = solve_dirichlet(A, f, dom, opts);
    const double err = l2_norm(u - exact);
    json run = {{"m", m}, {"error", err}, {"report", to_json(rep)},
                {"apriori_ratio", apriori_estimate_check(u, f, A)}};
    table << m << ',' << num(err) << ',';
    if (prev_err > 0.0) {
      const double order = std::log(prev_err / err) / std::log(prev_h / dom.max_h());
      run["order"] = order;
      run["error_ratio"] = prev_err / err;
      table << num(order);
    }
    table << '\n';
    prev_err = err;
    prev_h = dom.max_h();
    runs.push_back(run);
    last = std::move(u);
    last_report = rep;
  }
  write_report(c, "solve-linear", {{"operator", e.id}, {"runs", runs}});
  write_field(c, "solution.csv", last);
  if (c.write_csv) write_text(c, "refinement.csv", table.str());
  c.out << "solve-linear OK m=" << meshes.back() << " residual=" << short_num(last_report.relative_residual)
        << " error=" << short_num(prev_err) << "\n";
  return exit_ok;
}

int cmd_solve(Context& c) {
  const BoxDomain dom0 = box_for(c, mesh_size(c), 2);
  const CatalogEntry e = entry_from(c.cfg, "operator", &dom0);
  const BoxDomain dom = box_for(c, mesh_size(c), e.op.dims.n);
  const DiscreteField f = manufacture_rhs(e, dom);
  IterationResult r = campanato_iterate(e.op, f, dom, iteration_options(c));
  const double err = l2_norm(r.u - manufactured_solution(e, dom));
  write_report(c, "solve", {{"operator", e.id}, {"m", dom.m()}, {"iteration", to_json(r.report)},
                            {"error_l2", err}});
  write_field(c, "solution.csv", r.u);
  write_ratio_table(c, "convergence.csv", r.report.distances);
  c.out << "solve OK iterations=" << r.report.iterations
        << " median_ratio=" << short_num(r.report.median_ratio) << " error=" << short_num(err) << "\n";
  return exit_ok;
}

void print_condition(Context& c, const ConditionReport& r) {
  c.out << r.condition << ' ' << (r.pass ? "PASS" : "FAIL")
        << " worst_margin=" << short_num(r.worst_margin) << " witness=";
  if (r.witness && !r.pass) c.out << *r.witness;
  else c.out << "none";
  c.out << "\n";
}

int cmd_check_ellipticity(Context& c) {
  const Section cert(c.cfg, "certification");
  const Section dsec(c.cfg, "domain");
  const CatalogEntry e = entry_from(c.cfg, "operator", nullptr);
  const Dims dims = e.op.dims;
  std::vector<double> lower, upper;
  if (dsec.has("lower")) lower = dsec.numbers("lower");
  if (dsec.has("upper")) upper = dsec.numbers("upper");
  const std::size_t samples = static_cast<std::size_t>(positive_int(cert, "samples", 10000));
  SampleCloud cloud;
  try {
    cloud = SampleCloud::generate(dims, samples, cert_seed(c), lower, upper);
  } catch (const DimensionError& ex) {
    dsec.fail(ex.what());
  }

  const double beta = positive_number(cert, "beta", e.op.beta);
  const double gamma = positive_number(cert, "gamma", e.op.gamma);
  json result = {{"operator", e.id}, {"seed", cloud.seed}, {"samples", cloud.size()}};
  const ConditionReport k = check_k_condition(e.op, e.op.A, beta, gamma, cloud);
  print_condition(c, k);
  result["k_condition"] = to_json(k, &cloud);

  if (cert.has("lambda") || cert.has("kappa") || e.def1) {
    const Def1Parameters p = e.def1.value_or(Def1Parameters{});
    const ConditionReport r = check_def1(e.op, e.op.A, cert.number("lambda", p.lambda),
                                         cert.number("kappa", p.kappa), cloud);
    print_condition(c, r);
    result["def1"] = to_json(r, &cloud);
  }
  if (cert.has("ct_alpha") || cert.has("ct_beta") || cert.has("ct_gamma") || e.ct) {
    const CTCandidate p = e.ct.value_or(CTCandidate{});
    const ConditionReport r =
        check_campanato_tarsia(e.op, positive_number(cert, "ct_alpha", p.alpha),
                               positive_number(cert, "ct_beta", p.beta),
                               positive_number(cert, "ct_gamma", p.gamma), cloud);
    print_condition(c, r);
    result["campanato_tarsia"] = to_json(r, &cloud);
    std::vector<double> alphas;
    for (int k2 = -30; k2 <= 10; ++k2) alphas.push_back(std::pow(10.0, k2 / 10.0));
    const CTFit fit = fit_campanato_tarsia(e.op, cloud, alphas);
    result["campanato_tarsia_fit"] = to_json(fit.fit);
    result["campanato_tarsia_fit"]["alpha"] = fit.alpha;
    c.out << "campanato-tarsia-fit alpha=" << short_num(fit.alpha) << " beta=" << short_num(fit.fit.beta)
          << " gamma=" << short_num(fit.fit.gamma) << " feasible=" << (fit.fit.feasible ? "yes" : "no")
          << "\n";
  }
  if (cert.boolean("fit", true)) {
    const TwoParameterFit fit = fit_beta_gamma(e.op, e.op.A, cloud);
    result["fit"] = to_json(fit);
    c.out << "fit beta=" << short_num(fit.beta) << " gamma=" << short_num(fit.gamma)
          << " feasible=" << (fit.feasible ? "yes" : "no") << "\n";
  }
  write_report(c, "check-ellipticity", result);
  return k.pass ? exit_ok : exit_failure;
}

int cmd_mt_test(Context& c) {
  const Section mt(c.cfg, "mt");
  const std::string kind = mt.string("domain", "disk");
  SmoothDomain2D dom = SmoothDomain2D::disk(1.0);
  try {
    if (kind == "disk") dom = SmoothDomain2D::disk(mt.number("R", 1.0));
    else if (kind == "ellipse") dom = SmoothDomain2D::ellipse(mt.number("a", 2.0), mt.number("b", 1.0));
    else mt.fail("domain must be \"disk\" or \"ellipse\"");
  } catch (const PreconditionError& e) {
    mt.fail(e.what());
  }
  TestFunction v;
  try {
    v = make_test_function(mt.string("function", "bubble"), dom);
  } catch (const PreconditionError& e) {
    mt.fail(e.what());
  }
  std::vector<int> orders{8, 16, 32, 64};
  if (mt.has("quad_orders")) {
    orders.clear();
    for (double q : mt.numbers("quad_orders")) {
      if (q < 2 || q != std::floor(q)) mt.fail("quad_orders entries must be integers >= 2");
      orders.push_back(static_cast<int>(q));
    }
    if (orders.empty()) mt.fail("quad_orders must not be empty");
  }
  const double tol = positive_number(mt, "tol", 1e-6);

  std::ostringstream table;
  table << "quad_order,lhs,rhs,mismatch\n";
  json conv = json::array();
  MTIdentityReport last;
  for (int q : orders) {
    last = mt_identity(v, dom, q);
    table << q << ',' << num(last.lhs) << ',' << num(last.rhs) << ',' << num(last.mismatch) << '\n';
    conv.push_back(to_json(last));
  }
  bool ok = last.mismatch <= tol;
  json result = {{"domain", {{"kind", kind}, {"a", dom.a()}, {"b", dom.b()}}},
                 {"function", v.name},
                 {"identity", to_json(last)},
                 {"convergence", conv}};

  // Algebraic sandwich inequality on random samples.
  const int count = positive_int(mt, "sandwich_samples", 1000, 0);
  std::mt19937_64 rng(static_cast<std::uint64_t>(positive_int(mt, "seed", cert_seed(c), 0)));
  std::uniform_real_distribution<double> unif(0.1, 4.0), sym(-1.0, 1.0);
  int violations = 0;
  double identity_err = 0.0;
  for (int s = 0; s < count; ++s) {
    Eigen::Vector2d lam(unif(rng), unif(rng));
    std::sort(lam.data(), lam.data() + 2);
    Matrix L = lam.cwiseSqrt().asDiagonal();
    Matrix X(2, 2);
    X(0, 0) = sym(rng);
    X(0, 1) = X(1, 0) = sym(rng);
    X(1, 1) = sym(rng);
    const SandwichReport r = lambda_sandwich_inequality(L, X);
    if (!r.holds) ++violations;
    identity_err = std::max(identity_err, std::abs(r.identity_lhs - r.identity_rhs) /
                                              std::max(1.0, r.identity_lhs));
  }
  result["sandwich"] = {{"samples", count}, {"violations", violations}, {"identity_error", identity_err}};
  ok = ok && violations == 0 && identity_err <= 1e-12;

  // Discrete generalized inequality when a decomposition is available.
  if (c.cfg.contains("operator")) {
    const CatalogEntry e = entry_from(c.cfg, "operator", nullptr);
    if (e.sh) {
      const BoxDomain box = box_for(c, mesh_size(c), e.op.dims.n);
      const auto probes = random_probe_fields(box, e.op.dims.N, positive_int(mt, "probes", 20),
                                              cert_seed(c));
      const MTInequalityReport r = generalized_mt_inequality(e.op.A, *e.sh, probes);
      result["generalized_inequality"] = to_json(r);
      ok = ok && r.pass;
      c.out << "generalized-mt " << (r.pass ? "PASS" : "FAIL") << " worst_ratio="
            << short_num(r.worst_ratio) << " bound=" << short_num(r.bound) << "\n";
    }
  }
  write_report(c, "mt-test", result);
  if (c.write_csv) write_text(c, "mt_convergence.csv", table.str());
  c.out << "mt-identity " << (last.mismatch <= tol ? "PASS" : "FAIL") << " lhs=" << short_num(last.lhs)
        << " rhs=" << short_num(last.rhs) << " mismatch=" << short_num(last.mismatch) << "\n";
  return ok ? exit_ok : exit_failure;
}

int cmd_stability(Context& c) {
  const BoxDomain dom0 = box_for(c, mesh_size(c), 2);
  const CatalogEntry F = entry_from(c.cfg, "operator", &dom0);
  const CatalogEntry G = entry_from(c.cfg, "perturbation", &dom0, "tanh-plus-sin");
  if (!(F.op.dims == G.op.dims)) throw FormatError("[perturbation] dimensions differ from [operator]");
  const BoxDomain dom = box_for(c, mesh_size(c), F.op.dims.n);
  const Section p(c.cfg, "perturbation");
  StabilityOptions opts;
  opts.tol = positive_number(p, "tol", 1e-9);
  opts.max_iter = positive_int(p, "max_iter", 100);
  opts.inner = iteration_options(c);
  opts.cloud_seed = cert_seed(c);
  opts.cloud_samples = static_cast<std::size_t>(
      positive_int(Section(c.cfg, "certification"), "samples", 10000));
  const DiscreteField g = manufacture_rhs(G, dom);
  const StabilityResult r = stability_solve(F.op, G.op, g, dom, opts);
  const double err = l2_norm(r.u - manufactured_solution(G, dom));
  write_report(c, "stability", {{"operator", F.id}, {"perturbation", G.id}, {"m", dom.m()},
                                {"stability", to_json(r)}, {"error_l2", err}});
  write_field(c, "solution.csv", r.u);
  write_ratio_table(c, "stability.csv", r.distances);
  c.out << "stability OK outer_iterations=" << r.iterations << " nu_FG=" << short_num(r.nu_FG)
        << " nu_F=" << short_num(r.nu_F) << " error=" << short_num(err) << "\n";
  return exit_ok;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver and verifier for elliptic Hessian systems", "hessiansys"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  long long seed = -1;
  struct Command {
    const char* name;
    const char* help;
    int (*run)(Context&);
  };
  const std::vector<Command> commands = {
      {"list", "List catalog operators", cmd_list},
      {"check-tensor", "Ellipticity constant and rank-one positivity", cmd_check_tensor},
      {"verify-sh", "Check a structural-hypothesis decomposition", cmd_verify_sh},
      {"solve-linear", "Solve the linear Dirichlet problem", cmd_solve_linear},
      {"solve", "Campanato fixed-point solve", cmd_solve},
      {"check-ellipticity", "Sampled ellipticity certification", cmd_check_ellipticity},
      {"mt-test", "Miranda-Talenti identity and inequalities", cmd_mt_test},
      {"stability", "Nested solve for a near operator", cmd_stability},
  };
  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    if (std::string(cmd.name) != "list") sub->add_option("--config", config_path, "Run config")->required();
    sub->add_option("--seed", seed, "Override the certification seed");
    sub->add_option("--out", out_dir, "Output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  const Command* chosen = nullptr;
  for (const auto& cmd : commands)
    if (app.got_subcommand(cmd.name)) chosen = &cmd;

  try {
    json cfg = config_path.empty() ? json::object() : load_config(config_path);
    validate_config(cfg);
    if (seed >= 0) {
      cfg["certification"]["seed"] = seed;
      if (cfg.contains("mt")) cfg["mt"]["seed"] = seed;
    }
    Context ctx{cfg, config_hash(cfg), fs::path("."), true, true, out};
    const Section o(cfg, "output");
    ctx.out_dir = out_dir.empty() ? fs::path(o.string("directory", ".")) : fs::path(out_dir);
    if (o.has("formats")) {
      ctx.write_json = ctx.write_csv = false;
      for (const auto& f : o.at("formats")) {
        if (f == "json") ctx.write_json = true;
        else if (f == "csv") ctx.write_csv = true;
        else o.fail("formats entries must be \"json\" or \"csv\"");
      }
    }
    return chosen->run(ctx);
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const json::exception& e) {
    err << "error: config: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return exit_failure;
  }
}

}  // namespace hessiansys
